#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace mlen {

enum class Units { nats, bits };

Units parse_units(std::string_view text);
std::string_view to_string(Units units);
/// Converts a quantity computed in nats.
double in_units(double nats, Units units);

/// Shannon entropy in nats; zero entries contribute nothing.
double shannon_entropy(std::span<const double> p);

/// Mutual information (nats) of a 2x2 joint distribution p[a * 2 + c].
/// Evaluated as sum p_ac log(1 + x_ac) with x_ac = +-det / (p_a p_c), which
/// keeps full relative precision when the distribution is nearly a product.
double mi_2x2(const std::array<double, 4>& p);

/// Same, with the determinant p00 p11 - p01 p10 supplied separately (e.g. from
/// a closed form) instead of being formed by cancellation.
double mi_2x2(const std::array<double, 4>& p, double det);

/// Mutual information (nats) of a joint table p[a * n_c + c].
double mutual_information(std::span<const double> p, int n_a, int n_c);

/// I(A:C|B) in nats from a joint table over n_a + n_b + n_c binary variables,
/// indexed with A in the most significant bits and C in the least.
double conditional_mutual_information(std::span<const double> joint, int n_a, int n_b, int n_c);

} // namespace mlen
