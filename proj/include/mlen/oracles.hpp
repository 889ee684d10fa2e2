#pragma once

#include "mlen/mps.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace mlen {

/// Depolarized cat state with flip probability p.
struct DepolCatParams {
    double p = 0.0;
    double q = 1.0;
    double lambda = 0.0;   // p / q
    double z = 0.0;        // -log lambda
    double m = 1.0;        // magnetization of each sector, tanh(z / 2)

    static DepolCatParams from_p(double p);
    /// State after time t of the depolarizing channel: p = (1 - e^{-t}) / 2.
    static DepolCatParams from_time(double t);
};

struct ThermalParams {
    double beta = 0.0;
    double xi = 0.0;      // -1 / log tanh beta
    double gamma = 0.0;   // tanh 2 beta

    static ThermalParams from_beta(double beta);
};

/// Thermal correlation length; +infinity at beta = infinity, 0 at beta = 0.
double thermal_correlation_length(double beta);

/// Conditional distribution of the two spins flanking B given that B has
/// n/2 + l up spins, p[a * 2 + c].
std::array<double, 4> depolarized_cat_conditional(double p, int l);

/// Exact I(A:C|B) for the depolarized cat state as a sum over the
/// magnetization of B; |B| must be even.
double exact_cmi_depolarized_cat(double p, int b_size);

/// I(A:C|B) by enumerating all 2^(|A|+|B|+|C|) configurations of the block
/// starting at `origin` (at most kMaxMarginalSites sites).
double brute_force_cmi(const UniformMps& mps, const Tripartition& parts, long origin = 0);
inline double brute_force_cmi(const UniformMps& mps, int b_size) {
    return brute_force_cmi(mps, Tripartition{1, b_size, 1});
}

struct AsymptoticCmi {
    double value = 0.0;
    /// Whether z is small and z^2 |B| large enough for the saddle point.
    bool valid = false;
};
AsymptoticCmi asymptotic_cmi(double p, int b_size);

/// Late-time Markov length of the depolarized cat, 8 / z^2.
double xi_star_from_p(double p);
/// Small-z form 2 / m^2 = 2 e^{2t}.
double xi_star(double t);

/// Scaling function: xi*^2 I as a function of x = |B| / xi*.
double collapse_master_curve(double x);

/// One sweep of the mean-field-exact magnetization update: even sites first,
/// then odd sites using the updated even neighbours. The profile is periodic
/// and must have even length.
std::vector<double> magnetization_recursion(std::vector<double> profile, double beta, double alpha);

/// Magnetization of the even and odd sublattices after `steps` sweeps from a
/// uniform magnetization m0.
std::array<double, 2> magnetization_after(double m0, double beta, double alpha, int steps);

/// Exact discrete-time evolution of two-point correlators under alternating
/// even/odd Glauber sweeps, tracked per sublattice (even-even, odd-odd and
/// mixed pairs). Distances beyond r_max are pinned to the initial tail.
class CorrelatorRecursion {
public:
    /// beta_i = infinity starts from the polarized state.
    CorrelatorRecursion(double beta_i, double beta_f, double alpha, int r_max);

    void sweep();
    int steps() const { return steps_; }
    int r_max() const { return r_max_; }
    /// Correlator averaged over the two sublattices, as measured on a two-site cell.
    double correlator(int r) const;
    double even_even(int r) const { return at(e_, r); }
    double odd_odd(int r) const { return at(o_, r); }
    double mixed(int r) const { return at(m_, r); }
    /// Largest r unaffected by the pinned boundary after the sweeps so far.
    int trusted_range() const { return r_max_ - 4 * steps_; }

private:
    double at(const std::vector<double>& v, int r) const;
    double tail(int r) const;

    double beta_i_;
    double alpha_;
    double gamma_;
    int r_max_;
    int steps_ = 0;
    std::vector<double> e_, o_, m_;
};

/// C_r(step) for step = 0..steps and r = 0..r_out. Requires r_out + 4 steps <= r_max.
std::vector<std::vector<double>> correlator_recursion(double beta_i, double beta_f, double alpha, int steps,
                                                      int r_max, int r_out);

/// Mutual information between two thermal spins |B| + 1 sites apart.
double thermal_mi(double beta, int b_size);
/// Large-|B| tail e^{-2|B|/xi} / 2.
double thermal_mi_tail(double beta, int b_size);

enum class MarkovScenario { depolarized_cat, ground_to_finite, thermal_late_time };
MarkovScenario parse_markov_scenario(std::string_view name);

struct MarkovPredictionInputs {
    double t = 0.0;             // depolarized cat time
    double beta_i = 0.0;        // thermal quench
    double beta_f = 0.0;        // ground-to-finite
    double magnetization = 1.0; // m(t) for ground-to-finite
};
double markov_length_prediction(MarkovScenario scenario, const MarkovPredictionInputs& in);

} // namespace mlen
