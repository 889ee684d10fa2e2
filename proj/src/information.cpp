#include "mlen/information.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mlen {

Units parse_units(std::string_view text) {
    if (text == "nats") return Units::nats;
    if (text == "bits") return Units::bits;
    throw std::invalid_argument("units must be 'nats' or 'bits', got '" + std::string(text) + "'");
}

std::string_view to_string(Units units) { return units == Units::nats ? "nats" : "bits"; }

double in_units(double nats, Units units) {
    return units == Units::nats ? nats : nats / std::numbers::ln2;
}

double shannon_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

double mi_2x2(const std::array<double, 4>& p) {
    return mi_2x2(p, p[0] * p[3] - p[1] * p[2]);
}

double mi_2x2(const std::array<double, 4>& p_in, double det) {
    const double total = p_in[0] + p_in[1] + p_in[2] + p_in[3];
    if (!(total > 0.0)) throw std::invalid_argument("mi_2x2: distribution has no mass");
    std::array<double, 4> p = p_in;
    for (double& v : p) v /= total;
    det /= total * total;
    const double ra[2] = {p[0] + p[1], p[2] + p[3]};
    const double rc[2] = {p[0] + p[2], p[1] + p[3]};
    if (ra[0] <= 0.0 || ra[1] <= 0.0 || rc[0] <= 0.0 || rc[1] <= 0.0) return 0.0;

    std::array<double, 4> x{};
    double x_max = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
            const double sign = (a == c) ? 1.0 : -1.0;
            x[static_cast<std::size_t>(a * 2 + c)] = sign * det / (ra[a] * rc[c]);
            x_max = std::max(x_max, std::abs(x[static_cast<std::size_t>(a * 2 + c)]));
        }

    double mi = 0.0;
    if (x_max < 1e-3) {
        // sum_ac p x = det^2 sum 1/(p_a p_c) exactly; the remaining log1p
        // series terms start at x^2
        double inv = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) inv += 1.0 / (ra[a] * rc[c]);
        mi = det * det * inv;
        for (std::size_t i = 0; i < 4; ++i) {
            double term = 0.0;
            double xk = x[i];
            for (int k = 2; k <= 8; ++k) {
                xk *= x[i];
                term += ((k % 2 == 0) ? -1.0 : 1.0) * xk / k;
            }
            mi += p[i] * term;
        }
    } else {
        for (std::size_t i = 0; i < 4; ++i)
            if (p[i] > 0.0) mi += p[i] * std::log1p(x[i]);
    }
    return std::max(mi, 0.0);
}

double mutual_information(std::span<const double> p, int n_a, int n_c) {
    if (static_cast<std::size_t>(n_a) * static_cast<std::size_t>(n_c) != p.size())
        throw std::invalid_argument("mutual_information: table size mismatch");
    if (n_a == 2 && n_c == 2) return mi_2x2({p[0], p[1], p[2], p[3]});
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    std::vector<double> pa(static_cast<std::size_t>(n_a), 0.0), pc(static_cast<std::size_t>(n_c), 0.0);
    std::vector<double> joint(p.begin(), p.end());
    for (double& v : joint) v /= total;
    for (int a = 0; a < n_a; ++a)
        for (int c = 0; c < n_c; ++c) {
            const double v = joint[static_cast<std::size_t>(a * n_c + c)];
            pa[static_cast<std::size_t>(a)] += v;
            pc[static_cast<std::size_t>(c)] += v;
        }
    double mi = 0.0;
    for (int a = 0; a < n_a; ++a)
        for (int c = 0; c < n_c; ++c) {
            const double v = joint[static_cast<std::size_t>(a * n_c + c)];
            if (v > 0.0) mi += v * std::log(v / (pa[static_cast<std::size_t>(a)] * pc[static_cast<std::size_t>(c)]));
        }
    return std::max(mi, 0.0);
}

double conditional_mutual_information(std::span<const double> joint, int n_a, int n_b, int n_c) {
    const int n = n_a + n_b + n_c;
    if (n_a < 0 || n_b < 0 || n_c < 0 || n > 30 || joint.size() != (std::size_t{1} << n))
        throw std::invalid_argument("conditional_mutual_information: table size mismatch");
    const std::size_t na = std::size_t{1} << n_a;
    const std::size_t nb = std::size_t{1} << n_b;
    const std::size_t nc = std::size_t{1} << n_c;
    std::vector<double> ab(na * nb, 0.0), bc(nb * nc, 0.0), b(nb, 0.0);
    for (std::size_t ia = 0; ia < na; ++ia)
        for (std::size_t ib = 0; ib < nb; ++ib)
            for (std::size_t ic = 0; ic < nc; ++ic) {
                const double v = joint[(ia * nb + ib) * nc + ic];
                ab[ia * nb + ib] += v;
                bc[ib * nc + ic] += v;
                b[ib] += v;
            }
    return shannon_entropy(ab) + shannon_entropy(bc) - shannon_entropy(b) - shannon_entropy(joint);
}

} // namespace mlen
