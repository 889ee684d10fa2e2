#include "mlen/oracles.hpp"

#include "mlen/information.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mlen {

DepolCatParams DepolCatParams::from_p(double p) {
    if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("DepolCatParams: p must lie in [0, 1/2]");
    DepolCatParams c;
    c.p = p;
    c.q = 1.0 - p;
    c.lambda = p / c.q;
    c.z = p > 0.0 ? std::log(c.q / p) : std::numeric_limits<double>::infinity();
    c.m = c.q - p;  // equals tanh(z / 2)
    return c;
}

DepolCatParams DepolCatParams::from_time(double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("DepolCatParams: t must be >= 0");
    return from_p(-0.5 * std::expm1(-t));
}

double thermal_correlation_length(double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("thermal_correlation_length: beta must be >= 0");
    if (beta == 0.0) return 0.0;
    if (std::isinf(beta)) return std::numeric_limits<double>::infinity();
    // log tanh b = log1p(-2 / (e^{2b} + 1)), accurate for large b
    const double log_t = std::log1p(-2.0 / (std::exp(2.0 * beta) + 1.0));
    if (log_t == 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / log_t;
}

ThermalParams ThermalParams::from_beta(double beta) {
    ThermalParams t;
    t.beta = beta;
    t.xi = thermal_correlation_length(beta);
    t.gamma = std::tanh(2.0 * beta);
    return t;
}

namespace {

// Conditional A,C table at B magnetization l and its determinant in closed form.
std::pair<std::array<double, 4>, double> cat_conditional(const DepolCatParams& c, int l) {
    const double pq = c.p * c.q;
    const double th = std::tanh(c.z * l);
    const double sh = std::sinh(c.z);
    const double ch = std::cosh(c.z);
    std::array<double, 4> m{pq * (ch + sh * th), pq, pq, pq * (ch - sh * th)};
    const double sech = 1.0 / std::cosh(c.z * l);
    return {m, pq * pq * sh * sh * sech * sech};
}

double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    if (std::isinf(hi) && hi < 0) return hi;
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace

std::array<double, 4> depolarized_cat_conditional(double p, int l) {
    return cat_conditional(DepolCatParams::from_p(p), l).first;
}

double exact_cmi_depolarized_cat(double p, int b_size) {
    if (b_size < 2 || b_size % 2 != 0)
        throw std::invalid_argument("exact_cmi_depolarized_cat: |B| must be even and >= 2 (got " +
                                    std::to_string(b_size) + ")");
    const DepolCatParams c = DepolCatParams::from_p(p);
    if (p == 0.0 || p == 0.5) return 0.0;
    const int half = b_size / 2;
    const double log_p = std::log(c.p), log_q = std::log(c.q);
    const double log_n_fact = std::lgamma(b_size + 1.0);
    double total = 0.0;
    for (int l = -half; l <= half; ++l) {
        const int up = half + l, down = half - l;
        const double log_mult = log_n_fact - std::lgamma(up + 1.0) - std::lgamma(down + 1.0);
        const double log_weight =
            log_mult + std::log(0.5) + log_add_exp(up * log_q + down * log_p, up * log_p + down * log_q);
        const auto [m, det] = cat_conditional(c, l);
        total += std::exp(log_weight) * mi_2x2(m, det);
    }
    return total;
}

double brute_force_cmi(const UniformMps& mps, const Tripartition& parts, long origin) {
    parts.validate();
    if (parts.total() > kMaxMarginalSites)
        throw std::invalid_argument("brute_force_cmi: at most " + std::to_string(kMaxMarginalSites) +
                                    " sites can be enumerated");
    const std::vector<double> joint = marginal(mps, parts.total(), origin);
    return conditional_mutual_information(joint, parts.a_size, parts.b_size, parts.c_size);
}

AsymptoticCmi asymptotic_cmi(double p, int b_size) {
    const DepolCatParams c = DepolCatParams::from_p(p);
    AsymptoticCmi out;
    if (b_size < 1 || !std::isfinite(c.z) || c.z == 0.0) return out;
    const double z2b = c.z * c.z * b_size;
    out.value = std::pow(c.z, 4) / (16.0 * std::sqrt(3.0 * z2b)) * std::exp(-z2b / 8.0);
    out.valid = c.z <= 0.5 && z2b >= 4.0;
    return out;
}

double xi_star_from_p(double p) {
    const DepolCatParams c = DepolCatParams::from_p(p);
    return 8.0 / (c.z * c.z);
}

double xi_star(double t) { return 2.0 * std::exp(2.0 * t); }

double collapse_master_curve(double x) { return 2.0 * std::exp(-x) / std::sqrt(6.0 * x); }

std::vector<double> magnetization_recursion(std::vector<double> m, double beta, double alpha) {
    const std::size_t n = m.size();
    if (n == 0 || n % 2 != 0) throw std::invalid_argument("magnetization_recursion: profile length must be even");
    const double g = std::tanh(2.0 * beta);
    for (std::size_t parity = 0; parity < 2; ++parity) {
        std::vector<double> next = m;
        for (std::size_t i = parity; i < n; i += 2) {
            const double left = m[(i + n - 1) % n], right = m[(i + 1) % n];
            next[i] = (1.0 - alpha) * m[i] + 0.5 * alpha * g * (left + right);
        }
        m = std::move(next);
    }
    return m;
}

std::array<double, 2> magnetization_after(double m0, double beta, double alpha, int steps) {
    std::vector<double> m{m0, m0};
    for (int s = 0; s < steps; ++s) m = magnetization_recursion(std::move(m), beta, alpha);
    return {m[0], m[1]};
}

CorrelatorRecursion::CorrelatorRecursion(double beta_i, double beta_f, double alpha, int r_max)
    : beta_i_(beta_i), alpha_(alpha), gamma_(std::tanh(2.0 * beta_f)), r_max_(r_max) {
    if (r_max < 2) throw std::invalid_argument("CorrelatorRecursion: r_max must be >= 2");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("CorrelatorRecursion: alpha must lie in [0, 1]");
    if (!(beta_i >= 0.0) || !(beta_f >= 0.0)) throw std::invalid_argument("CorrelatorRecursion: beta must be >= 0");
    e_.resize(static_cast<std::size_t>(r_max) + 1);
    for (int r = 0; r <= r_max; ++r) e_[static_cast<std::size_t>(r)] = tail(r);
    o_ = e_;
    m_ = e_;
}

double CorrelatorRecursion::tail(int r) const {
    if (std::isinf(beta_i_)) return 1.0;
    return std::pow(std::tanh(beta_i_), r);
}

double CorrelatorRecursion::at(const std::vector<double>& v, int r) const {
    r = std::abs(r);
    if (r == 0) return 1.0;
    if (r > r_max_) return tail(r);
    return v[static_cast<std::size_t>(r)];
}

void CorrelatorRecursion::sweep() {
    const double a = alpha_, g = gamma_;
    const double keep2 = (1.0 - a) * (1.0 - a), cross = (1.0 - a) * a * g, both = 0.25 * a * a * g * g;
    // One layer: `upd` is the sublattice being updated, `fixed` the other one.
    auto layer = [&](std::vector<double>& upd, const std::vector<double>& fixed) {
        std::vector<double> new_upd = upd, new_m = m_;
        for (int r = 2; r <= r_max_; r += 2)
            new_upd[static_cast<std::size_t>(r)] =
                keep2 * at(upd, r) + cross * (at(m_, r - 1) + at(m_, r + 1)) +
                both * (2.0 * at(fixed, r) + at(fixed, r - 2) + at(fixed, r + 2));
        for (int r = 1; r <= r_max_; r += 2)
            new_m[static_cast<std::size_t>(r)] = (1.0 - a) * at(m_, r) + 0.5 * a * g * (at(fixed, r - 1) + at(fixed, r + 1));
        upd = std::move(new_upd);
        m_ = std::move(new_m);
    };
    layer(e_, o_);
    layer(o_, e_);
    ++steps_;
}

double CorrelatorRecursion::correlator(int r) const {
    r = std::abs(r);
    if (r == 0) return 1.0;
    if (r % 2 == 1) return at(m_, r);
    return 0.5 * (at(e_, r) + at(o_, r));
}

std::vector<std::vector<double>> correlator_recursion(double beta_i, double beta_f, double alpha, int steps,
                                                      int r_max, int r_out) {
    if (steps < 0 || r_out < 0) throw std::invalid_argument("correlator_recursion: negative size");
    if (r_out + 4 * steps > r_max)
        throw std::invalid_argument("correlator_recursion: r_max = " + std::to_string(r_max) +
                                    " too small; boundary reaches r < " + std::to_string(r_out) + " after " +
                                    std::to_string(steps) + " sweeps (need r_max >= " +
                                    std::to_string(r_out + 4 * steps) + ")");
    CorrelatorRecursion rec(beta_i, beta_f, alpha, r_max);
    std::vector<std::vector<double>> table;
    auto record = [&] {
        std::vector<double> row(static_cast<std::size_t>(r_out) + 1);
        for (int r = 0; r <= r_out; ++r) row[static_cast<std::size_t>(r)] = rec.correlator(r);
        table.push_back(std::move(row));
    };
    record();
    for (int s = 0; s < steps; ++s) {
        rec.sweep();
        record();
    }
    return table;
}

double thermal_mi(double beta, int b_size) {
    if (!(beta >= 0.0)) throw std::invalid_argument("thermal_mi: beta must be >= 0");
    if (b_size < 0) throw std::invalid_argument("thermal_mi: |B| must be >= 0");
    // correlation c between the two spins; I = log 2 - H2((1 + c) / 2)
    const double c = std::pow(std::tanh(beta), b_size + 1);
    if (c >= 1.0) return std::log(2.0);
    if (c < 1e-4) {
        double sum = 0.0, c2k = 1.0;
        for (int k = 1; k <= 4; ++k) {
            c2k *= c * c;
            sum += c2k / (2.0 * k * (2.0 * k - 1.0));
        }
        return sum;
    }
    return 0.5 * ((1.0 + c) * std::log1p(c) + (1.0 - c) * std::log1p(-c));
}

double thermal_mi_tail(double beta, int b_size) {
    return 0.5 * std::pow(std::tanh(beta), 2 * b_size);
}

MarkovScenario parse_markov_scenario(std::string_view name) {
    if (name == "depolarized-cat") return MarkovScenario::depolarized_cat;
    if (name == "ground-to-finite") return MarkovScenario::ground_to_finite;
    if (name == "thermal-late-time") return MarkovScenario::thermal_late_time;
    throw std::invalid_argument("unknown Markov-length scenario '" + std::string(name) + "'");
}

double markov_length_prediction(MarkovScenario scenario, const MarkovPredictionInputs& in) {
    switch (scenario) {
    case MarkovScenario::depolarized_cat:
        return xi_star(in.t);
    case MarkovScenario::ground_to_finite:
        if (!(in.magnetization > 0.0)) throw std::invalid_argument("markov_length_prediction: m must be > 0");
        return thermal_correlation_length(in.beta_f) / (in.magnetization * in.magnetization);
    case MarkovScenario::thermal_late_time:
        return 0.5 * thermal_correlation_length(in.beta_i);
    }
    throw std::invalid_argument("markov_length_prediction: unknown scenario");
}

} // namespace mlen
