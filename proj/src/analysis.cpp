#include "mlen/analysis.hpp"

#include "mlen/cmi.hpp"
#include "mlen/linalg.hpp"
#include "mlen/oracles.hpp"
#include "mlen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mlen {

FitMethod parse_fit_method(std::string_view name) {
    if (name == "tail" || name == "log-linear-tail") return FitMethod::log_linear_tail;
    if (name == "collapse" || name == "collapse-form") return FitMethod::collapse_form;
    throw std::invalid_argument("unknown fit method '" + std::string(name) + "'");
}

std::string_view to_string(FitMethod method) {
    return method == FitMethod::log_linear_tail ? "log-linear-tail" : "collapse-form";
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw NumericalError("analysis", "degenerate regression abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / static_cast<double>(x.size()));
    return f;
}

} // namespace

// Per-sample mutual informations come from determinants of order epsilon at
// best, so values below a few thousand epsilon^2 are rounding, not signal.
constexpr double kMiResolution = 1e-28;

MarkovFit fit_markov_length(const std::vector<CurvePoint>& curve, const FitOptions& options) {
    if (options.method == FitMethod::collapse_form && !(options.xi_star > 0.0))
        throw std::invalid_argument("fit_markov_length: collapse form needs xi* > 0");
    std::vector<CurvePoint> signal;
    for (const auto& p : curve)
        if (p.value > kMiResolution && p.value > options.noise_sigmas * p.std_error && p.b > 0) signal.push_back(p);
    std::sort(signal.begin(), signal.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.b < b.b; });
    const int n = static_cast<int>(signal.size());
    if (n < options.min_points)
        throw NumericalError("analysis", "insufficient signal: " + std::to_string(n) + " points above " +
                                             std::to_string(options.noise_sigmas) + " standard errors, need " +
                                             std::to_string(options.min_points));
    const int window = std::max((n + 1) / 2, std::min(n, options.min_points));
    std::vector<double> x, y, w;
    for (int i = n - window; i < n; ++i) {
        const auto& p = signal[static_cast<std::size_t>(i)];
        double v = std::log(p.value);
        if (options.method == FitMethod::collapse_form) {
            const double xs = options.xi_star;
            v += std::log(0.5 * xs * xs * std::sqrt(6.0 * p.b / xs));
        }
        const double rel = std::max(p.std_error / p.value, 1e-12);
        x.push_back(p.b);
        y.push_back(v);
        w.push_back(p.std_error > 0.0 ? 1.0 / (rel * rel) : 1.0);
    }
    // mixing exact and noisy points: give exact ones the largest weight present
    const double w_max = *std::max_element(w.begin(), w.end());
    for (std::size_t i = 0; i < w.size(); ++i)
        if (signal[static_cast<std::size_t>(n - window) + i].std_error <= 0.0) w[i] = std::max(w_max, 1.0);
    const LineFit line = weighted_line(x, y, w);
    if (!(line.slope < 0.0)) throw NumericalError("analysis", "CMI does not decay over the fit window");
    MarkovFit fit;
    fit.xi = -1.0 / line.slope;
    fit.b_min = signal[static_cast<std::size_t>(n - window)].b;
    fit.b_max = signal.back().b;
    fit.points = window;
    fit.intercept = line.intercept;
    fit.residual_rms = line.residual_rms;
    fit.method = options.method;
    return fit;
}

PeakTrajectory cmi_peak_trajectory(const std::vector<HeatmapSlice>& heatmap) {
    PeakTrajectory out;
    std::vector<double> ts, bs, ws;
    for (const auto& slice : heatmap) {
        const auto& c = slice.curve;
        if (c.size() < 3) throw std::invalid_argument("cmi_peak_trajectory: each slice needs >= 3 points");
        std::size_t k = 0;
        for (std::size_t i = 1; i < c.size(); ++i)
            if (c[i].value > c[k].value) k = i;
        PeakPoint p{slice.t, static_cast<double>(c[k].b), k == 0 || k + 1 == c.size()};
        if (!p.at_boundary) {
            const bool logs = c[k - 1].value > 0.0 && c[k + 1].value > 0.0;
            auto f = [&](std::size_t i) { return logs ? std::log(c[i].value) : c[i].value; };
            const double x0 = c[k - 1].b, x1 = c[k].b, x2 = c[k + 1].b;
            const double y0 = f(k - 1), y1 = f(k), y2 = f(k + 1);
            // vertex of the parabola through three points
            const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
            const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
            if (den != 0.0) {
                const double v = x1 - 0.5 * num / den;
                if (v >= x0 && v <= x2) p.b_peak = v;
            }
            ts.push_back(p.t);
            bs.push_back(p.b_peak);
            ws.push_back(1.0);
        }
        out.peaks.push_back(p);
    }
    if (ts.size() >= 2) {
        const bool distinct = std::any_of(ts.begin(), ts.end(), [&](double t) { return t != ts.front(); });
        if (distinct) out.velocity = weighted_line(ts, bs, ws).slope;
    }
    return out;
}

double fit_two_slope_rate(const std::vector<double>& times, const std::vector<std::vector<double>>& correlators,
                          double xi_i, int r_lo, int r_hi) {
    if (times.size() != correlators.size() || times.size() < 2)
        throw std::invalid_argument("fit_two_slope_rate: need matching times and correlator rows (>= 2)");
    if (r_lo < 0 || r_hi < r_lo) throw std::invalid_argument("fit_two_slope_rate: bad distance window");
    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& c = correlators[i];
        if (static_cast<int>(c.size()) <= r_hi) throw std::invalid_argument("fit_two_slope_rate: row too short");
        double sum = 0.0;
        for (int r = r_lo; r <= r_hi; ++r) {
            if (!(c[static_cast<std::size_t>(r)] > 0.0))
                throw NumericalError("analysis", "non-positive correlator in the two-slope window");
            sum += std::log(c[static_cast<std::size_t>(r)]) + r / xi_i;
        }
        x.push_back(times[i]);
        y.push_back(sum / (r_hi - r_lo + 1));
        w.push_back(1.0);
    }
    return -weighted_line(x, y, w).slope;
}

double ballistic_velocity(double gamma_fit, double xi_i, double xi_f) {
    if (!(xi_i > xi_f)) throw std::invalid_argument("ballistic_velocity: requires xi_i > xi_f");
    return gamma_fit * xi_i * xi_f / (xi_i - xi_f);
}

namespace {

struct ReplicaGrowth {
    double eta0 = 0.0;
    double eta1 = 0.0;
    bool rank_deficient = false;
};

ReplicaGrowth lyapunov_replica(const UniformMps& mps, const LyapunovOptions& o, long replica) {
    Rng rng = make_stream(o.seed, static_cast<std::uint64_t>(replica));
    const long cell = static_cast<long>(mps.cell_size());
    const long origin = cell > 1 ? static_cast<long>(rng() % static_cast<std::uint64_t>(cell)) : 0;
    RowVector u = mps.left_env(origin);
    // transposed product F^T applied to two vectors: singular values of F
    Matrix m(mps.bond_dim(origin), 2);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng) - 0.5;
    m = linalg::qr_positive(m).first;

    ReplicaGrowth g;
    double log0 = 0.0, log1 = 0.0;
    int counted = 0;
    auto flush = [&](bool record, int sites) {
        auto [q, r] = linalg::qr_positive(m);
        if (!(r(1, 1) > 1e-14 * r(0, 0))) {
            g.rank_deficient = true;
            return;
        }
        if (record) {
            log0 += std::log(r(0, 0));
            log1 += std::log(r(1, 1));
            counted += sites;
        }
        m = std::move(q);
    };

    int pending = 0;
    for (int k = 0; k < o.burn_in + o.product_length; ++k) {
        const long site = origin + k;
        const SiteTensor& x = mps.site(site);
        const Vector& r = mps.right_env(site);
        const double w0 = u * x[0] * r;
        const double w1 = u * x[1] * r;
        const double total = w0 + w1;
        if (!(total > 0.0)) throw NumericalError("analysis", "conditional probabilities do not normalize");
        const double c0 = std::clamp(w0 / total, 0.0, 1.0);
        const int s = uniform01(rng) < c0 ? 0 : 1;
        const double ws = s == 0 ? w0 : w1;
        if (!(ws > 0.0)) throw NumericalError("analysis", "sampled an outcome of zero probability");
        u = u * x[s] / ws;
        m = x[s].transpose() * m;
        ++pending;
        const bool boundary = k + 1 == o.burn_in || k + 1 == o.burn_in + o.product_length;
        if (pending == o.reorthonormalize_every || boundary) {
            flush(k >= o.burn_in, pending);
            pending = 0;
            if (g.rank_deficient) return g;
        }
    }
    g.eta0 = log0 / counted;
    g.eta1 = log1 / counted;
    return g;
}

} // namespace

LyapunovResult lyapunov_spectrum(const UniformMps& mps, const LyapunovOptions& o) {
    if (o.product_length < 1 || o.replicas < 1 || o.reorthonormalize_every < 1 || o.burn_in < 0)
        throw std::invalid_argument("lyapunov_spectrum: lengths and counts must be positive");
    if (mps.z2_symmetric())
        throw std::invalid_argument("lyapunov_spectrum: z2-symmetric states have a degenerate leading pair");
    LyapunovResult out;
    out.product_length = o.product_length;
    out.replicas = o.replicas;
    if (mps.max_bond_dim() < 2) {
        out.rank_deficient = true;
        out.gap = std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<ReplicaGrowth> reps(static_cast<std::size_t>(o.replicas));
    parallel_for(o.replicas, o.jobs, [&](long i) { reps[static_cast<std::size_t>(i)] = lyapunov_replica(mps, o, i); });
    for (const auto& r : reps)
        if (r.rank_deficient) {
            out.rank_deficient = true;
            out.gap = std::numeric_limits<double>::infinity();
            return out;
        }
    std::vector<double> gaps;
    for (const auto& r : reps) {
        out.eta0 += r.eta0 / o.replicas;
        out.eta1 += r.eta1 / o.replicas;
        gaps.push_back(r.eta0 - r.eta1);
    }
    out.gap = out.eta0 - out.eta1;
    if (o.replicas > 1) {
        double ss = 0.0;
        for (double g : gaps) ss += (g - out.gap) * (g - out.gap);
        out.spread = std::sqrt(ss / (o.replicas - 1)) / std::abs(out.gap);
    }
    if (!(out.gap > 0.0)) throw NumericalError("analysis", "Lyapunov gap is not positive");
    if (out.spread > o.max_spread)
        throw NumericalError("analysis", "Lyapunov gap not converged across replicas (spread " +
                                             std::to_string(out.spread) + " of the gap)");
    out.xi = 1.0 / (2.0 * out.gap);
    return out;
}

std::vector<CollapseRow> collapse_export(const std::vector<CollapseCurve>& curves) {
    std::vector<CollapseRow> rows;
    for (const auto& c : curves) {
        const double xs = xi_star(c.t);
        const double p = DepolCatParams::from_time(c.t).p;
        for (const auto& pt : c.curve) {
            CollapseRow r;
            r.t = c.t;
            r.b = pt.b;
            r.x = pt.b / xs;
            r.y = xs * xs * pt.value;
            r.master = collapse_master_curve(r.x);
            r.valid = asymptotic_cmi(p, pt.b).valid;
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace mlen
