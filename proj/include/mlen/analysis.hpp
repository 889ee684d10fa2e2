#pragma once

#include "mlen/mps.hpp"

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace mlen {

/// One point of a CMI curve I(|B|).
struct CurvePoint {
    int b = 0;
    double value = 0.0;
    double std_error = 0.0;
};

enum class FitMethod { log_linear_tail, collapse_form };
FitMethod parse_fit_method(std::string_view name);
std::string_view to_string(FitMethod method);

struct FitOptions {
    FitMethod method = FitMethod::log_linear_tail;
    /// Needed by the collapse form, which fits log(I xi*^2 sqrt(6|B|/xi*) / 2).
    double xi_star = 0.0;
    double noise_sigmas = 3.0;
    int min_points = 5;
};

struct MarkovFit {
    double xi = 0.0;
    int b_min = 0;          // fit window
    int b_max = 0;
    int points = 0;
    double intercept = 0.0;
    double residual_rms = 0.0;   // in log space
    FitMethod method = FitMethod::log_linear_tail;
};

/// Exponential decay length of a CMI curve. Points whose value exceeds
/// noise_sigmas standard errors (and the 1e-28 rounding floor) form the signal; the fit uses the
/// largest-|B| half of them (but at least min_points) and weighted least
/// squares on the logarithm.
MarkovFit fit_markov_length(const std::vector<CurvePoint>& curve, const FitOptions& options = {});

struct HeatmapSlice {
    double t = 0.0;
    std::vector<CurvePoint> curve;   // ascending |B|
};

struct PeakPoint {
    double t = 0.0;
    double b_peak = 0.0;
    bool at_boundary = false;
};

struct PeakTrajectory {
    std::vector<PeakPoint> peaks;
    /// Least-squares slope of b_peak against t over interior peaks; 0 when
    /// fewer than two peaks are interior.
    double velocity = 0.0;
};

/// Location of the CMI maximum in every slice, refined by a parabola through
/// log I at the discrete maximum and its neighbours.
PeakTrajectory cmi_peak_trajectory(const std::vector<HeatmapSlice>& heatmap);

/// Rate gamma in C_r(t) ~ exp(-gamma t - r / xi_i) at distances beyond the
/// crossover: regression of mean_r (log C_r(t) + r / xi_i) over r in
/// [r_lo, r_hi] against t.
double fit_two_slope_rate(const std::vector<double>& times, const std::vector<std::vector<double>>& correlators,
                          double xi_i, int r_lo, int r_hi);

/// v* = gamma xi_i xi_f / (xi_i - xi_f).
double ballistic_velocity(double gamma_fit, double xi_i, double xi_f);

struct LyapunovOptions {
    int product_length = 2000;
    int replicas = 8;
    int reorthonormalize_every = 10;
    /// Sites at the start of each product whose growth is discarded.
    int burn_in = 200;
    std::uint64_t seed = 0;
    double max_spread = 0.2;
    int jobs = 1;
};

struct LyapunovResult {
    double eta0 = 0.0;
    double eta1 = 0.0;
    double gap = 0.0;          // eta0 - eta1
    double xi = 0.0;           // 1 / (2 gap), 0 when the products have rank one
    double spread = 0.0;       // replica standard deviation of the gap / gap
    bool rank_deficient = false;
    int product_length = 0;
    int replicas = 0;
};

/// Top two Lyapunov exponents of the conditioned transfer products along
/// sampled B configurations. Throws NumericalError when the replica spread of
/// the gap exceeds max_spread.
LyapunovResult lyapunov_spectrum(const UniformMps& mps, const LyapunovOptions& options = {});

struct CollapseCurve {
    double t = 0.0;
    std::vector<CurvePoint> curve;
};

struct CollapseRow {
    double t = 0.0;
    int b = 0;
    double x = 0.0;        // |B| / xi*(t)
    double y = 0.0;        // xi*(t)^2 I
    double master = 0.0;   // 2 e^{-x} / sqrt(6 x)
    bool valid = false;    // inside the asymptotic regime
};

/// Rescales depolarized-cat CMI curves with xi*(t) = 2 e^{2t}.
std::vector<CollapseRow> collapse_export(const std::vector<CollapseCurve>& curves);

} // namespace mlen
