#pragma once

#include "mlen/canonical.hpp"
#include "mlen/glauber.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

namespace mlen {

/// Schmidt values below this (relative to unit norm) are treated as exact
/// zeros even when the cutoff is 0; they arise from redundant MPO directions.
inline constexpr double kSchmidtFloor = 1e-13;

struct TruncationPolicy {
    Eigen::Index d_max = 18;
    double cutoff = 1e-9;
};

struct StepResult {
    UniformMps state;
    /// Sum of squared discarded Schmidt values over both bonds of the cell.
    double truncation_error = 0.0;
    /// Deviation of the renormalization factor from 1.
    double norm_drift = 0.0;
};

/// One sweep: block the two-site cell, apply the MPO, bring it to canonical
/// form, truncate, split the cell by SVD and renormalize. The input must not
/// carry the z2 flag; evolve the polarized trajectory and symmetrize at
/// measurement time instead.
StepResult tebd_step(const UniformMps& mps, const CellMpo& mpo, const TruncationPolicy& policy,
                     const CanonicalOptions& canonical = {});

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

struct QuenchConfig {
    double beta_i = kInfiniteBeta;  // infinity selects the polarized ground state
    double beta_f = 1.0;
    double alpha = 0.5;
    int steps = 0;
    Eigen::Index d_max = 18;
    double cutoff = 1e-9;
    std::uint64_t seed = 0;
};

/// Thermal state, or the polarized state for beta = infinity.
UniformMps initial_state(double beta_i);

struct QuenchStep {
    int step = 0;          // sweeps applied so far
    double time = 0.0;     // alpha * step
    const UniformMps& state;
    double truncation_error = 0.0;   // accumulated
    double max_norm_drift = 0.0;
};

/// Runs the quench and hands every state (including step 0) to `observe`.
void run_quench(const QuenchConfig& config, const std::function<void(const QuenchStep&)>& observe);

} // namespace mlen
