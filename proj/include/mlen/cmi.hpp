#pragma once

#include "mlen/mps.hpp"
#include "mlen/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace mlen {

/// One perfectly sampled configuration of B with the conditioned transfer
/// product F = prod_k X^{s_k} / pi(s_k | s_1..s_{k-1}) over the B sites.
/// Dividing by each sampled weight keeps <V_L| T_A F |V_R> at one, so F needs
/// no separate rescaling even for very long blocks.
struct SampleRecord {
    std::vector<int> config;   // spins +-1
    double log_prob = 0.0;     // log pi_B(config)
    Matrix f;
    std::optional<Matrix> f_bar;  // product of flipped tensors, symmetrized mode only
    double mi = 0.0;           // I(A:C | B = config) in nats
    long origin = 0;           // site of A
};

/// Mean of per-sample mutual informations at one |B|.
struct CmiEstimate {
    double mean = 0.0;        // nats
    double std_error = 0.0;   // sample standard deviation / sqrt(Q)
    long samples = 0;
    int b_size = 0;
    int time_step = 0;
};

struct CmiOptions {
    /// Average each conditional marginal with its global spin flip, i.e.
    /// sample from the symmetrized state without doubling D.
    bool symmetrized = false;
    int a_size = 1;
    int c_size = 1;
    int jobs = 1;
};

/// Draws B (|B| sites starting at origin + 1, with single-site A at origin and
/// C right after B) from its exact marginal by the chain rule. Consumes exactly
/// one uniform deviate per B site.
SampleRecord sample_b_configuration(const UniformMps& mps, int b_size, Rng& rng,
                                    bool symmetrized = false, long origin = 0);

/// Conditional distribution of (A, C) given the sampled B, p[a * 2 + c].
std::array<double, 4> conditional_ac_marginal(const SampleRecord& record, const UniformMps& mps);

/// Per-sample mutual informations for every requested |B| along one sampled
/// path: prefixes of a sampled B of size max(b_sizes) are themselves exact
/// samples of the shorter blocks, so one path serves the whole curve.
/// result[k] corresponds to b_sizes[k].
std::vector<double> sample_cmi_path(const UniformMps& mps, const std::vector<int>& b_sizes, Rng& rng,
                                    const CmiOptions& options, long origin);

/// I(A:C|B) for each |B| in b_sizes from `samples` independent paths. Sample i
/// uses the stream make_stream(seed, i) and, for multi-site unit cells, a
/// random origin drawn from it, so the estimate is cell averaged. Results are
/// identical for any number of jobs.
std::vector<CmiEstimate> estimate_cmi_curve(const UniformMps& mps, const std::vector<int>& b_sizes,
                                            long samples, std::uint64_t seed, const CmiOptions& options = {});

CmiEstimate estimate_cmi(const UniformMps& mps, int b_size, long samples, std::uint64_t seed,
                         const CmiOptions& options = {});

/// Mean and standard error of a list of values.
CmiEstimate summarize(const std::vector<double>& values, int b_size);

/// Runs f(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(long count, int jobs, const std::function<void(long)>& f);

} // namespace mlen
