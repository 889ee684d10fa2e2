#pragma once

#include "mlen/mps.hpp"

#include <array>
#include <cmath>

namespace mlen {

/// Heat-bath weight for spin sigma' -> sigma given neighbours tau, tau' (all +-1):
/// (1-alpha) delta + alpha e^{beta sigma (tau+tau')} / sum_s e^{beta s (tau+tau')}.
double glauber_weight(int sigma, int sigma_prime, int tau, int tau_prime, double beta, double alpha);

/// Copy tensor: 1 when all three indices agree.
constexpr double copy_tensor(int a, int b, int c) { return (a == b && b == c) ? 1.0 : 0.0; }

/// Single-spin update tensor W^{sigma sigma'}_{tau tau'} for one inverse temperature and step.
class GlauberChannel {
public:
    GlauberChannel(double beta, double alpha);

    double beta() const { return beta_; }
    double alpha() const { return alpha_; }
    double gamma() const { return std::tanh(2.0 * beta_); }

    /// Weight by spin index (0 = up, 1 = down).
    double w(int s_new, int s_old, int t_left, int t_right) const {
        return table_[static_cast<std::size_t>(((s_new * 2 + s_old) * 2 + t_left) * 2 + t_right)];
    }
    /// Weight by spin value (+-1).
    double weight(int sigma, int sigma_prime, int tau, int tau_prime) const {
        return w(spin_index(sigma), spin_index(sigma_prime), spin_index(tau), spin_index(tau_prime));
    }

private:
    double beta_;
    double alpha_;
    std::array<double, 16> table_{};
};

enum class SweepLayers { even, odd, both };

/// MPO for one sweep on a two-site cell (even site first), bond dimension 4.
/// block(n0, n1, o0, o1) maps old spins (o0, o1) to new spins (n0, n1); its
/// rows/columns are the left/right MPO bonds. The left bond carries the old odd
/// spin of the previous cell and the new even spin of this cell.
class CellMpo {
public:
    static constexpr Eigen::Index kBond = 4;

    CellMpo(const GlauberChannel& channel, SweepLayers layers = SweepLayers::both);

    const Matrix& block(int n0, int n1, int o0, int o1) const {
        return blocks_[static_cast<std::size_t>(((n0 * 2 + n1) * 2 + o0) * 2 + o1)];
    }
    const GlauberChannel& channel() const { return channel_; }
    SweepLayers layers() const { return layers_; }

private:
    GlauberChannel channel_;
    SweepLayers layers_;
    std::array<Matrix, 16> blocks_;
};

/// Two-site cell tensor with a 4-valued physical index p0*2 + p1.
PhysTensor block_cell(const UniformMps& mps);

/// Contracts the MPO into a blocked cell tensor; bond dimension grows by 4.
PhysTensor apply_cell_mpo(const PhysTensor& blocked, const CellMpo& mpo);

/// Splits a blocked cell exactly (no truncation) into a two-site cell whose
/// internal bond is twice the outer one.
UniformMps unblock_exact(const PhysTensor& blocked);

/// Exact application of one sweep; the bond dimension grows without bound,
/// so this serves as a reference for short evolutions.
UniformMps apply_mpo_exact(const UniformMps& mps, const CellMpo& mpo);

/// Binary symmetric channel with flip probability p on every site.
UniformMps apply_depolarizing(const UniformMps& mps, double p);

} // namespace mlen
