#pragma once

#include "mlen/types.hpp"

#include <cstddef>
#include <vector>

namespace mlen {

/// Largest block handled by exhaustive marginals (2^k outcomes).
inline constexpr int kMaxMarginalSites = 16;

/// Negative probabilities down to -1e-9 are treated as truncation noise.
inline constexpr double kNegativeProbabilityTolerance = 1e-9;

/// Clamps small negative entries to zero and renormalizes; throws
/// NumericalError(module, ...) for entries below the tolerance.
void clamp_probabilities(std::vector<double>& p, const char* module);

/// Leading eigendata of the unit-cell transfer matrix T = prod_j (X_j^+ + X_j^-).
struct TransferSpectrum {
    double lambda0 = 1.0;
    RowVector left;   // <V_L|
    Vector right;     // |V_R>, normalized so that <V_L|V_R> = 1
    bool degenerate = false;
    double gap_ratio = 0.0;  // |lambda_1| / |lambda_0|
};

struct SpectrumOptions {
    Eigen::Index dense_limit = 64;     // dense eigensolver up to this bond dimension
    double degeneracy_tolerance = 1e-10;
};

/// Spectrum of the cell transfer matrix. For z2-symmetric cells (every site
/// tensor is diag(Y^s, Y^{-s}) with equal halves) the leading vectors are the
/// half-block ones repeated in both sectors with equal weight. For other
/// degenerate spectra the vectors are the spectral projection of the all-ones
/// vector onto the leading eigenspace.
TransferSpectrum transfer_spectrum(const std::vector<SiteTensor>& cell, bool z2_symmetric,
                                   const SpectrumOptions& options = {});

/// Translationally invariant (up to a short unit cell) MPS for a classical
/// distribution over +-1 spins. Immutable once built; the constructor rescales
/// the tensors so the leading transfer eigenvalue is exactly 1.
class UniformMps {
public:
    explicit UniformMps(std::vector<SiteTensor> cell, bool z2_symmetric = false,
                        const SpectrumOptions& options = {});

    std::size_t cell_size() const { return cell_.size(); }
    const std::vector<SiteTensor>& cell() const { return cell_; }
    const SiteTensor& site(long i) const { return cell_[wrap(i)]; }
    const Matrix& site_transfer(long i) const { return transfers_[wrap(i)]; }

    /// Dimension of the bond to the left of site i.
    Eigen::Index bond_dim(long i) const { return site(i)[0].rows(); }
    Eigen::Index max_bond_dim() const;

    bool z2_symmetric() const { return z2_; }
    const TransferSpectrum& spectrum() const { return spectrum_; }

    /// Environment left of `site`, i.e. <V_L| times the transfer matrices of
    /// the cell sites preceding it.
    const RowVector& left_env(long site) const { return left_envs_[wrap(site)]; }
    /// Environment right of `site`.
    const Vector& right_env(long site) const { return right_envs_[wrap(site)]; }

private:
    std::size_t wrap(long i) const {
        const long n = static_cast<long>(cell_.size());
        return static_cast<std::size_t>(((i % n) + n) % n);
    }

    std::vector<SiteTensor> cell_;
    std::vector<Matrix> transfers_;
    bool z2_ = false;
    TransferSpectrum spectrum_;
    std::vector<RowVector> left_envs_;
    std::vector<Vector> right_envs_;
};

/// Contiguous A-B-C layout used for conditional mutual information.
struct Tripartition {
    int a_size = 1;
    int b_size = 1;
    int c_size = 1;

    void validate() const {
        if (a_size < 1 || b_size < 1 || c_size < 1)
            throw std::invalid_argument("Tripartition: all region sizes must be >= 1");
    }
    int total() const { return a_size + b_size + c_size; }
};

// Constructors --------------------------------------------------------------

/// Ising Gibbs state at inverse temperature beta, bond dimension 2.
UniformMps thermal_mps(double beta);
/// Equal mixture of the two polarized states after independent spin flips with
/// probability p; bond dimension 2, z2 flag set, T = identity.
UniformMps depolarized_cat_mps(double p);
/// All spins up, D = 1.
UniformMps polarized_mps();
/// Independent spins with P(+1) = p_up, D = 1.
UniformMps product_mps(double p_up);
/// Doubles the bond dimension into diag(X^s, X^{-s}) so the state is invariant
/// under a global spin flip.
UniformMps symmetrize(const UniformMps& mps);

inline TransferSpectrum transfer_spectrum(const UniformMps& mps) {
    return transfer_spectrum(mps.cell(), mps.z2_symmetric());
}

// Queries -------------------------------------------------------------------

/// Joint distribution of k contiguous spins starting at `origin`. Outcome index
/// bit (k-1-i) holds site origin+i, bit value 1 meaning spin -1. Small negative
/// entries (>= -1e-9) from truncation are clamped to zero and the table is
/// renormalized; anything more negative is a NumericalError.
std::vector<double> marginal(const UniformMps& mps, int k, long origin = 0);

/// <sigma_site>.
double magnetization(const UniformMps& mps, long site = 0);
/// Magnetization averaged over the unit cell.
double mean_magnetization(const UniformMps& mps);

/// <sigma_origin sigma_{origin+r}>.
double spin_correlator_from(const UniformMps& mps, long origin, int r);
/// Correlator averaged over origins within the unit cell.
double spin_correlator(const UniformMps& mps, int r);
/// spin_correlator(mps, r) for r = 0..r_max in one pass per origin.
std::vector<double> spin_correlators(const UniformMps& mps, int r_max);

} // namespace mlen
