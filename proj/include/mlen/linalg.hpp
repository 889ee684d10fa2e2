#pragma once

#include "mlen/types.hpp"

#include <functional>
#include <utility>

namespace mlen::linalg {

/// Thin QR with the diagonal of R made non-negative, so the factorization is
/// unique for full-rank input.
std::pair<Matrix, Matrix> qr_positive(const Matrix& m);

/// y = A x for some real linear operator of fixed dimension.
using LinearMap = std::function<void(const Vector& x, Vector& y)>;

struct DominantEigenpair {
    double value = 0.0;
    Vector vector;
    /// Modulus of the next Ritz value; used to detect near-degenerate spectra.
    double next_modulus = 0.0;
    int matvecs = 0;
    bool converged = true;
};

struct ArnoldiOptions {
    int krylov_dim = 24;
    double tolerance = 1e-13;  // relative residual |Ax - tx| / |t|
    int max_matvecs = 20000;
    /// Return the last Ritz vector instead of throwing when the budget runs out.
    bool best_effort = false;
};

/// Leading (largest-modulus, real) eigenpair of `op` by explicitly restarted
/// Arnoldi. The returned vector has unit 2-norm.
DominantEigenpair dominant_eigenpair(const LinearMap& op, const Vector& start,
                                     const ArnoldiOptions& options = {});

/// Column-major flattening helpers for maps that act on square matrices.
inline Vector flatten(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}
inline Matrix unflatten(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

} // namespace mlen::linalg
