#include "mlen/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

namespace mlen::linalg {

std::pair<Matrix, Matrix> qr_positive(const Matrix& m) {
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    const Eigen::Index k = std::min(rows, cols);
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, k);
    Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (r(i, i) < 0.0) {
            r.row(i) *= -1.0;
            q.col(i) *= -1.0;
        }
    }
    return {std::move(q), std::move(r)};
}

DominantEigenpair dominant_eigenpair(const LinearMap& op, const Vector& start,
                                     const ArnoldiOptions& options) {
    const Eigen::Index n = start.size();
    if (n == 0) throw std::invalid_argument("dominant_eigenpair: empty start vector");
    const int m_max = static_cast<int>(std::min<Eigen::Index>(options.krylov_dim, n));

    DominantEigenpair result;
    Vector x = start;
    double nx = x.norm();
    if (!(nx > 0.0) || !std::isfinite(nx)) {
        x = Vector::Ones(n);
        nx = x.norm();
    }
    x /= nx;

    Matrix basis(n, m_max + 1);
    Matrix hess = Matrix::Zero(m_max + 1, m_max);
    Vector w(n);

    // Ritz pair from the leading m x m Hessenberg block; true when converged.
    auto evaluate = [&](int m) {
        Eigen::EigenSolver<Matrix> es(hess.topLeftCorner(m, m));
        const auto& evals = es.eigenvalues();
        int best = 0;
        for (int i = 1; i < m; ++i) {
            if (std::abs(evals[i]) > std::abs(evals[best])) best = i;
        }
        double next = 0.0;
        for (int i = 0; i < m; ++i) {
            if (i != best) next = std::max(next, std::abs(evals[i]));
        }
        Eigen::VectorXcd y = es.eigenvectors().col(best);
        y /= y.norm();
        const double theta = evals[best].real();
        const double residual = std::abs(hess(m, m - 1) * y[m - 1]);
        const bool real_pair = std::abs(evals[best].imag()) <= 1e-10 * std::abs(theta) + 1e-300;
        if (!(real_pair && residual <= options.tolerance * std::max(std::abs(theta), 1e-300)) && m < m_max &&
            hess(m, m - 1) != 0.0)
            return false;

        Vector ritz = basis.leftCols(m) * y.real();
        // a purely imaginary eigenvector signals a complex leading pair
        if (ritz.norm() < 1e-8) ritz = basis.leftCols(m) * y.imag();
        const double nr = ritz.norm();
        if (!(nr > 0.0) || !std::isfinite(nr)) {
            throw NumericalError("linalg", "Arnoldi produced a degenerate Ritz vector");
        }
        x = ritz / nr;
        if (real_pair && residual <= options.tolerance * std::max(std::abs(theta), 1e-300)) {
            if (x.sum() < 0.0) x = -x;
            result.value = theta;
            result.next_modulus = next;
            return true;
        }
        return false;
    };

    while (result.matvecs < options.max_matvecs) {
        basis.col(0) = x;
        hess.setZero();
        for (int j = 0; j < m_max; ++j) {
            op(basis.col(j), w);
            ++result.matvecs;
            // classical Gram-Schmidt, repeated once for stability
            for (int pass = 0; pass < 2; ++pass) {
                Vector h = basis.leftCols(j + 1).transpose() * w;
                w.noalias() -= basis.leftCols(j + 1) * h;
                hess.block(0, j, j + 1, 1) += h;
            }
            const double beta = w.norm();
            const double scale = hess.block(0, 0, j + 1, j + 1).cwiseAbs().maxCoeff();
            const bool breakdown = beta <= 1e-14 * std::max(scale, 1e-300);
            hess(j + 1, j) = breakdown ? 0.0 : beta;
            if (!breakdown) basis.col(j + 1) = w / beta;
            const int m = j + 1;
            if (breakdown || m == m_max || m % 4 == 0) {
                if (evaluate(m)) {
                    result.vector = x;
                    return result;
                }
                if (breakdown || m == m_max) break;
            }
        }
    }
    if (options.best_effort) {
        result.vector = x.sum() < 0.0 ? Vector(-x) : x;
        result.converged = false;
        return result;
    }
    throw NumericalError("linalg", "Arnoldi did not converge within " +
                                       std::to_string(options.max_matvecs) + " products");
}

} // namespace mlen::linalg
