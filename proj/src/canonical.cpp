#include "mlen/canonical.hpp"

#include "mlen/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace mlen {

namespace {

Matrix stacked_product(const Matrix& l, const PhysTensor& a) {
    const Eigen::Index d = static_cast<Eigen::Index>(a.size());
    const Eigen::Index dim = l.rows();
    Matrix out(d * dim, a[0].cols());
    for (Eigen::Index s = 0; s < d; ++s) out.middleRows(s * dim, dim).noalias() = l * a[static_cast<std::size_t>(s)];
    return out;
}

PhysTensor unstack(const Matrix& q, std::size_t d) {
    const Eigen::Index dim = q.rows() / static_cast<Eigen::Index>(d);
    PhysTensor out(d);
    for (std::size_t s = 0; s < d; ++s) out[s] = q.middleRows(static_cast<Eigen::Index>(s) * dim, dim);
    return out;
}

void check_square(const PhysTensor& a) {
    if (a.empty()) throw std::invalid_argument("canonicalize: empty tensor");
    for (const auto& m : a) {
        if (m.rows() != a[0].rows() || m.cols() != a[0].cols() || m.rows() != m.cols())
            throw std::invalid_argument("canonicalize: tensor must be uniform with square slices");
        if (!m.allFinite()) throw NumericalError("glauber-evolution", "non-finite tensor entry");
    }
}

constexpr double kStallTolerance = 1e-6;

} // namespace

LeftGauge left_orthonormalize(const PhysTensor& a, const CanonicalOptions& options) {
    check_square(a);
    const Eigen::Index dim = a[0].rows();
    const auto d = static_cast<Eigen::Index>(a.size());
    LeftGauge out;
    Matrix l = Matrix::Identity(dim, dim) / std::sqrt(static_cast<double>(dim));

    auto qr_step = [&] {
        auto [q, r] = linalg::qr_positive(stacked_product(l, a));
        out.tensor = unstack(q, a.size());
        out.lambda = r.norm();
        if (!(out.lambda > 0.0)) throw NumericalError("glauber-evolution", "tensor has vanishing norm");
        l = r / out.lambda;
    };

    Matrix l_old = l;
    qr_step();
    double delta = (l - l_old).norm();
    out.iterations = 1;
    double best = delta;
    int stalled = 0;
    while (delta > options.tolerance) {
        if (out.iterations >= options.max_iterations)
            throw NumericalError("glauber-evolution",
                                 "canonical form did not converge after " +
                                     std::to_string(options.max_iterations) + " QR iterations (delta " +
                                     std::to_string(delta) + ")");
        // Jump to the fixed point of X -> sum_s A_L^sT X A^s; the plain QR
        // iteration converges only as fast as the norm-transfer gap.
        const Matrix q_stacked = stacked_product(Matrix::Identity(dim, dim), out.tensor);
        Matrix xa(d * dim, dim);
        linalg::LinearMap op = [&](const Vector& x, Vector& y) {
            const Matrix xm = linalg::unflatten(x, dim, dim);
            for (Eigen::Index s = 0; s < d; ++s)
                xa.middleRows(s * dim, dim).noalias() = xm * a[static_cast<std::size_t>(s)];
            y = linalg::flatten(q_stacked.transpose() * xa);
        };
        linalg::ArnoldiOptions arnoldi;
        arnoldi.tolerance = std::max(delta / 10.0, 1e-13);
        arnoldi.max_matvecs = 3 * arnoldi.krylov_dim;
        arnoldi.best_effort = true;
        try {
            const auto eig = linalg::dominant_eigenpair(op, linalg::flatten(l), arnoldi);
            Matrix r = linalg::qr_positive(linalg::unflatten(eig.vector, dim, dim)).second;
            const double nr = r.norm();
            if (nr > 0.0 && r.allFinite()) l = r / nr;
        } catch (const NumericalError&) {
            // fall back to plain QR iteration for this round
        }
        l_old = l;
        qr_step();
        delta = (l - l_old).norm();
        ++out.iterations;
        if (delta < best) {
            if (delta < 0.5 * best) stalled = 0;
            best = delta;
        }
        // A rank-deficient fixed point leaves its null directions jittering at
        // rounding level; accept once the gauge has stopped improving.
        if (delta <= kStallTolerance && ++stalled >= 8) break;
    }
    out.gauge = std::move(l);
    return out;
}

CanonicalForm canonicalize(const PhysTensor& a, const CanonicalOptions& options) {
    check_square(a);
    const LeftGauge left = left_orthonormalize(a, options);
    PhysTensor transposed(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) transposed[s] = a[s].transpose();
    const LeftGauge right = left_orthonormalize(transposed, options);

    const Matrix c = left.gauge * right.gauge.transpose();
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix& u = svd.matrixU();
    const Matrix& v = svd.matrixV();

    CanonicalForm out;
    out.left.resize(a.size());
    out.right.resize(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        out.left[s] = u.transpose() * left.tensor[s] * u;
        out.right[s] = v.transpose() * right.tensor[s].transpose() * v;
    }
    out.singular_values = svd.singularValues();
    const double norm = out.singular_values.norm();
    if (!(norm > 0.0)) throw NumericalError("glauber-evolution", "vanishing bond matrix");
    out.singular_values /= norm;
    out.lambda = left.lambda;
    out.iterations = left.iterations + right.iterations;
    return out;
}

} // namespace mlen
