#include "mlen/mps.hpp"

#include "mlen/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>

namespace mlen {

namespace {

Matrix site_sum(const SiteTensor& x) { return x[0] + x[1]; }

Matrix cell_transfer(const std::vector<SiteTensor>& cell) {
    Matrix t = site_sum(cell.front());
    for (std::size_t j = 1; j < cell.size(); ++j) t = t * site_sum(cell[j]);
    return t;
}

// Fixes the gauge of a leading pair: unit-norm right vector with positive sum,
// left vector scaled to unit overlap.
void normalize_pair(TransferSpectrum& s) {
    double nr = s.right.norm();
    if (!(nr > 0.0)) throw NumericalError("mps-core", "leading right eigenvector vanishes");
    s.right /= nr;
    if (s.right.sum() < 0.0) s.right = -s.right;
    const double overlap = s.left.dot(s.right);
    if (!(std::abs(overlap) > 1e-300) || !std::isfinite(overlap))
        throw NumericalError("mps-core", "leading left and right eigenvectors are orthogonal");
    s.left /= overlap;
}

std::vector<int> sorted_by_distance(const Eigen::VectorXcd& evals, std::complex<double> target) {
    std::vector<int> idx(static_cast<std::size_t>(evals.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(evals[a] - target) < std::abs(evals[b] - target);
    });
    return idx;
}

TransferSpectrum dense_spectrum(const Matrix& t, double tol) {
    Eigen::EigenSolver<Matrix> rs(t);
    Eigen::EigenSolver<Matrix> ls(t.transpose());
    if (rs.info() != Eigen::Success || ls.info() != Eigen::Success)
        throw NumericalError("mps-core", "dense eigensolver failed on the transfer matrix");
    const Eigen::VectorXcd& ev = rs.eigenvalues();
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i)
        if (std::abs(ev[i]) > std::abs(ev[lead])) lead = i;
    const std::complex<double> lambda = ev[lead];
    if (std::abs(lambda.imag()) > 1e-10 * std::abs(lambda))
        throw NumericalError("mps-core", "leading transfer eigenvalue is not real");

    TransferSpectrum out;
    out.lambda0 = lambda.real();
    std::vector<int> cluster;
    double next = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i] - lambda) <= tol * std::abs(lambda))
            cluster.push_back(static_cast<int>(i));
        else
            next = std::max(next, std::abs(ev[i]));
    }
    out.gap_ratio = std::abs(lambda) > 0.0 ? next / std::abs(lambda) : 0.0;
    const auto m = static_cast<Eigen::Index>(cluster.size());
    const std::vector<int> left_order = sorted_by_distance(ls.eigenvalues(), lambda);

    if (m == 1) {
        out.right = rs.eigenvectors().col(lead).real();
        out.left = ls.eigenvectors().col(left_order.front()).real().transpose();
        normalize_pair(out);
        return out;
    }

    // Degenerate leading eigenvalue: project the all-ones vector onto the
    // leading eigenspace with the spectral projector R (L^T R)^{-1} L^T.
    out.degenerate = true;
    const Eigen::Index d = t.rows();
    Eigen::MatrixXcd r(d, m), l(d, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        r.col(k) = rs.eigenvectors().col(cluster[static_cast<std::size_t>(k)]);
        l.col(k) = ls.eigenvectors().col(left_order[static_cast<std::size_t>(k)]);
    }
    Eigen::MatrixXcd overlap = l.transpose() * r;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(overlap);
    if (!lu.isInvertible())
        throw NumericalError("mps-core", "defective degenerate transfer spectrum");
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(d);
    out.right = (r * lu.solve(l.transpose() * ones)).real();
    out.left = (ones.transpose() * r * lu.solve(l.transpose())).real();
    if (!(out.left.dot(out.right) > 0.0))
        throw NumericalError("mps-core", "equal-weight projection of degenerate spectrum vanishes");
    normalize_pair(out);
    return out;
}

TransferSpectrum iterative_spectrum(const Matrix& t, double tol) {
    const Eigen::Index d = t.rows();
    linalg::LinearMap right_op = [&](const Vector& x, Vector& y) { y.noalias() = t * x; };
    linalg::LinearMap left_op = [&](const Vector& x, Vector& y) { y.noalias() = t.transpose() * x; };
    auto r = linalg::dominant_eigenpair(right_op, Vector::Ones(d));
    if (r.next_modulus >= (1.0 - tol) * std::abs(r.value)) return dense_spectrum(t, tol);
    auto l = linalg::dominant_eigenpair(left_op, Vector::Ones(d));
    TransferSpectrum out;
    out.lambda0 = r.value;
    out.gap_ratio = r.next_modulus / std::abs(r.value);
    out.right = std::move(r.vector);
    out.left = l.vector.transpose();
    normalize_pair(out);
    return out;
}

bool is_z2_block(const std::vector<SiteTensor>& cell) {
    for (const auto& x : cell) {
        const Eigen::Index rows = x[0].rows(), cols = x[0].cols();
        if (rows % 2 != 0 || cols % 2 != 0) return false;
        const Eigen::Index hr = rows / 2, hc = cols / 2;
        const double scale = std::max(x[0].cwiseAbs().maxCoeff(), x[1].cwiseAbs().maxCoeff());
        const double tol = 1e-12 * std::max(scale, 1e-300);
        for (int s = 0; s < 2; ++s) {
            if (x[s].topRightCorner(hr, hc).cwiseAbs().maxCoeff() > tol) return false;
            if (x[s].bottomLeftCorner(hr, hc).cwiseAbs().maxCoeff() > tol) return false;
            const Matrix diff = x[s].bottomRightCorner(hr, hc) - x[flipped(s)].topLeftCorner(hr, hc);
            if (diff.cwiseAbs().maxCoeff() > tol) return false;
        }
    }
    return true;
}

void check_cell(const std::vector<SiteTensor>& cell) {
    if (cell.empty()) throw std::invalid_argument("UniformMps: empty unit cell");
    for (std::size_t j = 0; j < cell.size(); ++j) {
        const auto& x = cell[j];
        const auto& next = cell[(j + 1) % cell.size()];
        if (x[0].rows() != x[1].rows() || x[0].cols() != x[1].cols())
            throw std::invalid_argument("UniformMps: X^+ and X^- differ in shape");
        if (x[0].size() == 0) throw std::invalid_argument("UniformMps: empty site tensor");
        if (x[0].cols() != next[0].rows())
            throw std::invalid_argument("UniformMps: bond dimensions do not chain around the cell");
        if (!x[0].allFinite() || !x[1].allFinite())
            throw std::invalid_argument("UniformMps: non-finite tensor entry");
    }
}

} // namespace

TransferSpectrum transfer_spectrum(const std::vector<SiteTensor>& cell, bool z2_symmetric,
                                   const SpectrumOptions& options) {
    check_cell(cell);
    if (z2_symmetric) {
        if (!is_z2_block(cell))
            throw std::invalid_argument("transfer_spectrum: z2 flag set on a tensor without diag(Y^s, Y^-s) structure");
        std::vector<SiteTensor> half;
        half.reserve(cell.size());
        for (const auto& x : cell) {
            const Eigen::Index hr = x[0].rows() / 2, hc = x[0].cols() / 2;
            half.push_back({x[0].topLeftCorner(hr, hc), x[1].topLeftCorner(hr, hc)});
        }
        TransferSpectrum h = transfer_spectrum(half, false, options);
        TransferSpectrum out;
        out.lambda0 = h.lambda0;
        out.degenerate = true;
        out.gap_ratio = h.gap_ratio;
        const double s = 1.0 / std::sqrt(2.0);
        out.right.resize(2 * h.right.size());
        out.right << s * h.right, s * h.right;
        out.left.resize(2 * h.left.size());
        out.left << s * h.left, s * h.left;
        return out;
    }
    const Matrix t = cell_transfer(cell);
    if (t.rows() <= options.dense_limit) return dense_spectrum(t, options.degeneracy_tolerance);
    return iterative_spectrum(t, options.degeneracy_tolerance);
}

UniformMps::UniformMps(std::vector<SiteTensor> cell, bool z2_symmetric, const SpectrumOptions& options)
    : cell_(std::move(cell)), z2_(z2_symmetric) {
    spectrum_ = transfer_spectrum(cell_, z2_, options);
    if (!(spectrum_.lambda0 > 0.0) || !std::isfinite(spectrum_.lambda0))
        throw NumericalError("mps-core", "leading transfer eigenvalue is not positive");
    const double scale = std::pow(spectrum_.lambda0, -1.0 / static_cast<double>(cell_.size()));
    for (auto& x : cell_) {
        x[0] *= scale;
        x[1] *= scale;
    }
    spectrum_.lambda0 = 1.0;

    const std::size_t n = cell_.size();
    transfers_.resize(n);
    for (std::size_t j = 0; j < n; ++j) transfers_[j] = site_sum(cell_[j]);
    left_envs_.resize(n);
    right_envs_.resize(n);
    left_envs_[0] = spectrum_.left;
    for (std::size_t j = 1; j < n; ++j) left_envs_[j] = left_envs_[j - 1] * transfers_[j - 1];
    right_envs_[n - 1] = spectrum_.right;
    for (std::size_t j = n - 1; j-- > 0;) right_envs_[j] = transfers_[j + 1] * right_envs_[j + 1];
}

Eigen::Index UniformMps::max_bond_dim() const {
    Eigen::Index d = 0;
    for (const auto& x : cell_) d = std::max(d, x[0].rows());
    return d;
}

UniformMps thermal_mps(double beta) {
    if (!std::isfinite(beta) || beta < 0.0)
        throw std::invalid_argument("thermal_mps: beta must be finite and >= 0");
    // entries e^{+-beta} rescaled by e^{-beta} to stay finite for large beta
    const double w = std::exp(-2.0 * beta);
    SiteTensor x{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    x[0](0, 0) = 1.0;
    x[0](0, 1) = w;
    x[1](1, 0) = w;
    x[1](1, 1) = 1.0;
    return UniformMps({x});
}

UniformMps depolarized_cat_mps(double p) {
    if (!(p >= 0.0 && p <= 0.5))
        throw std::invalid_argument("depolarized_cat_mps: p must lie in [0, 1/2]");
    const double q = 1.0 - p;
    SiteTensor x{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    x[0](0, 0) = q;
    x[0](1, 1) = p;
    x[1](0, 0) = p;
    x[1](1, 1) = q;
    return UniformMps({x}, true);
}

UniformMps polarized_mps() { return product_mps(1.0); }

UniformMps product_mps(double p_up) {
    if (!(p_up >= 0.0 && p_up <= 1.0))
        throw std::invalid_argument("product_mps: p_up must lie in [0, 1]");
    SiteTensor x{Matrix::Constant(1, 1, p_up), Matrix::Constant(1, 1, 1.0 - p_up)};
    return UniformMps({x});
}

UniformMps symmetrize(const UniformMps& mps) {
    if (mps.z2_symmetric())
        throw std::invalid_argument("symmetrize: state is already z2-symmetric");
    std::vector<SiteTensor> cell;
    cell.reserve(mps.cell_size());
    for (const auto& x : mps.cell()) {
        const Eigen::Index r = x[0].rows(), c = x[0].cols();
        SiteTensor y{Matrix::Zero(2 * r, 2 * c), Matrix::Zero(2 * r, 2 * c)};
        for (int s = 0; s < 2; ++s) {
            y[s].topLeftCorner(r, c) = x[s];
            y[s].bottomRightCorner(r, c) = x[flipped(s)];
        }
        cell.push_back(std::move(y));
    }
    return UniformMps(std::move(cell), true);
}

void clamp_probabilities(std::vector<double>& p, const char* module) {
    bool clamped = false;
    for (double& v : p) {
        if (!std::isfinite(v)) throw NumericalError(module, "non-finite probability");
        if (v < 0.0) {
            if (v < -kNegativeProbabilityTolerance)
                throw NumericalError(module, "negative probability " + std::to_string(v) +
                                                 " beyond truncation tolerance");
            v = 0.0;
            clamped = true;
        }
    }
    if (clamped) {
        const double total = std::accumulate(p.begin(), p.end(), 0.0);
        if (!(total > 0.0)) throw NumericalError(module, "probability table vanishes");
        for (double& v : p) v /= total;
    }
}

std::vector<double> marginal(const UniformMps& mps, int k, long origin) {
    if (k < 1 || k > kMaxMarginalSites)
        throw std::invalid_argument("marginal: block size must lie in [1, " +
                                    std::to_string(kMaxMarginalSites) + "]");
    std::vector<double> out(std::size_t{1} << k);
    std::vector<RowVector> stack(static_cast<std::size_t>(k) + 1);
    stack[0] = mps.left_env(origin);
    const Vector& right = mps.right_env(origin + k - 1);
    std::function<void(int, std::size_t)> descend = [&](int depth, std::size_t index) {
        if (depth == k) {
            out[index] = stack[static_cast<std::size_t>(depth)].dot(right);
            return;
        }
        const SiteTensor& x = mps.site(origin + depth);
        for (int s = 0; s < 2; ++s) {
            stack[static_cast<std::size_t>(depth) + 1].noalias() =
                stack[static_cast<std::size_t>(depth)] * x[s];
            descend(depth + 1, (index << 1) | static_cast<std::size_t>(s));
        }
    };
    descend(0, 0);
    clamp_probabilities(out, "mps-core");
    return out;
}

double magnetization(const UniformMps& mps, long site) {
    const SiteTensor& x = mps.site(site);
    return mps.left_env(site) * (x[0] - x[1]) * mps.right_env(site);
}

double mean_magnetization(const UniformMps& mps) {
    double m = 0.0;
    for (std::size_t j = 0; j < mps.cell_size(); ++j) m += magnetization(mps, static_cast<long>(j));
    return m / static_cast<double>(mps.cell_size());
}

namespace {

void accumulate_correlators(const UniformMps& mps, long origin, std::vector<double>& c) {
    const int r_max = static_cast<int>(c.size()) - 1;
    const SiteTensor& x0 = mps.site(origin);
    RowVector v = mps.left_env(origin) * (x0[0] - x0[1]);
    for (int r = 1; r <= r_max; ++r) {
        const SiteTensor& x = mps.site(origin + r);
        c[static_cast<std::size_t>(r)] += v * (x[0] - x[1]) * mps.right_env(origin + r);
        v = v * mps.site_transfer(origin + r);
    }
}

} // namespace

double spin_correlator_from(const UniformMps& mps, long origin, int r) {
    if (r < 0) throw std::invalid_argument("spin_correlator: r must be >= 0");
    if (r == 0) return 1.0;
    std::vector<double> c(static_cast<std::size_t>(r) + 1, 0.0);
    accumulate_correlators(mps, origin, c);
    return c.back();
}

double spin_correlator(const UniformMps& mps, int r) {
    if (r < 0) throw std::invalid_argument("spin_correlator: r must be >= 0");
    return spin_correlators(mps, r).back();
}

std::vector<double> spin_correlators(const UniformMps& mps, int r_max) {
    if (r_max < 0) throw std::invalid_argument("spin_correlators: r_max must be >= 0");
    std::vector<double> c(static_cast<std::size_t>(r_max) + 1, 0.0);
    const long n = static_cast<long>(mps.cell_size());
    for (long s = 0; s < n; ++s) accumulate_correlators(mps, s, c);
    for (double& v : c) v /= static_cast<double>(n);
    c[0] = 1.0;
    return c;
}

} // namespace mlen
