#pragma once

#include "mlen/mps.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace testing_support {

using mlen::Matrix;
using mlen::SiteTensor;

// Small hand-rolled generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::mt19937_64& engine() { return rng_; }

    Matrix positive(Eigen::Index r, Eigen::Index c, double lo = 0.05, double hi = 1.0) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
        return m;
    }
    Matrix gaussian(Eigen::Index r, Eigen::Index c) {
        std::normal_distribution<double> n;
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng_);
        return m;
    }

    // Nonnegative tensors, so every contraction is a valid (unnormalized) probability.
    std::vector<SiteTensor> positive_cell(int cell, Eigen::Index d) {
        std::vector<SiteTensor> out;
        for (int i = 0; i < cell; ++i) out.push_back({positive(d, d), positive(d, d)});
        return out;
    }

private:
    std::mt19937_64 rng_;
};

// Joint distribution of k sites from the raw tensors, using its own dense
// eigensolve of the cell transfer matrix. Index bit (k-1-i) = site origin+i.
inline std::vector<double> window_distribution(const std::vector<SiteTensor>& cell, int k, int origin) {
    const int n = static_cast<int>(cell.size());
    auto at = [&](int i) -> const SiteTensor& { return cell[static_cast<std::size_t>(((i % n) + n) % n)]; };
    // transfer of the cell starting at `origin`
    Matrix t_origin = Matrix::Identity(at(origin)[0].rows(), at(origin)[0].rows());
    for (int i = 0; i < n; ++i) t_origin = t_origin * (at(origin + i)[0] + at(origin + i)[1]);
    Eigen::EigenSolver<Matrix> right(t_origin), left(t_origin.transpose());
    auto leading = [](const Eigen::EigenSolver<Matrix>& es) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
        mlen::Vector v = es.eigenvectors().col(best).real();
        if (v.sum() < 0) v = -v;
        return std::make_pair(es.eigenvalues()(best).real(), v);
    };
    const auto [lam, vr] = leading(right);
    const auto [lam_l, vl] = leading(left);
    (void)lam_l;
    const double per_site = std::pow(lam, 1.0 / n);
    std::vector<double> p(std::size_t{1} << k);
    for (std::size_t idx = 0; idx < p.size(); ++idx) {
        mlen::RowVector v = vl.transpose();
        int site = origin;
        for (int i = 0; i < k; ++i, ++site) {
            const int s = static_cast<int>((idx >> (k - 1 - i)) & 1u);
            v = v * at(site)[s] / per_site;
        }
        // close with the cell transfer back to the origin phase
        for (; ((site - origin) % n) != 0; ++site) v = v * (at(site)[0] + at(site)[1]) / per_site;
        p[idx] = v.dot(vr);
    }
    double total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
    return p;
}

// Heat-bath weight written out directly.
inline double heat_bath(int s_new, int s_old, int tl, int tr, double beta, double alpha) {
    const double h = tl + tr;
    const double bath = std::exp(beta * s_new * h) / (2.0 * std::cosh(beta * h));
    return (1.0 - alpha) * (s_new == s_old ? 1.0 : 0.0) + alpha * bath;
}

// Distribution over a finite window of spins (bit i = site first+i, 1 = down)
// evolved by brute force: the even layer updates every even site whose two
// neighbours lie inside the window, then the odd layer does the same.
class WindowChain {
public:
    WindowChain(int first, int length, std::function<double(const std::vector<int>&)> weight)
        : first_(first), n_(length), p_(std::size_t{1} << length) {
        std::vector<int> s(static_cast<std::size_t>(n_));
        double total = 0.0;
        for (std::size_t idx = 0; idx < p_.size(); ++idx) {
            for (int i = 0; i < n_; ++i) s[static_cast<std::size_t>(i)] = ((idx >> i) & 1u) ? -1 : 1;
            p_[idx] = weight(s);
            total += p_[idx];
        }
        for (double& x : p_) x /= total;
    }

    void layer(int parity, double beta, double alpha) {
        for (int i = 1; i + 1 < n_; ++i) {
            if (((first_ + i) % 2 + 2) % 2 != parity) continue;
            std::vector<double> next(p_.size(), 0.0);
            for (std::size_t idx = 0; idx < p_.size(); ++idx) {
                if (p_[idx] == 0.0) continue;
                const int old = spin(idx, i), tl = spin(idx, i - 1), tr = spin(idx, i + 1);
                for (int s : {1, -1}) {
                    std::size_t j = idx & ~(std::size_t{1} << i);
                    if (s < 0) j |= std::size_t{1} << i;
                    next[j] += p_[idx] * heat_bath(s, old, tl, tr, beta, alpha);
                }
            }
            p_ = std::move(next);
        }
    }
    void sweep(double beta, double alpha) {
        layer(0, beta, alpha);
        layer(1, beta, alpha);
    }

    double expectation(const std::function<double(const std::vector<int>&)>& f) const {
        std::vector<int> s(static_cast<std::size_t>(n_));
        double sum = 0.0;
        for (std::size_t idx = 0; idx < p_.size(); ++idx) {
            if (p_[idx] == 0.0) continue;
            for (int i = 0; i < n_; ++i) s[static_cast<std::size_t>(i)] = spin(idx, i);
            sum += p_[idx] * f(s);
        }
        return sum;
    }
    // Marginal of sites [from, from+k) in the library's bit order (first site most significant).
    std::vector<double> marginal(int from, int k) const {
        std::vector<double> out(std::size_t{1} << k, 0.0);
        const int off = from - first_;
        for (std::size_t idx = 0; idx < p_.size(); ++idx) {
            std::size_t o = 0;
            for (int i = 0; i < k; ++i) o = (o << 1) | ((idx >> (off + i)) & 1u);
            out[o] += p_[idx];
        }
        return out;
    }
    int index(int site) const { return site - first_; }

private:
    static int spin(std::size_t idx, int i) { return ((idx >> i) & 1u) ? -1 : 1; }
    int first_;
    int n_;
    std::vector<double> p_;
};

// Ising chain marginal with open ends: P(s) = 1/2 prod (1 + t s_i s_{i+1}) / 2.
inline std::function<double(const std::vector<int>&)> thermal_weight(double beta) {
    if (std::isinf(beta))
        return [](const std::vector<int>& s) {
            for (int x : s)
                if (x != 1) return 0.0;
            return 1.0;
        };
    const double t = std::tanh(beta);
    return [t](const std::vector<int>& s) {
        double w = 1.0;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) w *= 1.0 + t * s[i] * s[i + 1];
        return w;
    };
}

// I(A:C|B) = H(AB) + H(BC) - H(B) - H(ABC) from a joint with A = 1 site at
// the top bit and C = 1 site at the bottom bit.
inline double cmi_by_entropies(const std::vector<double>& joint, int nb) {
    const int n = nb + 2;
    auto entropy_of = [&](int lo, int hi) {  // bits for sites [lo, hi) counted from the top
        std::vector<double> m(std::size_t{1} << (hi - lo), 0.0);
        for (std::size_t idx = 0; idx < joint.size(); ++idx) {
            const std::size_t key = (idx >> (n - hi)) & ((std::size_t{1} << (hi - lo)) - 1);
            m[key] += joint[idx];
        }
        double h = 0.0;
        for (double x : m)
            if (x > 0) h -= x * std::log(x);
        return h;
    };
    return entropy_of(0, n - 1) + entropy_of(1, n) - entropy_of(1, n - 1) - entropy_of(0, n);
}

} // namespace testing_support
