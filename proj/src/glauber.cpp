#include "mlen/glauber.hpp"

#include <cmath>

namespace mlen {

double glauber_weight(int sigma, int sigma_prime, int tau, int tau_prime, double beta, double alpha) {
    const double h = static_cast<double>(tau + tau_prime);
    // e^{beta s h} / (e^{beta h} + e^{-beta h}) = 1 / (1 + e^{-2 beta s h}), finite for any beta
    const double heat_bath = 1.0 / (1.0 + std::exp(-2.0 * beta * sigma * h));
    return (1.0 - alpha) * (sigma == sigma_prime ? 1.0 : 0.0) + alpha * heat_bath;
}

GlauberChannel::GlauberChannel(double beta, double alpha) : beta_(beta), alpha_(alpha) {
    if (!(beta >= 0.0) || std::isnan(beta))
        throw std::invalid_argument("GlauberChannel: beta must be >= 0");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("GlauberChannel: alpha must lie in [0, 1]");
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    table_[static_cast<std::size_t>(((a * 2 + b) * 2 + c) * 2 + d)] =
                        glauber_weight(spin_value(a), spin_value(b), spin_value(c), spin_value(d),
                                       beta, alpha);
}

CellMpo::CellMpo(const GlauberChannel& channel, SweepLayers layers)
    : channel_(channel), layers_(layers) {
    const bool even = layers != SweepLayers::odd;
    const bool odd = layers != SweepLayers::even;
    for (int n0 = 0; n0 < 2; ++n0)
        for (int n1 = 0; n1 < 2; ++n1)
            for (int o0 = 0; o0 < 2; ++o0)
                for (int o1 = 0; o1 < 2; ++o1) {
                    Matrix m = Matrix::Zero(kBond, kBond);
                    for (int ul = 0; ul < 2; ++ul)
                        for (int vr = 0; vr < 2; ++vr) {
                            // bond (u, v): u = old odd spin, v = new even spin
                            const int vl = n0;
                            const int ur = o1;
                            const double we = even ? channel_.w(n0, o0, ul, o1) : (n0 == o0 ? 1.0 : 0.0);
                            const double wo = odd ? channel_.w(n1, o1, n0, vr) : (n1 == o1 ? 1.0 : 0.0);
                            m(ul * 2 + vl, ur * 2 + vr) = we * wo;
                        }
                    blocks_[static_cast<std::size_t>(((n0 * 2 + n1) * 2 + o0) * 2 + o1)] = std::move(m);
                }
}

PhysTensor block_cell(const UniformMps& mps) {
    if (mps.cell_size() > 2)
        throw std::invalid_argument("block_cell: unit cell must have one or two sites");
    const SiteTensor& x0 = mps.site(0);
    const SiteTensor& x1 = mps.site(1);
    PhysTensor b(4);
    for (int p0 = 0; p0 < 2; ++p0)
        for (int p1 = 0; p1 < 2; ++p1) b[static_cast<std::size_t>(p0 * 2 + p1)] = x0[p0] * x1[p1];
    return b;
}

PhysTensor apply_cell_mpo(const PhysTensor& blocked, const CellMpo& mpo) {
    if (blocked.size() != 4) throw std::invalid_argument("apply_cell_mpo: expected a blocked two-site cell");
    const Eigen::Index dl = blocked[0].rows(), dr = blocked[0].cols();
    const Eigen::Index w = CellMpo::kBond;
    PhysTensor out(4, Matrix::Zero(dl * w, dr * w));
    for (int n = 0; n < 4; ++n)
        for (int o = 0; o < 4; ++o) {
            const Matrix& m = mpo.block(n / 2, n % 2, o / 2, o % 2);
            const Matrix& y = blocked[static_cast<std::size_t>(o)];
            Matrix& target = out[static_cast<std::size_t>(n)];
            // Kronecker product with combined index (a, l) -> a * 4 + l
            for (Eigen::Index l = 0; l < w; ++l)
                for (Eigen::Index r = 0; r < w; ++r) {
                    const double c = m(l, r);
                    if (c == 0.0) continue;
                    for (Eigen::Index b = 0; b < dr; ++b)
                        for (Eigen::Index a = 0; a < dl; ++a) target(a * w + l, b * w + r) += c * y(a, b);
                }
        }
    return out;
}

UniformMps unblock_exact(const PhysTensor& blocked) {
    const Eigen::Index dl = blocked[0].rows(), dr = blocked[0].cols();
    SiteTensor x0{Matrix::Zero(dl, 2 * dr), Matrix::Zero(dl, 2 * dr)};
    SiteTensor x1{Matrix::Zero(2 * dr, dr), Matrix::Zero(2 * dr, dr)};
    for (int p0 = 0; p0 < 2; ++p0)
        for (int p1 = 0; p1 < 2; ++p1) x0[p0].middleCols(p1 * dr, dr) = blocked[static_cast<std::size_t>(p0 * 2 + p1)];
    for (int p1 = 0; p1 < 2; ++p1) x1[p1].middleRows(p1 * dr, dr).setIdentity();
    return UniformMps({x0, x1});
}

UniformMps apply_mpo_exact(const UniformMps& mps, const CellMpo& mpo) {
    return unblock_exact(apply_cell_mpo(block_cell(mps), mpo));
}

UniformMps apply_depolarizing(const UniformMps& mps, double p) {
    if (!(p >= 0.0 && p <= 0.5))
        throw std::invalid_argument("apply_depolarizing: p must lie in [0, 1/2]");
    const double q = 1.0 - p;
    std::vector<SiteTensor> cell;
    for (const auto& x : mps.cell()) cell.push_back({q * x[0] + p * x[1], p * x[0] + q * x[1]});
    return UniformMps(std::move(cell), mps.z2_symmetric());
}

} // namespace mlen
