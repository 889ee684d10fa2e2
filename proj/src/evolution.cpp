#include "mlen/evolution.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace mlen {

namespace {

Eigen::Index keep_count(const Vector& s, const TruncationPolicy& policy) {
    const double threshold = std::max(policy.cutoff, kSchmidtFloor);
    Eigen::Index keep = 0;
    while (keep < s.size() && keep < policy.d_max && s[keep] >= threshold) ++keep;
    return std::max<Eigen::Index>(keep, 1);
}

double tail_weight(const Vector& s, Eigen::Index keep) {
    return s.tail(s.size() - keep).squaredNorm();
}

} // namespace

StepResult tebd_step(const UniformMps& mps, const CellMpo& mpo, const TruncationPolicy& policy,
                     const CanonicalOptions& canonical) {
    if (mps.z2_symmetric())
        throw std::invalid_argument("tebd_step: z2-symmetric states are not injective; evolve the polarized trajectory");
    if (policy.d_max < 1) throw std::invalid_argument("tebd_step: d_max must be >= 1");

    const PhysTensor blocked = apply_cell_mpo(block_cell(mps), mpo);
    const CanonicalForm cf = canonicalize(blocked, canonical);

    const Eigen::Index chi1 = keep_count(cf.singular_values, policy);
    double error = tail_weight(cf.singular_values, chi1);
    const Vector c = cf.singular_values.head(chi1);

    // Theta^{p0 p1} = A_L^{p0 p1} C with rows (p0, a) and columns (p1, b)
    Matrix theta(2 * chi1, 2 * chi1);
    std::array<Matrix, 4> al;
    for (int p = 0; p < 4; ++p) {
        al[static_cast<std::size_t>(p)] = cf.left[static_cast<std::size_t>(p)].topLeftCorner(chi1, chi1);
        theta.block((p / 2) * chi1, (p % 2) * chi1, chi1, chi1) =
            al[static_cast<std::size_t>(p)] * c.asDiagonal();
    }
    Eigen::JacobiSVD<Matrix> svd(theta, Eigen::ComputeThinU);
    Vector sigma = svd.singularValues();
    const double theta_norm = sigma.norm();
    if (!(theta_norm > 0.0)) throw NumericalError("glauber-evolution", "vanishing two-site tensor");
    sigma /= theta_norm;
    const Eigen::Index chi2 = keep_count(sigma, policy);
    error += tail_weight(sigma, chi2);

    const Matrix& u = svd.matrixU();
    SiteTensor x0, x1;
    for (int p0 = 0; p0 < 2; ++p0) x0[p0] = u.block(p0 * chi1, 0, chi1, chi2);
    for (int p1 = 0; p1 < 2; ++p1) {
        x1[p1] = Matrix::Zero(chi2, chi1);
        for (int p0 = 0; p0 < 2; ++p0)
            x1[p1].noalias() += x0[p0].transpose() * al[static_cast<std::size_t>(p0 * 2 + p1)];
    }

    std::vector<SiteTensor> cell{std::move(x0), std::move(x1)};
    const TransferSpectrum raw = transfer_spectrum(cell, false);
    StepResult out{UniformMps(std::move(cell)), error, raw.lambda0 * cf.lambda - 1.0};
    return out;
}

UniformMps initial_state(double beta_i) {
    if (std::isinf(beta_i) && beta_i > 0.0) return polarized_mps();
    return thermal_mps(beta_i);
}

void run_quench(const QuenchConfig& config, const std::function<void(const QuenchStep&)>& observe) {
    if (config.steps < 0) throw std::invalid_argument("run_quench: steps must be >= 0");
    const CellMpo mpo(GlauberChannel(config.beta_f, config.alpha));
    const TruncationPolicy policy{config.d_max, config.cutoff};
    UniformMps state = initial_state(config.beta_i);
    double error = 0.0;
    double drift = 0.0;
    observe(QuenchStep{0, 0.0, state, error, drift});
    for (int step = 1; step <= config.steps; ++step) {
        StepResult r = tebd_step(state, mpo, policy);
        error += r.truncation_error;
        drift = std::max(drift, std::abs(r.norm_drift));
        state = std::move(r.state);
        observe(QuenchStep{step, config.alpha * step, state, error, drift});
    }
}

} // namespace mlen
