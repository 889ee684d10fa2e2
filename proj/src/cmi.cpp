#include "mlen/cmi.hpp"

#include "mlen/information.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace mlen {

namespace {

constexpr const char* kModule = "cmi-sampler";

// Chooses spin index 0 or 1 from unnormalized weights w0, w1.
struct Draw {
    int index;
    double weight;      // unnormalized weight of the chosen outcome
    double log_cond;    // log of its conditional probability
};

Draw draw_spin(double w0, double w1, Rng& rng) {
    const double total = w0 + w1;
    if (!(total > 0.0) || !std::isfinite(total))
        throw NumericalError(kModule, "conditional probabilities do not normalize");
    double c0 = w0 / total;
    if (c0 < -kNegativeProbabilityTolerance || c0 > 1.0 + kNegativeProbabilityTolerance)
        throw NumericalError(kModule, "negative conditional probability " + std::to_string(std::min(c0, 1.0 - c0)));
    c0 = std::clamp(c0, 0.0, 1.0);
    const int s = uniform01(rng) < c0 ? 0 : 1;
    const double weight = s == 0 ? w0 : w1;
    const double cond = s == 0 ? c0 : 1.0 - c0;
    if (!(weight > 0.0) || !(cond > 0.0)) throw NumericalError(kModule, "sampled an outcome of zero probability");
    return {s, weight, std::log(cond)};
}

// Rows for every configuration of `count` sites starting at `site`, starting
// from `start`; row index bit (count-1-i) holds site+i. Flipped tensors when
// `flip` is set.
Matrix block_rows(const UniformMps& mps, const RowVector& start, long site, int count, bool flip) {
    Matrix rows = start;
    for (int i = 0; i < count; ++i) {
        const SiteTensor& x = mps.site(site + i);
        Matrix next(rows.rows() * 2, x[0].cols());
        for (Eigen::Index r = 0; r < rows.rows(); ++r)
            for (int s = 0; s < 2; ++s) next.row(r * 2 + s) = rows.row(r) * x[flip ? flipped(s) : s];
        rows = std::move(next);
    }
    return rows;
}

// Columns X^{c_1} ... X^{c_n} V for every configuration of `count` sites.
Matrix block_columns(const UniformMps& mps, long site, int count) {
    Matrix cols = mps.right_env(site + count - 1);
    for (int i = count - 1; i >= 0; --i) {
        const SiteTensor& x = mps.site(site + i);
        Matrix next(x[0].rows(), cols.cols() * 2);
        for (Eigen::Index c = 0; c < cols.cols(); ++c)
            for (int s = 0; s < 2; ++s) next.col(static_cast<Eigen::Index>(s) * cols.cols() + c) = x[s] * cols.col(c);
        cols = std::move(next);
    }
    return cols;
}

// Quantities that depend only on the cell position, shared by all samples.
struct SamplerContext {
    const UniformMps& mps;
    CmiOptions options;
    long cell;
    std::vector<std::array<Vector, 2>> w;   // X_j^s right_env(j)
    std::vector<Matrix> c_block;              // C columns when C starts at cell position j

    SamplerContext(const UniformMps& m, const CmiOptions& o)
        : mps(m), options(o), cell(static_cast<long>(m.cell_size())) {
        if (o.a_size < 1 || o.c_size < 1 || o.a_size > 8 || o.c_size > 8)
            throw std::invalid_argument("cmi-sampler: A and C sizes must lie in [1, 8]");
        for (long j = 0; j < cell; ++j) {
            const SiteTensor& x = m.site(j);
            w.push_back({x[0] * m.right_env(j), x[1] * m.right_env(j)});
            c_block.push_back(block_columns(m, j, o.c_size));
        }
    }

    const std::array<Vector, 2>& w_at(long site) const { return w[static_cast<std::size_t>(((site % cell) + cell) % cell)]; }
    const Matrix& c_at(long site) const { return c_block[static_cast<std::size_t>(((site % cell) + cell) % cell)]; }
};

std::vector<double> run_path(const SamplerContext& ctx, const std::vector<int>& b_sizes, Rng& rng, long origin) {
    const UniformMps& mps = ctx.mps;
    const bool sym = ctx.options.symmetrized;
    const int na = ctx.options.a_size;
    const int nc_bits = ctx.options.c_size;
    const Eigen::Index nc = Eigen::Index{1} << nc_bits;
    int b_max = 0;
    for (int b : b_sizes) {
        if (b < 1) throw std::invalid_argument("cmi-sampler: |B| must be >= 1");
        b_max = std::max(b_max, b);
    }
    std::vector<std::vector<std::size_t>> wanted(static_cast<std::size_t>(b_max) + 1);
    for (std::size_t k = 0; k < b_sizes.size(); ++k) wanted[static_cast<std::size_t>(b_sizes[k])].push_back(k);
    std::vector<double> out(b_sizes.size(), 0.0);

    Matrix rows = block_rows(mps, mps.left_env(origin), origin, na, false);
    Matrix rows_bar;
    if (sym) rows_bar = block_rows(mps, mps.left_env(origin), origin, na, true);
    const Eigen::Index n_rows = rows.rows();
    std::vector<double> joint(static_cast<std::size_t>(n_rows * nc));

    long site = origin + na;
    for (int b = 1; b <= b_max; ++b, ++site) {
        const auto& w = ctx.w_at(site);
        const RowVector u = rows.colwise().sum();
        double w0 = u.dot(w[0]);
        double w1 = u.dot(w[1]);
        if (sym) {
            const RowVector ub = rows_bar.colwise().sum();
            w0 = 0.5 * (w0 + ub.dot(w[1]));
            w1 = 0.5 * (w1 + ub.dot(w[0]));
        }
        const Draw d = draw_spin(w0, w1, rng);
        const SiteTensor& x = mps.site(site);
        rows = rows * x[d.index] / d.weight;
        if (sym) rows_bar = rows_bar * x[flipped(d.index)] / d.weight;

        const auto& targets = wanted[static_cast<std::size_t>(b)];
        if (targets.empty()) continue;
        {
            const Matrix& cb = ctx.c_at(site + 1);
            Matrix j = rows * cb;
            if (sym) {
                const Matrix jb = rows_bar * cb;
                for (Eigen::Index c = 0; c < nc; ++c) j.col(c) = 0.5 * (j.col(c) + jb.col(nc - 1 - c));
            }
            double total = 0.0;
            for (Eigen::Index a = 0; a < n_rows; ++a)
                for (Eigen::Index c = 0; c < nc; ++c) {
                    joint[static_cast<std::size_t>(a * nc + c)] = j(a, c);
                    total += j(a, c);
                }
            if (std::abs(total - 1.0) > 1e-6)
                throw NumericalError(kModule, "conditional A,C marginal off normalization by " +
                                                  std::to_string(total - 1.0));
            for (double& v : joint) v /= total;
            clamp_probabilities(joint, kModule);
            const double mi = mutual_information(joint, static_cast<int>(n_rows), static_cast<int>(nc));
            for (std::size_t k : targets) out[k] = mi;
        }
    }
    return out;
}

} // namespace

SampleRecord sample_b_configuration(const UniformMps& mps, int b_size, Rng& rng, bool symmetrized, long origin) {
    if (b_size < 1) throw std::invalid_argument("sample_b_configuration: |B| must be >= 1");
    SampleRecord rec;
    rec.origin = origin;
    rec.config.reserve(static_cast<std::size_t>(b_size));
    const long first = origin + 1;
    const RowVector ua = mps.left_env(origin) * mps.site_transfer(origin);
    const Eigen::Index d0 = mps.bond_dim(first);
    rec.f = Matrix::Identity(d0, d0);
    Matrix f_bar;
    if (symmetrized) f_bar = Matrix::Identity(d0, d0);

    for (int k = 0; k < b_size; ++k) {
        const long site = first + k;
        const SiteTensor& x = mps.site(site);
        const Vector& r = mps.right_env(site);
        const RowVector v = ua * rec.f;
        double w0 = v * x[0] * r;
        double w1 = v * x[1] * r;
        if (symmetrized) {
            const RowVector vb = ua * f_bar;
            w0 = 0.5 * (w0 + vb * x[1] * r);
            w1 = 0.5 * (w1 + vb * x[0] * r);
        }
        const Draw d = draw_spin(w0, w1, rng);
        rec.config.push_back(spin_value(d.index));
        rec.log_prob += d.log_cond;
        rec.f = rec.f * x[d.index] / d.weight;
        if (symmetrized) f_bar = f_bar * x[flipped(d.index)] / d.weight;
    }
    if (symmetrized) rec.f_bar = std::move(f_bar);
    const auto p = conditional_ac_marginal(rec, mps);
    rec.mi = mi_2x2(p);
    return rec;
}

std::array<double, 4> conditional_ac_marginal(const SampleRecord& record, const UniformMps& mps) {
    if (!record.f.allFinite()) throw NumericalError(kModule, "non-finite F matrix");
    const long origin = record.origin;
    const long c_site = origin + 1 + static_cast<long>(record.config.size());
    const RowVector& left = mps.left_env(origin);
    const Vector& right = mps.right_env(c_site);
    const SiteTensor& xa = mps.site(origin);
    const SiteTensor& xc = mps.site(c_site);
    std::vector<double> p(4);
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
            double v = left * xa[a] * record.f * xc[c] * right;
            if (record.f_bar) {
                const double vb = left * xa[flipped(a)] * (*record.f_bar) * xc[flipped(c)] * right;
                v = 0.5 * (v + vb);
            }
            p[static_cast<std::size_t>(a * 2 + c)] = v;
        }
    const double total = p[0] + p[1] + p[2] + p[3];
    if (!(std::abs(total - 1.0) <= 1e-6))
        throw NumericalError(kModule, "conditional A,C marginal off normalization by " + std::to_string(total - 1.0));
    for (double& v : p) v /= total;
    clamp_probabilities(p, kModule);
    return {p[0], p[1], p[2], p[3]};
}

std::vector<double> sample_cmi_path(const UniformMps& mps, const std::vector<int>& b_sizes, Rng& rng,
                                    const CmiOptions& options, long origin) {
    const SamplerContext ctx(mps, options);
    return run_path(ctx, b_sizes, rng, origin);
}

void parallel_for(long count, int jobs, const std::function<void(long)>& f) {
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = static_cast<int>(std::min<long>(jobs, std::max<long>(count, 1)));
    if (jobs == 1) {
        for (long i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            for (long i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

CmiEstimate summarize(const std::vector<double>& values, int b_size) {
    CmiEstimate e;
    e.b_size = b_size;
    e.samples = static_cast<long>(values.size());
    if (values.empty()) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        const double var = ss / static_cast<double>(values.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(values.size()));
    }
    return e;
}

std::vector<CmiEstimate> estimate_cmi_curve(const UniformMps& mps, const std::vector<int>& b_sizes, long samples,
                                            std::uint64_t seed, const CmiOptions& options) {
    if (samples < 2) throw std::invalid_argument("estimate_cmi: need at least 2 samples");
    if (b_sizes.empty()) throw std::invalid_argument("estimate_cmi: no |B| values requested");
    const SamplerContext ctx(mps, options);
    const std::size_t nb = b_sizes.size();
    std::vector<double> values(static_cast<std::size_t>(samples) * nb);
    const long cell = static_cast<long>(mps.cell_size());
    parallel_for(samples, options.jobs, [&](long i) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
        const long origin = cell > 1 ? static_cast<long>(rng() % static_cast<std::uint64_t>(cell)) : 0;
        const std::vector<double> mi = run_path(ctx, b_sizes, rng, origin);
        std::copy(mi.begin(), mi.end(), values.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * nb));
    });
    std::vector<CmiEstimate> out;
    std::vector<double> column(static_cast<std::size_t>(samples));
    for (std::size_t k = 0; k < nb; ++k) {
        for (long i = 0; i < samples; ++i) column[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(i) * nb + k];
        out.push_back(summarize(column, b_sizes[k]));
    }
    return out;
}

CmiEstimate estimate_cmi(const UniformMps& mps, int b_size, long samples, std::uint64_t seed,
                         const CmiOptions& options) {
    return estimate_cmi_curve(mps, {b_size}, samples, seed, options).front();
}

} // namespace mlen
