#include "mlen/experiment.hpp"

#include "mlen/analysis.hpp"
#include "mlen/cmi.hpp"
#include "mlen/oracles.hpp"
#include "mlen/rng.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#ifndef MLEN_VERSION
#define MLEN_VERSION "0.0.0"
#endif

namespace mlen {

namespace fs = std::filesystem;

std::string_view library_version() { return MLEN_VERSION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.16e}", v);
}

class CsvFile {
public:
    CsvFile(const ExperimentSpec& spec, const RunOptions& options, std::string family,
            std::vector<std::pair<std::string, std::string>> extra = {})
        : family_(std::move(family)) {
        text_ = fmt::format("# schema={}\n# family={}\n# version={}\n", kCsvSchema, family_, library_version());
        for (const auto& [k, v] : describe(spec)) text_ += fmt::format("# {}={}\n", k, v);
        text_ += fmt::format("# units={}\n", to_string(options.units));
        for (const auto& [k, v] : extra) text_ += fmt::format("# {}={}\n", k, v);
        path_ = options.out_dir / fmt::format("{}.{}.csv", spec.name, family_);
    }

    void columns(std::initializer_list<std::string_view> names) {
        std::string line;
        for (auto n : names) {
            if (!line.empty()) line += ',';
            line += n;
        }
        text_ += line + '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        std::string line;
        (append(line, cells), ...);
        line.back() = '\n';
        text_ += line;
    }

    fs::path save() const {
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path_.string());
        out << text_;
        if (!out) throw std::runtime_error("failed writing " + path_.string());
        return path_;
    }

private:
    static void append(std::string& line, double v) { line += num(v) + ','; }
    static void append(std::string& line, int v) { line += std::to_string(v) + ','; }
    static void append(std::string& line, long v) { line += std::to_string(v) + ','; }
    static void append(std::string& line, bool v) { line += v ? "1," : "0,"; }
    static void append(std::string& line, const std::string& v) { line += v + ','; }
    static void append(std::string& line, const char* v) { line += std::string(v) + ','; }

    std::string family_;
    std::string text_;
    fs::path path_;
};

ExperimentSpec with_seed(ExperimentSpec spec, const RunOptions& options) {
    if (options.seed) spec.quench.seed = *options.seed;
    return spec;
}

std::vector<int> measurement_steps(const ExperimentSpec& spec) {
    if (spec.times.empty()) {
        std::vector<int> all(static_cast<std::size_t>(spec.quench.steps) + 1);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        return all;
    }
    return spec.steps_for_times();
}

// Calls f(step, state) for every measurement step of the quench, in order.
template <class F>
void for_each_measurement(const ExperimentSpec& spec, F&& f) {
    const std::vector<int> steps = measurement_steps(spec);
    const std::set<int> wanted(steps.begin(), steps.end());
    run_quench(spec.quench, [&](const QuenchStep& s) {
        if (wanted.count(s.step)) f(s);
    });
}

std::string fit_status(const std::exception& e) {
    std::string s = e.what();
    std::replace(s.begin(), s.end(), ',', ';');
    return s;
}

std::vector<CurvePoint> to_curve(const std::vector<CmiEstimate>& est) {
    std::vector<CurvePoint> curve;
    for (const auto& e : est) curve.push_back({e.b_size, e.mean, e.std_error});
    return curve;
}

struct FitRow {
    MarkovFit fit;
    std::string status = "ok";
};

FitRow try_fit(const std::vector<CurvePoint>& curve, const FitOptions& options) {
    FitRow r;
    r.fit.xi = kNaN;
    try {
        r.fit = fit_markov_length(curve, options);
    } catch (const NumericalError& e) {
        r.status = fit_status(e);
    }
    return r;
}

std::vector<fs::path> run_correlator_benchmark(const ExperimentSpec& spec, const RunOptions& options) {
    const QuenchConfig& q = spec.quench;
    const auto exact = correlator_recursion(q.beta_i, q.beta_f, q.alpha, q.steps, spec.r_max + 4 * q.steps + 2, spec.r_max);
    CsvFile csv(spec, options, "correlator");
    csv.columns({"t", "r", "C_mps", "C_exact", "abs_err"});
    for_each_measurement(spec, [&](const QuenchStep& s) {
        const auto c = spin_correlators(s.state, spec.r_max);
        const auto& e = exact[static_cast<std::size_t>(s.step)];
        for (int r = 0; r <= spec.r_max; ++r) {
            const double cm = c[static_cast<std::size_t>(r)], ce = e[static_cast<std::size_t>(r)];
            csv.row(s.time, r, cm, ce, std::abs(cm - ce));
        }
    });
    return {csv.save()};
}

std::vector<fs::path> run_quench_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    const QuenchConfig& q = spec.quench;
    const double m0 = mean_magnetization(initial_state(q.beta_i));
    CsvFile obs(spec, options, "observables");
    obs.columns({"step", "t", "m_even", "m_odd", "m_exact_even", "m_exact_odd", "bond_dim", "truncation_error",
                 "max_norm_drift"});
    CsvFile cor(spec, options, "correlators");
    cor.columns({"t", "r", "C"});
    const std::vector<int> steps = measurement_steps(spec);
    const std::set<int> corr_steps(steps.begin(), steps.end());
    std::vector<double> m{m0, m0};
    run_quench(q, [&](const QuenchStep& s) {
        if (s.step > 0) m = magnetization_recursion(std::move(m), q.beta_f, q.alpha);
        obs.row(s.step, s.time, magnetization(s.state, 0), magnetization(s.state, 1), m[0], m[1],
                static_cast<long>(s.state.max_bond_dim()), s.truncation_error, s.max_norm_drift);
        if (corr_steps.count(s.step)) {
            const auto c = spin_correlators(s.state, spec.r_max);
            for (int r = 0; r <= spec.r_max; ++r) cor.row(s.time, r, c[static_cast<std::size_t>(r)]);
        }
    });
    return {obs.save(), cor.save()};
}

std::vector<fs::path> run_cmi_scan(const ExperimentSpec& spec, const RunOptions& options) {
    const QuenchConfig& q = spec.quench;
    CmiOptions cmi;
    cmi.symmetrized = spec.symmetrize;
    cmi.jobs = options.jobs;
    const bool ground = std::isinf(q.beta_i);

    std::vector<HeatmapSlice> heatmap;
    std::vector<double> magnetizations;
    for_each_measurement(spec, [&](const QuenchStep& s) {
        const auto est =
            estimate_cmi_curve(s.state, spec.b_sizes, spec.samples, stream_seed(q.seed, static_cast<std::uint64_t>(s.step)), cmi);
        heatmap.push_back({s.time, to_curve(est)});
        magnetizations.push_back(std::abs(mean_magnetization(s.state)));
    });

    CsvFile hm(spec, options, "heatmap");
    hm.columns({"t", "b", "I", "stderr", "I_norm"});
    for (const auto& slice : heatmap) {
        double i0 = 0.0;
        for (const auto& p : slice.curve) i0 = std::max(i0, p.value);
        for (const auto& p : slice.curve)
            hm.row(slice.t, p.b, in_units(p.value, options.units), in_units(p.std_error, options.units),
                   i0 > 0.0 ? p.value / i0 : kNaN);
    }

    CsvFile mk(spec, options, "markov");
    mk.columns({"t", "m", "xi_M", "xi_pred", "b_min", "b_max", "points", "residual_rms", "status"});
    FitOptions fo;
    fo.method = FitMethod::log_linear_tail;
    for (std::size_t i = 0; i < heatmap.size(); ++i) {
        const FitRow f = try_fit(heatmap[i].curve, fo);
        MarkovPredictionInputs in{heatmap[i].t, q.beta_i, q.beta_f, magnetizations[i]};
        double pred = kNaN;
        if (ground) {
            if (magnetizations[i] > 0.0) pred = markov_length_prediction(MarkovScenario::ground_to_finite, in);
        } else {
            pred = markov_length_prediction(MarkovScenario::thermal_late_time, in);
        }
        mk.row(heatmap[i].t, magnetizations[i], f.fit.xi, pred, f.fit.b_min, f.fit.b_max, f.fit.points,
               f.fit.residual_rms, f.status);
    }

    const PeakTrajectory traj = cmi_peak_trajectory(heatmap);
    CsvFile pk(spec, options, "peaks", {{"velocity", num(traj.velocity)}});
    pk.columns({"t", "b_peak", "at_boundary"});
    for (const auto& p : traj.peaks) pk.row(p.t, p.b_peak, p.at_boundary);
    return {hm.save(), mk.save(), pk.save()};
}

double cat_reference(double p, int b) {
    if (b % 2 == 0) return exact_cmi_depolarized_cat(p, b);
    if (b + 2 <= kMaxMarginalSites) return brute_force_cmi(depolarized_cat_mps(p), b);
    return kNaN;
}

std::vector<fs::path> run_depolarize_cat(const ExperimentSpec& spec, const RunOptions& options) {
    CsvFile cmi_csv(spec, options, "cmi");
    cmi_csv.columns({"t", "b", "I", "stderr", "I_exact"});
    CsvFile mk(spec, options, "markov");
    mk.columns({"t", "xi_M", "xi_star", "b_min", "b_max", "points", "residual_rms", "status"});
    CmiOptions cmi;
    cmi.jobs = options.jobs;
    for (std::size_t i = 0; i < spec.times.size(); ++i) {
        const double t = spec.times[i];
        const double p = DepolCatParams::from_time(t).p;
        const UniformMps mps = depolarized_cat_mps(p);
        const auto est = estimate_cmi_curve(mps, spec.b_sizes, spec.samples, stream_seed(spec.quench.seed, i), cmi);
        for (const auto& e : est)
            cmi_csv.row(t, e.b_size, in_units(e.mean, options.units), in_units(e.std_error, options.units),
                        in_units(cat_reference(p, e.b_size), options.units));
        FitOptions fo;
        fo.method = spec.fit;
        fo.xi_star = xi_star(t);
        const FitRow f = try_fit(to_curve(est), fo);
        mk.row(t, f.fit.xi, xi_star(t), f.fit.b_min, f.fit.b_max, f.fit.points, f.fit.residual_rms, f.status);
    }
    return {cmi_csv.save(), mk.save()};
}

std::vector<int> default_collapse_sizes(double t) {
    // even |B| covering x = |B| / xi* in [0.25, 10]
    const double xs = xi_star(t);
    std::set<int> sizes;
    for (int k = 0; k < 40; ++k) {
        const double x = 0.25 + (10.0 - 0.25) * k / 39.0;
        sizes.insert(std::max(2, 2 * static_cast<int>(std::lround(0.5 * x * xs))));
    }
    return {sizes.begin(), sizes.end()};
}

std::vector<fs::path> run_collapse(const ExperimentSpec& spec, const RunOptions& options) {
    std::vector<CollapseCurve> curves;
    for (double t : spec.times) {
        const double p = DepolCatParams::from_time(t).p;
        CollapseCurve c{t, {}};
        for (int b : spec.b_sizes.empty() ? default_collapse_sizes(t) : spec.b_sizes)
            c.curve.push_back({b, exact_cmi_depolarized_cat(p, b), 0.0});
        curves.push_back(std::move(c));
    }
    CsvFile rows_csv(spec, options, "collapse");
    rows_csv.columns({"t", "b", "x", "y", "master", "valid"});
    for (const auto& r : collapse_export(curves)) rows_csv.row(r.t, r.b, r.x, r.y, r.master, r.valid);

    CsvFile fit_csv(spec, options, "fit");
    fit_csv.columns({"t", "xi_M", "xi_star", "rel_err", "b_min", "b_max", "points", "residual_rms", "status"});
    for (const auto& c : curves) {
        FitOptions fo;
        fo.method = spec.fit;
        fo.xi_star = xi_star(c.t);
        const FitRow f = try_fit(c.curve, fo);
        fit_csv.row(c.t, f.fit.xi, fo.xi_star, f.fit.xi / fo.xi_star - 1.0, f.fit.b_min, f.fit.b_max, f.fit.points,
                    f.fit.residual_rms, f.status);
    }
    return {rows_csv.save(), fit_csv.save()};
}

std::vector<fs::path> run_lyapunov(const ExperimentSpec& spec, const RunOptions& options) {
    const QuenchConfig& q = spec.quench;
    CsvFile csv(spec, options, "lyapunov");
    csv.columns({"t", "eta0", "eta1", "w", "xi_lyap", "spread", "xi_fit", "status"});
    CmiOptions cmi;
    cmi.jobs = options.jobs;
    for_each_measurement(spec, [&](const QuenchStep& s) {
        LyapunovOptions lo;
        lo.product_length = spec.product_length;
        lo.replicas = spec.replicas;
        lo.seed = stream_seed(q.seed, static_cast<std::uint64_t>(2 * s.step));
        lo.jobs = options.jobs;
        std::string status = "ok";
        LyapunovResult ly;
        ly.eta0 = ly.eta1 = ly.gap = ly.xi = ly.spread = kNaN;
        try {
            ly = lyapunov_spectrum(s.state, lo);
        } catch (const NumericalError& e) {
            status = fit_status(e);
        }
        double xi_fit = kNaN;
        if (!spec.b_sizes.empty()) {
            const auto est = estimate_cmi_curve(s.state, spec.b_sizes, spec.samples,
                                                stream_seed(q.seed, static_cast<std::uint64_t>(2 * s.step + 1)), cmi);
            FitOptions fo;
            const FitRow f = try_fit(to_curve(est), fo);
            xi_fit = f.fit.xi;
            if (f.status != "ok" && status == "ok") status = f.status;
        }
        csv.row(s.time, ly.eta0, ly.eta1, ly.gap, ly.xi, ly.spread, xi_fit, status);
    });
    return {csv.save()};
}

} // namespace

std::vector<fs::path> run_experiment(const ExperimentSpec& raw, const RunOptions& options) {
    const ExperimentSpec spec = with_seed(raw, options);
    fs::create_directories(options.out_dir);
    switch (spec.kind) {
    case ExperimentKind::correlator_benchmark: return run_correlator_benchmark(spec, options);
    case ExperimentKind::quench: return run_quench_experiment(spec, options);
    case ExperimentKind::cmi_scan: return run_cmi_scan(spec, options);
    case ExperimentKind::depolarize_cat: return run_depolarize_cat(spec, options);
    case ExperimentKind::collapse: return run_collapse(spec, options);
    case ExperimentKind::lyapunov: return run_lyapunov(spec, options);
    }
    throw std::invalid_argument("run_experiment: unknown kind");
}

std::vector<fs::path> run_experiments(const std::vector<ExperimentSpec>& specs, const RunOptions& options) {
    std::vector<std::vector<fs::path>> outputs(specs.size());
    // experiments share the job bound with the samplers inside them
    const int outer = std::max(1, std::min<int>(options.jobs, static_cast<int>(specs.size())));
    RunOptions inner = options;
    inner.jobs = std::max(1, options.jobs / outer);
    parallel_for(static_cast<long>(specs.size()), outer,
                 [&](long i) { outputs[static_cast<std::size_t>(i)] = run_experiment(specs[static_cast<std::size_t>(i)], inner); });
    std::vector<fs::path> files;
    for (auto& o : outputs) files.insert(files.end(), o.begin(), o.end());
    files.push_back(write_manifest(options.out_dir, files));
    return files;
}

std::string sha256_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest initialisation failed");
    }
    char buf[1 << 15];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

fs::path write_manifest(const fs::path& dir, const std::vector<fs::path>& files) {
    std::set<fs::path> listed;
    for (const auto& f : files) listed.insert(dir / f.filename());
    // keep entries of earlier runs into the same directory
    std::ifstream old(dir / "manifest.csv");
    for (std::string line; std::getline(old, line);) {
        if (line.empty() || line[0] == '#' || line.rfind("file,", 0) == 0) continue;
        const fs::path f = dir / line.substr(0, line.find(','));
        if (fs::exists(f)) listed.insert(f);
    }
    old.close();
    const std::vector<fs::path> sorted(listed.begin(), listed.end());
    std::string text = fmt::format("# schema={}\n# family=manifest\n# version={}\nfile,bytes,sha256\n", kCsvSchema,
                                   library_version());
    for (const auto& f : sorted)
        text += fmt::format("{},{},{}\n", f.filename().string(), fs::file_size(f), sha256_hex(f));
    const fs::path out = dir / "manifest.csv";
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + out.string());
    return out;
}

} // namespace mlen
