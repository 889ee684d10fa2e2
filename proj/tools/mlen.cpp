#include "mlen/experiment.hpp"
#include "mlen/types.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string units = "nats";
};

void add_common(CLI::App* cmd, Common& c, bool validate_only) {
    cmd->add_option("--config", c.config, "experiment config file")->required()->envname("MLEN_CONFIG");
    if (validate_only) return;
    cmd->add_option("--out", c.out, "output directory")->envname("MLEN_OUT");
    cmd->add_option("--seed", c.seed, "override the config seed")->envname("MLEN_SEED");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::Range(1, 1024))->envname("MLEN_JOBS");
    cmd->add_option("--units", c.units, "information units")->check(CLI::IsMember({"nats", "bits"}))->envname("MLEN_UNITS");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool belongs(mlen::ExperimentKind kind, const std::string& command) {
    using K = mlen::ExperimentKind;
    if (command == "quench") return kind == K::quench;
    if (command == "cmi-scan") return kind == K::cmi_scan || kind == K::depolarize_cat;
    if (command == "correlator") return kind == K::correlator_benchmark;
    if (command == "lyapunov") return kind == K::lyapunov;
    if (command == "collapse") return kind == K::collapse;
    return false;
}

int run(const std::string& command, const Common& c) {
    mlen::ValidationResult v;
    try {
        v = mlen::validate_config(read_file(c.config));
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitConfig;
    }
    for (const auto& w : v.warnings) fmt::print(stderr, "warning: {}\n", w);
    for (const auto& e : v.errors) fmt::print(stderr, "error: {}\n", e);
    if (!v.ok()) return kExitConfig;

    if (command == "validate") {
        for (const auto& s : v.specs) {
            fmt::print("[{}]\n", s.name);
            for (const auto& [k, val] : mlen::describe(s)) fmt::print("  {} = {}\n", k, val);
        }
        return 0;
    }

    std::vector<mlen::ExperimentSpec> chosen;
    for (const auto& s : v.specs)
        if (belongs(s.kind, command)) chosen.push_back(s);
    if (chosen.empty()) {
        fmt::print(stderr, "error: {} has no sections for the {} command\n", c.config, command);
        return kExitConfig;
    }

    mlen::RunOptions opts;
    opts.out_dir = c.out;
    opts.seed = c.seed;
    opts.jobs = c.jobs;
    opts.units = mlen::parse_units(c.units);
    try {
        for (const auto& f : mlen::run_experiments(chosen, opts)) fmt::print("{}\n", f.string());
    } catch (const mlen::NumericalError& e) {
        fmt::print(stderr, "numerical error in {}\n", e.what());
        return kExitNumerical;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markov length of classical spin chains under Glauber quenches"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mlen::library_version()));

    const std::vector<std::pair<std::string, std::string>> commands{
        {"quench", "evolve and record magnetization and correlators"},
        {"cmi-scan", "CMI heatmaps and Markov lengths (also depolarize-cat sections)"},
        {"correlator", "MPS correlators against the exact recursion"},
        {"lyapunov", "Lyapunov gap of the conditioned transfer products"},
        {"collapse", "exact depolarized-cat curves rescaled onto the master curve"},
        {"validate", "check a config and print the parsed experiments"},
    };
    Common common;
    std::string selected;
    for (const auto& [name, help] : commands) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(cmd, common, name == "validate");
        cmd->callback([&selected, name = name] { selected = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        return run(selected, common);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}
