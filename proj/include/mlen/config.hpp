#pragma once

#include "mlen/analysis.hpp"
#include "mlen/evolution.hpp"

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mlen {

enum class ExperimentKind { depolarize_cat, quench, cmi_scan, correlator_benchmark, lyapunov, collapse };

std::string_view to_string(ExperimentKind kind);

/// One experiment from a config file section `[kind]` or `[kind.name]`.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::quench;
    std::string name;              // section name, e.g. "cmi-scan.ground15"
    QuenchConfig quench;
    std::vector<double> times;     // measurement times t = alpha * step (depolarizing time for the cat)
    std::vector<int> b_sizes;
    long samples = 10000;
    int r_max = 60;                // largest distance reported by correlator runs
    int replicas = 8;
    int product_length = 2000;
    bool symmetrize = false;
    FitMethod fit = FitMethod::log_linear_tail;

    /// Sweep index for each entry of `times`.
    std::vector<int> steps_for_times() const;
};

/// Canonical key=value description of a spec, used for output headers.
std::vector<std::pair<std::string, std::string>> describe(const ExperimentSpec& spec);

struct ValidationResult {
    std::vector<ExperimentSpec> specs;   // empty whenever errors is non-empty
    std::vector<std::string> errors;     // "section.field: message"
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Parses and checks a config. Every violation is reported with its field
/// path; no spec is returned unless all of them are valid.
ValidationResult validate_config(std::string_view text);

/// "1, 2, 4:10:2" -> {1, 2, 4, 6, 8, 10}; ranges are inclusive start:stop:step.
std::vector<double> parse_number_list(std::string_view text);

/// Accepts "inf" and "infinity" as well as ordinary decimal numbers.
double parse_double(std::string_view text);

} // namespace mlen
