#pragma once

#include "mlen/config.hpp"
#include "mlen/information.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mlen {

inline constexpr int kCsvSchema = 1;

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;   // overrides the config seed
    int jobs = 1;
    Units units = Units::nats;
};

/// Runs one experiment and returns the CSV files it wrote, in a fixed order.
std::vector<std::filesystem::path> run_experiment(const ExperimentSpec& spec, const RunOptions& options);

/// Runs experiments concurrently (up to options.jobs at once) and writes
/// manifest.csv listing every output with its size and SHA-256 digest.
std::vector<std::filesystem::path> run_experiments(const std::vector<ExperimentSpec>& specs,
                                                   const RunOptions& options);

std::string sha256_hex(const std::filesystem::path& file);

/// Writes manifest.csv into `dir` and returns its path.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::vector<std::filesystem::path>& files);

std::string_view library_version();

} // namespace mlen
