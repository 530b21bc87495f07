#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "sgdlab/cli/config.hpp"

namespace sgdlab::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3 };

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path dir;  // empty when validation failed
    Json record;
};

/// Validates, creates `<output_dir>/<experiment>/<UTC timestamp>-<seed>/`,
/// runs the experiment and persists config.json, metrics.json, record.json
/// and the experiment's artifacts. Numeric failures still write the record
/// with status "failed". Progress and errors go to log.
RunResult run_experiment(const ExperimentConfig& config, std::ostream& log);

/// `lab run`: loads the file, then run_experiment. Returns the exit code.
int run_command(const std::string& config_path, std::ostream& out, std::ostream& err);

/// `lab report`: one row per record.json found below dir, sorted by start
/// time. Unreadable records are flagged in their row. An empty directory is
/// an error (exit 2).
int report_command(const std::string& dir, std::ostream& out, std::ostream& err);

/// `lab gen-data`: linear-regression data set as CSV.
int gen_data_command(std::size_t d, std::size_t n, std::uint64_t seed, const std::string& out_path,
                     std::ostream& err);

}  // namespace sgdlab::cli
