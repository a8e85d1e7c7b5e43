#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "countar/analysis.hpp"
#include "countar/config.hpp"
#include "countar/engine.hpp"

namespace countar {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitRuntimeError = 1, kExitConditionFails = 2 };

struct RunOptions {
    /// Experiment requested on the command line. `check` is accepted for any
    /// config; the other kinds must match experiment.kind.
    std::optional<ExperimentKind> command;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::size_t jobs = 1;
    /// Skip the experiment and exit 2 if a required verdict does not hold.
    bool strict = false;
};

/// Runs one experiment: writes <dir>/report.json (and <dir>/path.csv for
/// simulate), prints a summary to `out` and diagnostics to `err`, and
/// returns the exit code.
int run(const ExperimentConfig& config, const RunOptions& options, std::ostream& out,
        std::ostream& err);

/// Reads the config file and runs it; parse and validation problems go to
/// `err` and give exit code 1.
int run_file(const std::string& path, const RunOptions& options, std::ostream& out,
             std::ostream& err);

/// Human-readable condition table.
void print_conditions(const ConditionReport& report, std::ostream& out);

}  // namespace countar
