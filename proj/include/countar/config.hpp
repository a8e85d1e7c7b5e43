#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "countar/errors.hpp"
#include "countar/models.hpp"

namespace countar {

enum class ExperimentKind { Check, Simulate, Couple, Moments };

std::string_view to_string(ExperimentKind kind) noexcept;

inline constexpr std::int64_t kDefaultSimulateT = 1000;
inline constexpr std::size_t kDefaultCoupleSteps = 200;
inline constexpr std::int64_t kDefaultMomentsT = 10000;

/// One model, one experiment, one seed.
struct ExperimentConfig {
    ModelSpec model;
    ExperimentKind kind = ExperimentKind::Check;

    // simulate and moments
    std::int64_t T = kDefaultSimulateT;
    std::int64_t burn_in = 1000;
    // couple and moments
    std::size_t replicates = 32;
    // couple
    std::size_t n = kDefaultCoupleSteps;
    /// Start windows, newest state first. Filled with defaults on parse.
    std::vector<CompositeState> window_a;
    std::vector<CompositeState> window_b;
    // moments
    std::vector<double> r_values;
    std::vector<double> delta_values;

    /// Verdicts that must hold for --strict to exit 0.
    std::vector<std::string> require{"stationarity"};

    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool csv = true;
};

struct ConfigIssue {
    /// JSON pointer to the offending value, e.g. "/model/A/0/1/0".
    std::string path;
    std::string message;
};

/// Malformed document.
class ParseError : public ConfigError {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed document describing an invalid experiment. Carries every
/// problem found, not just the first.
class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// Parses and validates a JSON config. Throws ParseError or ValidationError.
ExperimentConfig parse_config(std::string_view text);

/// Fully resolved config as JSON text (defaults written out). Parsing the
/// result gives back an equal config.
std::string serialize_config(const ExperimentConfig& config);

/// Verdict names the condition checker produces for the config's model.
std::vector<std::string> verdict_names(const ModelSpec& model);

}  // namespace countar
