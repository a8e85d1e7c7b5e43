#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "countar/linalg.hpp"
#include "countar/random.hpp"

namespace countar {

enum class ImmigrationFamily { Poisson, Geometric, Constant };

std::string_view to_string(ImmigrationFamily family) noexcept;

/// Law of the i.i.d. immigration vector U_t. Coordinates are independent;
/// `parameter` holds the means (Poisson, Geometric) or the fixed values
/// (Constant, which must be nonnegative integers).
struct Immigration {
    ImmigrationFamily family = ImmigrationFamily::Poisson;
    Vector parameter;
};

Vector immigration_mean(const Immigration& immigration);

/// U_t for the step whose noise stream is `step_stream`. Reads a dedicated
/// substream, so every caller holding the same step stream gets the same
/// vector.
CountVector sample_immigration(const Immigration& immigration, const Stream& step_stream);

/// X_t = sum_j A_j o X_{t-j} + U_t.
struct GinarSpec {
    std::size_t p = 1;
    std::size_t q = 1;
    std::vector<Matrix> mean_matrices;  // A_1..A_q
    CountingFamily counting_family = CountingFamily::Bernoulli;
    Immigration immigration;
};

/// Y_t = N^(t)(lambda_t), lambda_t = d + sum A_i lambda_{t-i} + sum B_i Y_{t-i}.
struct IngarchSpec {
    std::size_t p = 1;
    std::size_t q = 1;
    Vector d;
    std::vector<Matrix> lambda_matrices;  // A_1..A_q
    std::vector<Matrix> count_matrices;   // B_1..B_q
    DependenceScheme dependence = DependenceScheme::independent();
};

/// lambda_t = exp(mu_t), mu_t = d + sum A_j mu_{t-j} + sum B_j log(1 + Y_{t-j}).
/// Coefficients may be negative.
struct LogLinearSpec {
    std::size_t p = 1;
    std::size_t q = 1;
    Vector d;
    std::vector<Matrix> mu_matrices;        // A_1..A_q
    std::vector<Matrix> logcount_matrices;  // B_1..B_q
    DependenceScheme dependence = DependenceScheme::independent();
};

using ModelSpec = std::variant<GinarSpec, IngarchSpec, LogLinearSpec>;

std::string_view model_kind(const ModelSpec& model) noexcept;
std::size_t dimension(const ModelSpec& model) noexcept;
std::size_t order(const ModelSpec& model) noexcept;

/// Throws ConfigError describing the first violated invariant.
void validate(const GinarSpec& spec);
void validate(const IngarchSpec& spec);
void validate(const LogLinearSpec& spec);
void validate(const ModelSpec& model);

/// Log-linear intensities above exp(kMaxLogIntensity) are reported as a
/// divergence.
inline constexpr double kMaxLogIntensity = 700.0;

/// One element of the state window. `latent` is lambda for INGARCH, mu for
/// the log-linear model and the conditional mean for GINAR (informational
/// only; it does not feed the next step).
struct CompositeState {
    CountVector counts;
    Vector latent;

    friend bool operator==(const CompositeState&, const CompositeState&) = default;
};

/// The q most recent states, newest first: lag(1) is the state at t-1.
class StateWindow {
public:
    explicit StateWindow(std::vector<CompositeState> newest_first);

    std::size_t order() const noexcept { return states_.size(); }
    const CompositeState& lag(std::size_t j) const;
    /// Appends the newest state and drops the oldest.
    void push(CompositeState state);

    auto begin() const { return states_.begin(); }
    auto end() const { return states_.end(); }

    friend bool operator==(const StateWindow&, const StateWindow&) = default;

private:
    std::deque<CompositeState> states_;
};

/// All-zero counts with lambda = d (INGARCH), mu = 0 (log-linear).
StateWindow default_window(const ModelSpec& model);

/// Throws ConfigError if the window does not fit the model.
void check_window(const ModelSpec& model, const StateWindow& window);

/// Coordinates in which distances between states are measured: X for
/// GINAR, (Y, lambda) for INGARCH, (log(1 + Y), mu) for the log-linear model.
Vector composite_coordinates(const ModelSpec& model, const CompositeState& state);

/// l1 distance between two windows in composite coordinates.
double window_distance(const ModelSpec& model, const StateWindow& a, const StateWindow& b);

/// Source of the count vector of one step.
class CountSampler {
public:
    /// Fresh noise: sample_count_vector on `stream`.
    static CountSampler fresh(const DependenceScheme& scheme, const Stream& stream);
    /// Coupled noise: counts read from paths shared with another chain.
    static CountSampler shared(SharedPaths& paths);

    CountVector draw(std::span<const double> lambdas);

private:
    CountSampler(const DependenceScheme* scheme, std::optional<Stream> stream, SharedPaths* paths);

    const DependenceScheme* scheme_;
    std::optional<Stream> stream_;
    SharedPaths* paths_;
};

CountVector ginar_step(const GinarSpec& spec, const StateWindow& window, std::int64_t t,
                       CountingCache& cache, const Stream& stream);

/// E[X_t | window] = sum_j A_j X_{t-j} + E U.
Vector ginar_conditional_mean(const GinarSpec& spec, const StateWindow& window);

struct IngarchStep {
    CountVector counts;
    Vector lambda;
};

Vector ingarch_intensity(const IngarchSpec& spec, const StateWindow& window);

IngarchStep ingarch_step(const IngarchSpec& spec, const StateWindow& window, std::int64_t t,
                         CountSampler& sampler);

struct LogLinearStep {
    CountVector counts;
    Vector mu;
    Vector lambda;
};

Vector loglinear_mu(const LogLinearSpec& spec, const StateWindow& window);

LogLinearStep loglinear_step(const LogLinearSpec& spec, const StateWindow& window,
                             std::int64_t t, CountSampler& sampler);

/// Everything random about time step t.
struct NoiseContext {
    std::int64_t t = 0;
    Stream stream;
    /// Counting sequences for GINAR; a private cache is used when null.
    CountingCache* cache = nullptr;
    /// Shared paths for coupled INGARCH/log-linear runs; fresh sampling when
    /// null.
    SharedPaths* paths = nullptr;
};

/// The stacked random map: computes the state at time ctx.t from the window,
/// pushes it into the window and returns it.
CompositeState step(const ModelSpec& model, StateWindow& window, const NoiseContext& ctx);

}  // namespace countar
