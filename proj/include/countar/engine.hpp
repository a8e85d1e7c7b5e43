#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "countar/models.hpp"

namespace countar {

inline constexpr std::int64_t kDefaultBurnIn = 1000;
inline constexpr std::size_t kDefaultReplicates = 32;

/// Post-burn-in trajectory. Row k holds time t = k + 1.
struct SamplePath {
    std::size_t p = 0;
    std::int64_t burn_in = 0;
    std::uint64_t master_seed = 0;
    std::int64_t replicate_id = 0;
    std::vector<CountVector> counts;
    /// lambda for INGARCH and log-linear, E[X_t | past] for GINAR.
    std::vector<Vector> intensities;

    std::size_t length() const noexcept { return counts.size(); }
    /// Per-coordinate time average of the counts.
    Vector mean_counts() const;

    friend bool operator==(const SamplePath&, const SamplePath&) = default;
};

/// Iterates the model T + burn_in times from the default window, with the
/// noise of step t drawn from make_stream(master_seed, replicate_id, t), and
/// keeps the last T states.
SamplePath simulate(const ModelSpec& model, std::int64_t T, std::int64_t burn_in,
                    std::uint64_t master_seed, std::int64_t replicate_id = 0);

/// CSV with header `t,y_1..y_p,lambda_1..lambda_p`, '.' decimals and LF line
/// endings. Reals use the shortest representation that round-trips.
void write_csv(const SamplePath& path, std::ostream& out);
std::string to_csv(const SamplePath& path);

enum class RateStatus {
    Fitted,           // OLS fit over the tail window
    NoDecay,          // fitted slope is not negative
    DegenerateEqual,  // both chains start in the same state
    Coalesced,        // chains merged exactly before the tail window
    Diverged,         // at least one replicate left the representable range
};

std::string_view to_string(RateStatus status) noexcept;

struct CouplingReport {
    /// Replicate-averaged l1 distance after steps 1..n (+inf once any
    /// replicate diverged).
    std::vector<double> distances;
    double initial_distance = 0.0;
    RateStatus status = RateStatus::Fitted;
    /// exp(slope) of log-distance against step; NaN when not fitted.
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    /// Steps (1-based, inclusive) used by the fit.
    std::size_t fit_start = 0;
    std::size_t fit_end = 0;
    /// Start windows, newest state first.
    std::vector<CompositeState> initial_a;
    std::vector<CompositeState> initial_b;
    std::uint64_t master_seed = 0;
    std::size_t replicates = 0;
    /// Distance after step n for each replicate, in replicate order.
    std::vector<double> final_distances;
    double median_final_distance = 0.0;
    std::size_t diverged_replicates = 0;

    friend bool operator==(const CouplingReport&, const CouplingReport&) = default;
};

/// Runs pairs of chains from window_a and window_b that share all noise at
/// every step: the same Poisson process paths read at each chain's own
/// intensity, the same counting sequences, the same immigration. Replicate r
/// uses make_stream(master_seed, r, t) at step t. The n-step forward run
/// with frozen shared noise stands in for the backward iteration, which has
/// the same law for i.i.d. noise.
///
/// The rate is fitted by least squares on log distance over steps
/// [n/4, n]; an exact zero or a non-finite distance ends the fit window.
CouplingReport couple(const ModelSpec& model, std::size_t n, const StateWindow& window_a,
                      const StateWindow& window_b, std::uint64_t master_seed,
                      std::size_t replicates = 1, std::size_t jobs = 1);

/// Least-squares fit of log(distance) against step over [start, end]
/// (1-based); stops at the first non-positive or non-finite distance.
/// Returns false if fewer than two points are usable.
bool fit_log_rate(std::span<const double> distances, std::size_t start, std::size_t end,
                  double& rate, std::size_t& used_end);

struct PolynomialMoment {
    double r = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;

    friend bool operator==(const PolynomialMoment&, const PolynomialMoment&) = default;
};

/// If the ten largest terms carry more than this share of the sum, the
/// exponential-moment estimate is flagged as saturated.
inline constexpr double kSaturationShare = 0.5;

struct ExponentialMoment {
    double delta = 0.0;
    /// log of the sample mean of exp(delta |Y|_1), computed by log-sum-exp.
    double log_estimate = 0.0;
    /// Standard error on the log scale (delta method).
    double std_error = 0.0;
    double top10_share = 0.0;
    bool saturated = false;

    friend bool operator==(const ExponentialMoment&, const ExponentialMoment&) = default;
};

/// Monte Carlo moments of |Y_t|_1 pooled over replicates. Standard errors
/// use batch means (up to 32 contiguous batches per replicate) so that
/// serial correlation within a path is accounted for.
struct MomentReport {
    std::vector<PolynomialMoment> polynomial;
    std::vector<ExponentialMoment> exponential;
    std::size_t sample_size = 0;
    std::int64_t T = 0;
    std::int64_t burn_in = 0;
    std::size_t replicates = 0;
    std::uint64_t master_seed = 0;

    friend bool operator==(const MomentReport&, const MomentReport&) = default;
};

MomentReport monte_carlo_moments(const ModelSpec& model, std::span<const double> r_values,
                                 std::span<const double> delta_values, std::int64_t T,
                                 std::int64_t burn_in, std::size_t replicates,
                                 std::uint64_t master_seed, std::size_t jobs = 1);

/// Estimates from an explicit sample of |Y|_1 values grouped in batches
/// (exposed for testing the estimators on known distributions).
PolynomialMoment estimate_polynomial(std::span<const std::vector<double>> batches, double r);
ExponentialMoment estimate_exponential(std::span<const std::vector<double>> batches, double delta);

/// Number of worker threads to use when the caller does not say.
std::size_t default_jobs() noexcept;

}  // namespace countar
