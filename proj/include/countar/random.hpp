#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "countar/linalg.hpp"

namespace countar {

using Count = std::int64_t;
using CountVector = std::vector<Count>;

/// Largest intensity any sampler in the toolkit will materialize. Model steps
/// report a divergence before handing a larger value to a sampler.
inline constexpr double kMaxIntensity = 1e6;

/// Finalizer of SplitMix64 (Stafford's "Mix13"). Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed of (master_seed, replicate_id, time_index):
///
///     k = mix64(master_seed + G)
///     k = mix64(k ^ (replicate_id + 2G))
///     k = mix64(k ^ (time_index + 3G))
///
/// with G = 0x9E3779B97F4A7C15 and all arithmetic mod 2^64.
std::uint64_t stream_key(std::uint64_t master_seed, std::int64_t replicate_id,
                         std::int64_t time_index) noexcept;

struct Lineage {
    std::uint64_t master_seed = 0;
    std::int64_t replicate_id = 0;
    std::int64_t time_index = 0;

    friend bool operator==(const Lineage&, const Lineage&) = default;
};

/// Deterministic random stream (xoshiro256** seeded through SplitMix64).
/// Output depends only on the lineage, and on the tag path for substreams.
/// Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(Lineage lineage);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1), 53 bits.
    double uniform() noexcept;
    /// Unit-mean exponential, strictly positive.
    double exponential() noexcept;
    /// Standard normal (Box-Muller, one variate per call).
    double normal() noexcept;

    /// Independent child stream keyed by `tag`. Does not advance this stream
    /// and does not depend on how far it has been advanced.
    Stream substream(std::uint64_t tag) const;

    const Lineage& lineage() const noexcept { return lineage_; }
    std::uint64_t key() const noexcept { return key_; }

private:
    Stream(Lineage lineage, std::uint64_t key);

    Lineage lineage_;
    std::uint64_t key_;
    std::array<std::uint64_t, 4> state_{};
};

Stream make_stream(std::uint64_t master_seed, std::int64_t replicate_id, std::int64_t time_index);

/// Smallest k with P(X <= k) >= u for X ~ Poisson(lambda), by sequential
/// summation of the probabilities (in log space, so lambda up to
/// kMaxIntensity is usable). Throws NumericError past
/// lambda + 40 sqrt(lambda) + 50.
Count poisson_quantile(double lambda, double u);

/// Arrival times of a unit-rate Poisson process, materialized lazily.
struct PoissonProcessPath {
    std::vector<double> arrivals;

    /// Arrivals are known on [0, horizon]; 0 for an empty path.
    double horizon() const noexcept { return arrivals.empty() ? 0.0 : arrivals.back(); }
};

/// Number of arrivals in [0, lambda]. Extends the path with exponential
/// interarrivals drawn from `stream` until it runs past lambda; previously
/// materialized arrivals are never touched, so the count is monotone in
/// lambda on a fixed path.
Count path_count(PoissonProcessPath& path, double lambda, Stream& stream);

enum class SchemeKind { Independent, Comonotone, GaussianCopula };

/// Joint law of the p coordinate processes. Marginals are always unit-rate
/// Poisson; only the dependence varies.
class DependenceScheme {
public:
    static DependenceScheme independent();
    static DependenceScheme comonotone();
    /// Validates symmetry, unit diagonal and positive semidefiniteness, and
    /// factors the matrix. Throws DomainError when any check fails.
    static DependenceScheme gaussian_copula(Matrix correlation);

    SchemeKind kind() const noexcept { return kind_; }
    /// Only for GaussianCopula.
    const Matrix& correlation() const;
    const Matrix& factor() const;

    std::string_view name() const noexcept;

private:
    DependenceScheme() = default;

    SchemeKind kind_ = SchemeKind::Independent;
    std::optional<Matrix> correlation_;
    std::optional<Matrix> factor_;
};

/// One count vector with Poisson(lambdas[j]) marginals.
///   Independent:    one fresh path per coordinate.
///   Comonotone:     one uniform, pushed through every marginal quantile.
///   GaussianCopula: correlated normals -> normal CDF -> Poisson quantile.
CountVector sample_count_vector(std::span<const double> lambdas, const DependenceScheme& scheme,
                                Stream& stream);

/// The p coordinate processes N_1..N_p of one time step, shared between
/// coupled chains so that the same realization can be read at two
/// different intensities. Under Independent each coordinate has its own
/// path; under Comonotone every coordinate reads one path; under
/// GaussianCopula the k-th interarrival times of all coordinates are drawn
/// jointly from the copula.
class SharedPaths {
public:
    SharedPaths(std::size_t p, const DependenceScheme& scheme, const Stream& stream);

    Count count(std::size_t coordinate, double lambda);
    CountVector counts(std::span<const double> lambdas);

    std::size_t dimension() const noexcept { return p_; }
    const PoissonProcessPath& path(std::size_t coordinate) const;

private:
    void extend_jointly();

    std::size_t p_;
    DependenceScheme scheme_;
    std::vector<PoissonProcessPath> paths_;
    std::vector<Stream> streams_;
};

enum class CountingFamily { Bernoulli, Poisson, Geometric };

std::string_view to_string(CountingFamily family) noexcept;
std::optional<CountingFamily> counting_family_from_string(std::string_view name) noexcept;

/// One nonnegative integer with the given mean. Bernoulli requires mean <= 1
/// (ConfigError otherwise); Geometric is supported on {0, 1, 2, ...}.
Count sample_counting(CountingFamily family, double mean, Stream& stream);

struct CountingKey {
    std::int64_t t = 0;
    std::uint32_t lag = 0;  // j
    std::uint32_t row = 0;  // i
    std::uint32_t col = 0;  // l

    friend auto operator<=>(const CountingKey&, const CountingKey&) = default;
};

/// Lazily extended i.i.d. counting sequences Y_1, Y_2, ... per key. Each key
/// draws from its own substream, so the values do not depend on the order
/// in which keys are first touched and re-reading a prefix returns the same
/// numbers.
class CountingCache {
public:
    /// First `count` draws of the sequence at `key`.
    std::span<const Count> draws(const CountingKey& key, std::size_t count, CountingFamily family,
                                 double mean, const Stream& parent);

    std::size_t entry_count() const noexcept { return entries_.size(); }
    std::size_t total_draws() const noexcept;

private:
    struct Entry {
        Stream generator;
        std::vector<Count> values;
    };
    std::map<CountingKey, Entry> entries_;
};

/// A_{t,j} o x: coordinate i is sum_l sum_{s <= x_l} Y_s^{t,j,i,l} with
/// E Y = mean_matrix(i, l).
CountVector thinning(CountingCache& cache, std::int64_t t, std::uint32_t lag,
                     const Matrix& mean_matrix, CountingFamily family, std::span<const Count> x,
                     const Stream& stream);

}  // namespace countar
