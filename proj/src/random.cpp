#include "countar/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "countar/errors.hpp"

namespace countar {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t rotl(std::uint64_t x, int k) noexcept
{
    return (x << k) | (x >> (64 - k));
}

// Tag of a counting-sequence key; the fields are packed into disjoint bit
// ranges before mixing.
std::uint64_t counting_tag(const CountingKey& key) noexcept
{
    std::uint64_t h = mix64(static_cast<std::uint64_t>(key.t) + kGolden);
    const std::uint64_t packed = (static_cast<std::uint64_t>(key.lag) << 42) |
                                 (static_cast<std::uint64_t>(key.row) << 21) |
                                 static_cast<std::uint64_t>(key.col);
    return mix64(h ^ packed);
}

double normal_cdf(double z) noexcept
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

void check_intensity(double lambda, const char* op)
{
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw DomainError(std::string(op) + ": intensity must be finite and nonnegative, got " +
                          std::to_string(lambda));
    if (lambda > kMaxIntensity)
        throw NumericError(std::string(op) + ": intensity " + std::to_string(lambda) +
                           " exceeds the sampler cap");
}

void append_arrival(PoissonProcessPath& path, double gap)
{
    const double last = path.horizon();
    double next = last + gap;
    if (next <= last)
        next = std::nextafter(last, std::numeric_limits<double>::infinity());
    path.arrivals.push_back(next);
}

Count count_up_to(const PoissonProcessPath& path, double lambda)
{
    return std::upper_bound(path.arrivals.begin(), path.arrivals.end(), lambda) -
           path.arrivals.begin();
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t master_seed, std::int64_t replicate_id,
                         std::int64_t time_index) noexcept
{
    std::uint64_t k = mix64(master_seed + kGolden);
    k = mix64(k ^ (static_cast<std::uint64_t>(replicate_id) + 2 * kGolden));
    k = mix64(k ^ (static_cast<std::uint64_t>(time_index) + 3 * kGolden));
    return k;
}

Stream::Stream(Lineage lineage)
    : Stream(lineage, stream_key(lineage.master_seed, lineage.replicate_id, lineage.time_index))
{
}

Stream::Stream(Lineage lineage, std::uint64_t key) : lineage_(lineage), key_(key)
{
    // SplitMix64 sequence from the key fills the xoshiro state; it is never
    // all zero because mix64 is a bijection and the inputs differ.
    std::uint64_t x = key;
    for (auto& word : state_) {
        x += kGolden;
        word = mix64(x);
    }
}

Stream::result_type Stream::operator()() noexcept
{
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Stream::uniform() noexcept
{
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::exponential() noexcept
{
    return -std::log(uniform());
}

double Stream::normal() noexcept
{
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Stream Stream::substream(std::uint64_t tag) const
{
    return Stream(lineage_, mix64(key_ ^ mix64(tag ^ 0xD1B54A32D192ED03ULL)));
}

Stream make_stream(std::uint64_t master_seed, std::int64_t replicate_id, std::int64_t time_index)
{
    return Stream(Lineage{master_seed, replicate_id, time_index});
}

Count poisson_quantile(double lambda, double u)
{
    check_intensity(lambda, "poisson_quantile");
    if (lambda == 0.0)
        return 0;

    const double cap = lambda + 40.0 * std::sqrt(lambda) + 50.0;
    const double log_lambda = std::log(lambda);
    double log_p = -lambda;
    double cdf = std::exp(log_p);
    Count k = 0;
    while (cdf < u) {
        ++k;
        if (static_cast<double>(k) > cap)
            throw NumericError("poisson_quantile: summation passed lambda + 40 sqrt(lambda) + 50 "
                               "for lambda = " + std::to_string(lambda));
        log_p += log_lambda - std::log(static_cast<double>(k));
        const double next = cdf + std::exp(log_p);
        // Past the mode, a term that no longer moves the sum means the
        // remaining tail is below double resolution.
        if (static_cast<double>(k) > lambda && next == cdf)
            return k;
        cdf = next;
    }
    return k;
}

Count path_count(PoissonProcessPath& path, double lambda, Stream& stream)
{
    check_intensity(lambda, "path_count");
    if (lambda == 0.0)
        return 0;
    while (path.horizon() <= lambda)
        append_arrival(path, stream.exponential());
    return count_up_to(path, lambda);
}

DependenceScheme DependenceScheme::independent()
{
    return DependenceScheme();
}

DependenceScheme DependenceScheme::comonotone()
{
    DependenceScheme s;
    s.kind_ = SchemeKind::Comonotone;
    return s;
}

DependenceScheme DependenceScheme::gaussian_copula(Matrix correlation)
{
    if (!correlation.is_square())
        throw DomainError("gaussian copula: correlation matrix must be square");
    for (std::size_t i = 0; i < correlation.rows(); ++i) {
        if (std::abs(correlation(i, i) - 1.0) > 1e-12)
            throw DomainError("gaussian copula: correlation matrix must have unit diagonal");
        for (std::size_t j = 0; j < correlation.cols(); ++j)
            if (std::abs(correlation(i, j)) > 1.0 + 1e-12)
                throw DomainError("gaussian copula: correlations must lie in [-1, 1]");
    }
    Matrix factor = cholesky(correlation);  // throws DomainError if not symmetric PSD

    DependenceScheme s;
    s.kind_ = SchemeKind::GaussianCopula;
    s.correlation_ = std::move(correlation);
    s.factor_ = std::move(factor);
    return s;
}

const Matrix& DependenceScheme::correlation() const
{
    if (!correlation_)
        throw ConfigError("dependence scheme has no correlation matrix");
    return *correlation_;
}

const Matrix& DependenceScheme::factor() const
{
    if (!factor_)
        throw ConfigError("dependence scheme has no correlation matrix");
    return *factor_;
}

std::string_view DependenceScheme::name() const noexcept
{
    switch (kind_) {
    case SchemeKind::Independent:
        return "independent";
    case SchemeKind::Comonotone:
        return "comonotone";
    case SchemeKind::GaussianCopula:
        return "gaussian_copula";
    }
    return "unknown";
}

CountVector sample_count_vector(std::span<const double> lambdas, const DependenceScheme& scheme,
                                Stream& stream)
{
    const std::size_t p = lambdas.size();
    for (double l : lambdas)
        check_intensity(l, "sample_count_vector");

    CountVector out(p, 0);
    switch (scheme.kind()) {
    case SchemeKind::Independent: {
        // Per-call base tag so that successive calls on one stream differ.
        const std::uint64_t base = stream();
        for (std::size_t j = 0; j < p; ++j) {
            PoissonProcessPath path;
            Stream coordinate = stream.substream(mix64(base + j));
            out[j] = path_count(path, lambdas[j], coordinate);
        }
        break;
    }
    case SchemeKind::Comonotone: {
        const double u = stream.uniform();
        for (std::size_t j = 0; j < p; ++j)
            out[j] = poisson_quantile(lambdas[j], u);
        break;
    }
    case SchemeKind::GaussianCopula: {
        const Matrix& factor = scheme.factor();
        if (factor.rows() != p)
            throw DomainError("sample_count_vector: correlation matrix is " +
                              std::to_string(factor.rows()) + "x" + std::to_string(factor.rows()) +
                              " but there are " + std::to_string(p) + " intensities");
        Vector z(p);
        for (double& x : z)
            x = stream.normal();
        const Vector correlated = factor * z;
        for (std::size_t j = 0; j < p; ++j)
            out[j] = poisson_quantile(lambdas[j], normal_cdf(correlated[j]));
        break;
    }
    }
    return out;
}

SharedPaths::SharedPaths(std::size_t p, const DependenceScheme& scheme, const Stream& stream)
    : p_(p), scheme_(scheme)
{
    if (scheme.kind() == SchemeKind::GaussianCopula && scheme.factor().rows() != p)
        throw DomainError("SharedPaths: correlation matrix does not match the dimension");
    const std::size_t n_paths = scheme.kind() == SchemeKind::Comonotone ? 1 : p;
    const std::size_t n_streams = scheme.kind() == SchemeKind::Independent ? p : 1;
    paths_.resize(n_paths);
    streams_.reserve(n_streams);
    for (std::size_t j = 0; j < n_streams; ++j)
        streams_.push_back(stream.substream(j));
}

void SharedPaths::extend_jointly()
{
    Vector z(p_);
    for (double& x : z)
        x = streams_[0].normal();
    const Vector correlated = scheme_.factor() * z;
    for (std::size_t j = 0; j < p_; ++j) {
        const double u = std::max(normal_cdf(correlated[j]), std::numeric_limits<double>::min());
        append_arrival(paths_[j], -std::log(u));
    }
}

Count SharedPaths::count(std::size_t coordinate, double lambda)
{
    if (coordinate >= p_)
        throw DimensionError("SharedPaths: coordinate " + std::to_string(coordinate) +
                             " out of range");
    check_intensity(lambda, "SharedPaths::count");
    switch (scheme_.kind()) {
    case SchemeKind::Independent:
        return path_count(paths_[coordinate], lambda, streams_[coordinate]);
    case SchemeKind::Comonotone:
        return path_count(paths_[0], lambda, streams_[0]);
    case SchemeKind::GaussianCopula:
        if (lambda == 0.0)
            return 0;
        while (paths_[coordinate].horizon() <= lambda)
            extend_jointly();
        return count_up_to(paths_[coordinate], lambda);
    }
    return 0;
}

CountVector SharedPaths::counts(std::span<const double> lambdas)
{
    if (lambdas.size() != p_)
        throw DimensionError("SharedPaths: expected " + std::to_string(p_) + " intensities");
    CountVector out(p_);
    for (std::size_t j = 0; j < p_; ++j)
        out[j] = count(j, lambdas[j]);
    return out;
}

const PoissonProcessPath& SharedPaths::path(std::size_t coordinate) const
{
    if (coordinate >= p_)
        throw DimensionError("SharedPaths: coordinate out of range");
    return scheme_.kind() == SchemeKind::Comonotone ? paths_[0] : paths_[coordinate];
}

std::string_view to_string(CountingFamily family) noexcept
{
    switch (family) {
    case CountingFamily::Bernoulli:
        return "bernoulli";
    case CountingFamily::Poisson:
        return "poisson";
    case CountingFamily::Geometric:
        return "geometric";
    }
    return "unknown";
}

std::optional<CountingFamily> counting_family_from_string(std::string_view name) noexcept
{
    if (name == "bernoulli")
        return CountingFamily::Bernoulli;
    if (name == "poisson")
        return CountingFamily::Poisson;
    if (name == "geometric")
        return CountingFamily::Geometric;
    return std::nullopt;
}

Count sample_counting(CountingFamily family, double mean, Stream& stream)
{
    if (!std::isfinite(mean) || mean < 0.0)
        throw DomainError("counting sequence mean must be finite and nonnegative");
    switch (family) {
    case CountingFamily::Bernoulli:
        if (mean > 1.0)
            throw ConfigError("Bernoulli counting sequence needs mean <= 1, got " +
                              std::to_string(mean));
        return stream.uniform() < mean ? 1 : 0;
    case CountingFamily::Poisson:
        return poisson_quantile(mean, stream.uniform());
    case CountingFamily::Geometric: {
        if (mean == 0.0)
            return 0;
        // P(X >= k) = q^k with q = mean / (1 + mean).
        const double log_q = std::log(mean) - std::log1p(mean);
        return static_cast<Count>(std::floor(std::log(stream.uniform()) / log_q));
    }
    }
    return 0;
}

std::span<const Count> CountingCache::draws(const CountingKey& key, std::size_t count,
                                            CountingFamily family, double mean,
                                            const Stream& parent)
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        it = entries_.emplace(key, Entry{parent.substream(counting_tag(key)), {}}).first;
    Entry& entry = it->second;
    entry.values.reserve(count);
    while (entry.values.size() < count)
        entry.values.push_back(sample_counting(family, mean, entry.generator));
    return std::span<const Count>(entry.values.data(), count);
}

std::size_t CountingCache::total_draws() const noexcept
{
    std::size_t n = 0;
    for (const auto& [key, entry] : entries_)
        n += entry.values.size();
    return n;
}

CountVector thinning(CountingCache& cache, std::int64_t t, std::uint32_t lag,
                     const Matrix& mean_matrix, CountingFamily family, std::span<const Count> x,
                     const Stream& stream)
{
    const std::size_t p = x.size();
    if (!mean_matrix.is_square() || mean_matrix.rows() != p)
        throw DimensionError("thinning: mean matrix must be " + std::to_string(p) + "x" +
                             std::to_string(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t l = 0; l < p; ++l) {
            const double m = mean_matrix(i, l);
            if (m < 0.0)
                throw ConfigError("thinning: negative mean at (" + std::to_string(i) + ", " +
                                  std::to_string(l) + ")");
            if (family == CountingFamily::Bernoulli && m > 1.0)
                throw ConfigError("thinning: Bernoulli mean " + std::to_string(m) + " at (" +
                                  std::to_string(i) + ", " + std::to_string(l) + ") exceeds 1");
        }
    for (Count v : x)
        if (v < 0)
            throw DomainError("thinning: counts must be nonnegative");

    CountVector out(p, 0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t l = 0; l < p; ++l) {
            const double m = mean_matrix(i, l);
            if (x[l] == 0 || m == 0.0)
                continue;
            const CountingKey key{t, lag, static_cast<std::uint32_t>(i),
                                  static_cast<std::uint32_t>(l)};
            for (Count y : cache.draws(key, static_cast<std::size_t>(x[l]), family, m, stream))
                out[i] += y;
        }
    return out;
}

}  // namespace countar
