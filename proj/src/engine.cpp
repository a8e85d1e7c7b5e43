#include "countar/engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "countar/errors.hpp"

namespace countar {

namespace {

constexpr std::uint64_t kPathsTag = 0x5041544853484152ULL;
constexpr std::size_t kBatchesPerReplicate = 32;

// Runs task(i) for i in [0, n) on up to `jobs` threads. Exceptions are
// collected per index and the one with the smallest index is rethrown, so
// the outcome does not depend on scheduling.
void for_each_index(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task)
{
    std::vector<std::exception_ptr> errors(n);
    auto guarded = [&](std::size_t i) {
        try {
            task(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            guarded(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++)
                    guarded(i);
            });
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

Vector intensity_of(const ModelSpec& model, const CompositeState& state)
{
    if (std::holds_alternative<LogLinearSpec>(model)) {
        Vector out(state.latent.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = std::exp(state.latent[i]);
        return out;
    }
    return state.latent;
}

void append_number(std::string& out, double x)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, end);
}

void append_number(std::string& out, std::int64_t x)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, end);
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1)
        return v[mid];
    if (std::isinf(v[mid - 1]) || std::isinf(v[mid]))
        return v[mid - 1] == v[mid] ? v[mid] : std::numeric_limits<double>::infinity();
    return 0.5 * (v[mid - 1] + v[mid]);
}

std::vector<CompositeState> states_of(const StateWindow& w)
{
    return std::vector<CompositeState>(w.begin(), w.end());
}

// Replicate r of couple(): distance after each of n steps; +inf from the
// first divergence on.
std::vector<double> coupled_run(const ModelSpec& model, std::size_t n, StateWindow a,
                                StateWindow b, std::uint64_t seed, std::int64_t replicate,
                                bool& diverged)
{
    std::vector<double> out(n, std::numeric_limits<double>::infinity());
    diverged = false;
    const std::size_t p = dimension(model);
    const DependenceScheme* scheme = nullptr;
    if (const auto* s = std::get_if<IngarchSpec>(&model))
        scheme = &s->dependence;
    else if (const auto* s = std::get_if<LogLinearSpec>(&model))
        scheme = &s->dependence;

    try {
        for (std::size_t k = 1; k <= n; ++k) {
            const auto t = static_cast<std::int64_t>(k);
            const Stream stream = make_stream(seed, replicate, t);
            CountingCache cache;
            std::optional<SharedPaths> paths;
            if (scheme != nullptr)
                paths.emplace(p, *scheme, stream.substream(kPathsTag));
            const NoiseContext ctx{t, stream, &cache, paths ? &*paths : nullptr};
            step(model, a, ctx);
            step(model, b, ctx);
            out[k - 1] = window_distance(model, a, b);
        }
    } catch (const DivergenceError&) {
        diverged = true;
    } catch (const NumericError&) {
        diverged = true;
    }
    return out;
}

std::vector<std::vector<double>> batch(const std::vector<double>& values, std::size_t batches)
{
    batches = std::max<std::size_t>(1, std::min(batches, values.size()));
    std::vector<std::vector<double>> out(batches);
    const std::size_t n = values.size();
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        out[b].assign(values.begin() + static_cast<std::ptrdiff_t>(lo),
                      values.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return out;
}

double standard_error_of(const std::vector<double>& batch_means)
{
    const std::size_t k = batch_means.size();
    if (k < 2)
        return 0.0;
    const double m = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) /
                     static_cast<double>(k);
    double ss = 0.0;
    for (double x : batch_means)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
}

}  // namespace

Vector SamplePath::mean_counts() const
{
    Vector m(p, 0.0);
    for (const CountVector& row : counts)
        for (std::size_t i = 0; i < p; ++i)
            m[i] += static_cast<double>(row[i]);
    if (!counts.empty())
        for (double& x : m)
            x /= static_cast<double>(counts.size());
    return m;
}

SamplePath simulate(const ModelSpec& model, std::int64_t T, std::int64_t burn_in,
                    std::uint64_t master_seed, std::int64_t replicate_id)
{
    if (T < 1)
        throw DomainError("simulate: T must be at least 1");
    if (burn_in < 0)
        throw DomainError("simulate: burn_in must be nonnegative");
    validate(model);

    SamplePath path;
    path.p = dimension(model);
    path.burn_in = burn_in;
    path.master_seed = master_seed;
    path.replicate_id = replicate_id;
    path.counts.reserve(static_cast<std::size_t>(T));
    path.intensities.reserve(static_cast<std::size_t>(T));

    StateWindow window = default_window(model);
    for (std::int64_t t = 1; t <= T + burn_in; ++t) {
        const NoiseContext ctx{t, make_stream(master_seed, replicate_id, t), nullptr, nullptr};
        CompositeState s = step(model, window, ctx);
        if (t > burn_in) {
            path.intensities.push_back(intensity_of(model, s));
            path.counts.push_back(std::move(s.counts));
        }
    }
    return path;
}

void write_csv(const SamplePath& path, std::ostream& out)
{
    out << to_csv(path);
}

std::string to_csv(const SamplePath& path)
{
    std::string out = "t";
    for (std::size_t i = 1; i <= path.p; ++i)
        out += ",y_" + std::to_string(i);
    for (std::size_t i = 1; i <= path.p; ++i)
        out += ",lambda_" + std::to_string(i);
    out += '\n';
    for (std::size_t k = 0; k < path.length(); ++k) {
        append_number(out, static_cast<std::int64_t>(k + 1));
        for (Count c : path.counts[k]) {
            out += ',';
            append_number(out, static_cast<std::int64_t>(c));
        }
        for (double l : path.intensities[k]) {
            out += ',';
            append_number(out, l);
        }
        out += '\n';
    }
    return out;
}

std::string_view to_string(RateStatus status) noexcept
{
    switch (status) {
    case RateStatus::Fitted:
        return "fitted";
    case RateStatus::NoDecay:
        return "no-decay";
    case RateStatus::DegenerateEqual:
        return "degenerate-equal";
    case RateStatus::Coalesced:
        return "coalesced";
    case RateStatus::Diverged:
        return "diverged";
    }
    return "unknown";
}

bool fit_log_rate(std::span<const double> distances, std::size_t start, std::size_t end,
                  double& rate, std::size_t& used_end)
{
    std::vector<double> xs, ys;
    used_end = start > 0 ? start - 1 : 0;
    for (std::size_t k = std::max<std::size_t>(start, 1); k <= end && k <= distances.size(); ++k) {
        const double d = distances[k - 1];
        if (!(d > 0.0) || !std::isfinite(d))
            break;
        xs.push_back(static_cast<double>(k));
        ys.push_back(std::log(d));
        used_end = k;
    }
    if (xs.size() < 2)
        return false;
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    rate = std::exp(sxy / sxx);
    return true;
}

CouplingReport couple(const ModelSpec& model, std::size_t n, const StateWindow& window_a,
                      const StateWindow& window_b, std::uint64_t master_seed,
                      std::size_t replicates, std::size_t jobs)
{
    if (n < 10)
        throw DomainError("couple: n must be at least 10");
    if (replicates < 1)
        throw DomainError("couple: need at least one replicate");
    validate(model);
    check_window(model, window_a);
    check_window(model, window_b);

    CouplingReport report;
    report.initial_a = states_of(window_a);
    report.initial_b = states_of(window_b);
    report.master_seed = master_seed;
    report.replicates = replicates;
    report.initial_distance = window_distance(model, window_a, window_b);

    std::vector<std::vector<double>> runs(replicates);
    std::vector<char> diverged(replicates, 0);
    for_each_index(replicates, jobs, [&](std::size_t r) {
        bool d = false;
        runs[r] = coupled_run(model, n, window_a, window_b, master_seed,
                              static_cast<std::int64_t>(r), d);
        diverged[r] = d ? 1 : 0;
    });

    report.distances.assign(n, 0.0);
    for (std::size_t r = 0; r < replicates; ++r) {
        for (std::size_t k = 0; k < n; ++k)
            report.distances[k] += runs[r][k];
        report.final_distances.push_back(runs[r].back());
        report.diverged_replicates += diverged[r];
    }
    for (double& d : report.distances)
        d /= static_cast<double>(replicates);
    report.median_final_distance = median(report.final_distances);

    if (report.initial_distance == 0.0) {
        report.status = RateStatus::DegenerateEqual;
        return report;
    }

    const std::size_t start = std::max<std::size_t>(1, n / 4);
    double rate = 0.0;
    std::size_t used_end = 0;
    if (fit_log_rate(report.distances, start, n, rate, used_end)) {
        report.fitted_rate = rate;
        report.fit_start = start;
        report.fit_end = used_end;
        report.status = rate < 1.0 ? RateStatus::Fitted : RateStatus::NoDecay;
    } else if (report.diverged_replicates > 0) {
        report.status = RateStatus::Diverged;
    } else {
        // Exact coalescence before (or right at) the tail window: fit the
        // decay that happened from the first step instead.
        report.status = RateStatus::Coalesced;
        report.fit_start = 1;
        if (fit_log_rate(report.distances, 1, n, rate, used_end)) {
            report.fitted_rate = std::min(rate, 1.0);
            report.fit_end = used_end;
        } else {
            report.fitted_rate = 0.0;
            report.fit_end = 1;
        }
    }
    if (report.diverged_replicates > 0)
        report.status = RateStatus::Diverged;
    return report;
}

PolynomialMoment estimate_polynomial(std::span<const std::vector<double>> batches, double r)
{
    PolynomialMoment out;
    out.r = r;
    double total = 0.0;
    std::size_t count = 0;
    std::vector<double> means;
    means.reserve(batches.size());
    for (const auto& b : batches) {
        if (b.empty())
            continue;
        double s = 0.0;
        for (double x : b)
            s += std::pow(x, r);
        total += s;
        count += b.size();
        means.push_back(s / static_cast<double>(b.size()));
    }
    if (count == 0)
        throw DomainError("estimate_polynomial: empty sample");
    out.estimate = total / static_cast<double>(count);
    out.std_error = standard_error_of(means);
    return out;
}

ExponentialMoment estimate_exponential(std::span<const std::vector<double>> batches, double delta)
{
    ExponentialMoment out;
    out.delta = delta;
    double shift = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    for (const auto& b : batches)
        for (double x : b) {
            shift = std::max(shift, delta * x);
            ++count;
        }
    if (count == 0)
        throw DomainError("estimate_exponential: empty sample");

    double total = 0.0;
    std::vector<double> means;
    std::vector<double> weights;
    weights.reserve(count);
    for (const auto& b : batches) {
        if (b.empty())
            continue;
        double s = 0.0;
        for (double x : b) {
            const double w = std::exp(delta * x - shift);
            s += w;
            weights.push_back(w);
        }
        total += s;
        means.push_back(s / static_cast<double>(b.size()));
    }
    const double mean_w = total / static_cast<double>(count);
    out.log_estimate = shift + std::log(mean_w);
    out.std_error = standard_error_of(means) / mean_w;

    const std::size_t top = std::min<std::size_t>(10, weights.size());
    std::partial_sort(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(top),
                      weights.end(), std::greater<>());
    const double top_sum = std::accumulate(weights.begin(),
                                           weights.begin() + static_cast<std::ptrdiff_t>(top), 0.0);
    out.top10_share = top_sum / total;
    out.saturated = out.top10_share > kSaturationShare;
    return out;
}

MomentReport monte_carlo_moments(const ModelSpec& model, std::span<const double> r_values,
                                 std::span<const double> delta_values, std::int64_t T,
                                 std::int64_t burn_in, std::size_t replicates,
                                 std::uint64_t master_seed, std::size_t jobs)
{
    if (r_values.empty() && delta_values.empty())
        throw DomainError("monte_carlo_moments: nothing to estimate");
    for (double r : r_values)
        if (!(r >= 1.0) || !std::isfinite(r))
            throw DomainError("monte_carlo_moments: polynomial orders must be >= 1");
    for (double d : delta_values)
        if (!(d > 0.0) || !std::isfinite(d))
            throw DomainError("monte_carlo_moments: exponential rates must be > 0");
    if (replicates < 1)
        throw DomainError("monte_carlo_moments: need at least one replicate");

    std::vector<std::vector<double>> totals(replicates);
    for_each_index(replicates, jobs, [&](std::size_t r) {
        const SamplePath path =
            simulate(model, T, burn_in, master_seed, static_cast<std::int64_t>(r));
        std::vector<double>& out = totals[r];
        out.reserve(path.length());
        for (const CountVector& row : path.counts)
            out.push_back(static_cast<double>(std::accumulate(row.begin(), row.end(), Count{0})));
    });

    std::vector<std::vector<double>> batches;
    for (const auto& replicate : totals)
        for (auto& b : batch(replicate, kBatchesPerReplicate))
            batches.push_back(std::move(b));

    MomentReport report;
    report.T = T;
    report.burn_in = burn_in;
    report.replicates = replicates;
    report.master_seed = master_seed;
    report.sample_size = static_cast<std::size_t>(T) * replicates;
    for (double r : r_values)
        report.polynomial.push_back(estimate_polynomial(batches, r));
    for (double d : delta_values)
        report.exponential.push_back(estimate_exponential(batches, d));
    return report;
}

std::size_t default_jobs() noexcept
{
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

}  // namespace countar
