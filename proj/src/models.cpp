#include "countar/models.hpp"

#include <cmath>
#include <string>

#include "countar/errors.hpp"

namespace countar {

namespace {

constexpr std::uint64_t kImmigrationTag = 0x494D4D4947524154ULL;
constexpr std::uint64_t kCountTag = 0x434F554E54535452ULL;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_lag_matrices(const std::vector<Matrix>& ms, std::size_t p, std::size_t q,
                        const char* name, bool nonnegative)
{
    if (ms.size() != q)
        throw ConfigError(std::string(name) + ": expected " + std::to_string(q) +
                          " matrices, got " + std::to_string(ms.size()));
    for (std::size_t k = 0; k < q; ++k) {
        const Matrix& m = ms[k];
        if (m.rows() != p || m.cols() != p)
            throw ConfigError(std::string(name) + "[" + std::to_string(k) + "] must be " +
                              std::to_string(p) + "x" + std::to_string(p));
        if (nonnegative && !m.all_nonnegative())
            throw ConfigError(std::string(name) + "[" + std::to_string(k) +
                              "] must have nonnegative entries");
    }
}

void check_vector(const Vector& v, std::size_t p, const char* name, bool nonnegative)
{
    if (v.size() != p)
        throw ConfigError(std::string(name) + ": expected length " + std::to_string(p) +
                          ", got " + std::to_string(v.size()));
    for (double x : v) {
        if (!std::isfinite(x))
            throw ConfigError(std::string(name) + ": entries must be finite");
        if (nonnegative && x < 0.0)
            throw ConfigError(std::string(name) + ": entries must be nonnegative");
    }
}

void check_dimension(std::size_t p, std::size_t q)
{
    if (p == 0 || q == 0)
        throw ConfigError("dimension p and order q must be at least 1");
}

void check_scheme(const DependenceScheme& scheme, std::size_t p)
{
    if (scheme.kind() == SchemeKind::GaussianCopula && scheme.correlation().rows() != p)
        throw ConfigError("correlation matrix must be " + std::to_string(p) + "x" +
                          std::to_string(p));
}

void check_counts_finite(const CountVector& counts, std::int64_t t)
{
    for (Count c : counts)
        if (static_cast<double>(c) > kMaxIntensity)
            throw DivergenceError(t, "count " + std::to_string(c) + " exceeds " +
                                         std::to_string(kMaxIntensity));
}

void add_product(Vector& acc, const Matrix& m, const CountVector& x)
{
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            acc[i] += m(i, j) * static_cast<double>(x[j]);
}

void add_product(Vector& acc, const Matrix& m, const Vector& x)
{
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            acc[i] += m(i, j) * x[j];
}

}  // namespace

std::string_view to_string(ImmigrationFamily family) noexcept
{
    switch (family) {
    case ImmigrationFamily::Poisson:
        return "poisson";
    case ImmigrationFamily::Geometric:
        return "geometric";
    case ImmigrationFamily::Constant:
        return "constant";
    }
    return "unknown";
}

Vector immigration_mean(const Immigration& immigration)
{
    return immigration.parameter;
}

CountVector sample_immigration(const Immigration& immigration, const Stream& step_stream)
{
    Stream s = step_stream.substream(kImmigrationTag);
    CountVector u(immigration.parameter.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double param = immigration.parameter[i];
        switch (immigration.family) {
        case ImmigrationFamily::Poisson:
            u[i] = sample_counting(CountingFamily::Poisson, param, s);
            break;
        case ImmigrationFamily::Geometric:
            u[i] = sample_counting(CountingFamily::Geometric, param, s);
            break;
        case ImmigrationFamily::Constant:
            u[i] = static_cast<Count>(param);
            break;
        }
    }
    return u;
}

std::string_view model_kind(const ModelSpec& model) noexcept
{
    return std::visit(overloaded{[](const GinarSpec&) { return std::string_view("ginar"); },
                                 [](const IngarchSpec&) { return std::string_view("ingarch"); },
                                 [](const LogLinearSpec&) { return std::string_view("loglinear"); }},
                      model);
}

std::size_t dimension(const ModelSpec& model) noexcept
{
    return std::visit([](const auto& s) { return s.p; }, model);
}

std::size_t order(const ModelSpec& model) noexcept
{
    return std::visit([](const auto& s) { return s.q; }, model);
}

void validate(const GinarSpec& spec)
{
    check_dimension(spec.p, spec.q);
    check_lag_matrices(spec.mean_matrices, spec.p, spec.q, "A", true);
    if (spec.counting_family == CountingFamily::Bernoulli)
        for (std::size_t k = 0; k < spec.q; ++k)
            for (double x : spec.mean_matrices[k].entries())
                if (x > 1.0)
                    throw ConfigError("A[" + std::to_string(k) +
                                      "]: Bernoulli counting sequences need means <= 1");
    check_vector(spec.immigration.parameter, spec.p, "immigration", true);
    if (spec.immigration.family == ImmigrationFamily::Constant)
        for (double x : spec.immigration.parameter)
            if (x != std::floor(x))
                throw ConfigError("immigration: constant values must be integers");
}

void validate(const IngarchSpec& spec)
{
    check_dimension(spec.p, spec.q);
    check_vector(spec.d, spec.p, "d", true);
    check_lag_matrices(spec.lambda_matrices, spec.p, spec.q, "A", true);
    check_lag_matrices(spec.count_matrices, spec.p, spec.q, "B", true);
    check_scheme(spec.dependence, spec.p);
}

void validate(const LogLinearSpec& spec)
{
    check_dimension(spec.p, spec.q);
    check_vector(spec.d, spec.p, "d", false);
    check_lag_matrices(spec.mu_matrices, spec.p, spec.q, "A", false);
    check_lag_matrices(spec.logcount_matrices, spec.p, spec.q, "B", false);
    check_scheme(spec.dependence, spec.p);
}

void validate(const ModelSpec& model)
{
    std::visit([](const auto& s) { validate(s); }, model);
}

StateWindow::StateWindow(std::vector<CompositeState> newest_first)
    : states_(newest_first.begin(), newest_first.end())
{
    if (states_.empty())
        throw ConfigError("state window must hold at least one state");
}

const CompositeState& StateWindow::lag(std::size_t j) const
{
    if (j == 0 || j > states_.size())
        throw DomainError("lag " + std::to_string(j) + " outside window of order " +
                          std::to_string(states_.size()));
    return states_[j - 1];
}

void StateWindow::push(CompositeState state)
{
    states_.push_front(std::move(state));
    states_.pop_back();
}

StateWindow default_window(const ModelSpec& model)
{
    const std::size_t p = dimension(model);
    CompositeState zero{CountVector(p, 0), Vector(p, 0.0)};
    std::visit(overloaded{[&](const GinarSpec& s) {
                              zero.latent = immigration_mean(s.immigration);
                          },
                          [&](const IngarchSpec& s) { zero.latent = s.d; },
                          [](const LogLinearSpec&) {}},
               model);
    return StateWindow(std::vector<CompositeState>(order(model), zero));
}

void check_window(const ModelSpec& model, const StateWindow& window)
{
    const std::size_t p = dimension(model);
    if (window.order() != order(model))
        throw ConfigError("window has " + std::to_string(window.order()) +
                          " states, model order is " + std::to_string(order(model)));
    const bool has_latent = !std::holds_alternative<GinarSpec>(model);
    const bool latent_nonnegative = std::holds_alternative<IngarchSpec>(model);
    std::size_t k = 0;
    for (const CompositeState& s : window) {
        const std::string where = "window state " + std::to_string(k++);
        if (s.counts.size() != p)
            throw ConfigError(where + ": expected " + std::to_string(p) + " counts");
        for (Count c : s.counts)
            if (c < 0)
                throw ConfigError(where + ": counts must be nonnegative");
        if (!has_latent)
            continue;
        if (s.latent.size() != p)
            throw ConfigError(where + ": expected " + std::to_string(p) + " latent values");
        for (double x : s.latent) {
            if (!std::isfinite(x))
                throw ConfigError(where + ": latent values must be finite");
            if (latent_nonnegative && x < 0.0)
                throw ConfigError(where + ": intensities must be nonnegative");
        }
    }
}

Vector composite_coordinates(const ModelSpec& model, const CompositeState& state)
{
    Vector out;
    out.reserve(2 * state.counts.size());
    const bool log_counts = std::holds_alternative<LogLinearSpec>(model);
    for (Count c : state.counts)
        out.push_back(log_counts ? std::log1p(static_cast<double>(c)) : static_cast<double>(c));
    if (!std::holds_alternative<GinarSpec>(model))
        out.insert(out.end(), state.latent.begin(), state.latent.end());
    return out;
}

double window_distance(const ModelSpec& model, const StateWindow& a, const StateWindow& b)
{
    if (a.order() != b.order())
        throw ConfigError("window_distance: windows have different orders");
    double total = 0.0;
    for (std::size_t j = 1; j <= a.order(); ++j) {
        const Vector ca = composite_coordinates(model, a.lag(j));
        const Vector cb = composite_coordinates(model, b.lag(j));
        if (ca.size() != cb.size())
            throw ConfigError("window_distance: states have different shapes");
        for (std::size_t i = 0; i < ca.size(); ++i)
            total += std::abs(ca[i] - cb[i]);
    }
    return total;
}

CountSampler::CountSampler(const DependenceScheme* scheme, std::optional<Stream> stream,
                           SharedPaths* paths)
    : scheme_(scheme), stream_(std::move(stream)), paths_(paths)
{
}

CountSampler CountSampler::fresh(const DependenceScheme& scheme, const Stream& stream)
{
    return CountSampler(&scheme, stream, nullptr);
}

CountSampler CountSampler::shared(SharedPaths& paths)
{
    return CountSampler(nullptr, std::nullopt, &paths);
}

CountVector CountSampler::draw(std::span<const double> lambdas)
{
    if (paths_ != nullptr)
        return paths_->counts(lambdas);
    return sample_count_vector(lambdas, *scheme_, *stream_);
}

CountVector ginar_step(const GinarSpec& spec, const StateWindow& window, std::int64_t t,
                       CountingCache& cache, const Stream& stream)
{
    if (window.order() != spec.q)
        throw ConfigError("ginar_step: window order does not match q");
    CountVector x = sample_immigration(spec.immigration, stream);
    for (std::size_t j = 1; j <= spec.q; ++j) {
        const CountVector thinned =
            thinning(cache, t, static_cast<std::uint32_t>(j), spec.mean_matrices[j - 1],
                     spec.counting_family, window.lag(j).counts, stream);
        for (std::size_t i = 0; i < spec.p; ++i)
            x[i] += thinned[i];
    }
    check_counts_finite(x, t);
    return x;
}

Vector ginar_conditional_mean(const GinarSpec& spec, const StateWindow& window)
{
    Vector m = immigration_mean(spec.immigration);
    for (std::size_t j = 1; j <= spec.q; ++j)
        add_product(m, spec.mean_matrices[j - 1], window.lag(j).counts);
    return m;
}

Vector ingarch_intensity(const IngarchSpec& spec, const StateWindow& window)
{
    if (window.order() != spec.q)
        throw ConfigError("ingarch: window order does not match q");
    Vector lambda = spec.d;
    for (std::size_t i = 1; i <= spec.q; ++i) {
        add_product(lambda, spec.lambda_matrices[i - 1], window.lag(i).latent);
        add_product(lambda, spec.count_matrices[i - 1], window.lag(i).counts);
    }
    return lambda;
}

IngarchStep ingarch_step(const IngarchSpec& spec, const StateWindow& window, std::int64_t t,
                         CountSampler& sampler)
{
    Vector lambda = ingarch_intensity(spec, window);
    for (double l : lambda) {
        if (l < 0.0)
            throw std::logic_error("ingarch_step: negative intensity under nonnegative parameters");
        if (!(l <= kMaxIntensity))
            throw DivergenceError(t, "intensity " + std::to_string(l) + " exceeds " +
                                         std::to_string(kMaxIntensity));
    }
    CountVector counts = sampler.draw(lambda);
    return IngarchStep{std::move(counts), std::move(lambda)};
}

Vector loglinear_mu(const LogLinearSpec& spec, const StateWindow& window)
{
    if (window.order() != spec.q)
        throw ConfigError("loglinear: window order does not match q");
    Vector mu = spec.d;
    for (std::size_t j = 1; j <= spec.q; ++j) {
        const CompositeState& s = window.lag(j);
        Vector log_counts(s.counts.size());
        for (std::size_t i = 0; i < s.counts.size(); ++i)
            log_counts[i] = std::log1p(static_cast<double>(s.counts[i]));
        add_product(mu, spec.mu_matrices[j - 1], s.latent);
        add_product(mu, spec.logcount_matrices[j - 1], log_counts);
    }
    return mu;
}

LogLinearStep loglinear_step(const LogLinearSpec& spec, const StateWindow& window,
                             std::int64_t t, CountSampler& sampler)
{
    Vector mu = loglinear_mu(spec, window);
    Vector lambda(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(mu[i] <= kMaxLogIntensity))
            throw DivergenceError(t, "log-intensity " + std::to_string(mu[i]) + " exceeds " +
                                         std::to_string(kMaxLogIntensity));
        lambda[i] = std::exp(mu[i]);
        if (lambda[i] > kMaxIntensity)
            throw DivergenceError(t, "intensity " + std::to_string(lambda[i]) + " exceeds " +
                                         std::to_string(kMaxIntensity));
    }
    CountVector counts = sampler.draw(lambda);
    return LogLinearStep{std::move(counts), std::move(mu), std::move(lambda)};
}

CompositeState step(const ModelSpec& model, StateWindow& window, const NoiseContext& ctx)
{
    check_window(model, window);
    CompositeState next = std::visit(
        overloaded{
            [&](const GinarSpec& s) {
                Vector mean = ginar_conditional_mean(s, window);
                CountVector x;
                if (ctx.cache != nullptr) {
                    x = ginar_step(s, window, ctx.t, *ctx.cache, ctx.stream);
                } else {
                    CountingCache local;
                    x = ginar_step(s, window, ctx.t, local, ctx.stream);
                }
                return CompositeState{std::move(x), std::move(mean)};
            },
            [&](const IngarchSpec& s) {
                CountSampler sampler = ctx.paths != nullptr
                                           ? CountSampler::shared(*ctx.paths)
                                           : CountSampler::fresh(s.dependence,
                                                                 ctx.stream.substream(kCountTag));
                IngarchStep r = ingarch_step(s, window, ctx.t, sampler);
                return CompositeState{std::move(r.counts), std::move(r.lambda)};
            },
            [&](const LogLinearSpec& s) {
                CountSampler sampler = ctx.paths != nullptr
                                           ? CountSampler::shared(*ctx.paths)
                                           : CountSampler::fresh(s.dependence,
                                                                 ctx.stream.substream(kCountTag));
                LogLinearStep r = loglinear_step(s, window, ctx.t, sampler);
                return CompositeState{std::move(r.counts), std::move(r.mu)};
            }},
        model);
    window.push(next);
    return next;
}

}  // namespace countar
