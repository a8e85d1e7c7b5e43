#include <doctest.h>

#include <charconv>
#include <cmath>
#include <sstream>

#include "countar/engine.hpp"
#include "countar/errors.hpp"
#include "countar/linalg.hpp"

using namespace countar;

namespace {

IngarchSpec mean_example()
{
    IngarchSpec s;
    s.p = 2;
    s.q = 1;
    s.d = {1.0, 0.5};
    s.lambda_matrices = {Matrix::from_rows({{0.2, 0.1}, {0.0, 0.2}})};
    s.count_matrices = {Matrix::from_rows({{0.3, 0.05}, {0.1, 0.25}})};
    return s;
}

IngarchSpec iid_poisson(double mean)
{
    IngarchSpec s;
    s.p = 1;
    s.q = 1;
    s.d = {mean};
    s.lambda_matrices = {Matrix::zeros(1, 1)};
    s.count_matrices = {Matrix::zeros(1, 1)};
    return s;
}

std::vector<std::string> split_lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("simulate is deterministic and respects burn-in")
{
    const ModelSpec m = mean_example();
    const SamplePath a = simulate(m, 200, 50, 9);
    const SamplePath b = simulate(m, 200, 50, 9);
    CHECK(a == b);
    CHECK(a.length() == 200);
    CHECK(a.intensities.size() == 200);

    // Burn-in only drops a prefix of the same trajectory.
    const SamplePath full = simulate(m, 250, 0, 9);
    for (std::size_t k = 0; k < 200; ++k) {
        CHECK(a.counts[k] == full.counts[k + 50]);
        CHECK(a.intensities[k] == full.intensities[k + 50]);
    }
    CHECK(simulate(m, 200, 50, 10) != a);
    CHECK(simulate(m, 200, 50, 9, 1) != a);
    CHECK_THROWS_AS(simulate(m, 0, 0, 1), DomainError);
    CHECK_THROWS_AS(simulate(m, 10, -1, 1), DomainError);
}

TEST_CASE("sample mean approaches the stationary mean")
{
    const IngarchSpec s = mean_example();
    const std::vector<Matrix> all{s.lambda_matrices[0], s.count_matrices[0]};
    const Vector target = stationary_mean(s.d, sum(all));
    const Vector mean = simulate(s, 50000, 1000, 4).mean_counts();
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(mean[i] / target[i] - 1.0) < 0.04);
}

TEST_CASE("GINAR and log-linear paths are finite and nonnegative")
{
    GinarSpec g;
    g.p = 2;
    g.q = 2;
    g.mean_matrices = {Matrix::from_rows({{0.3, 0.1}, {0.1, 0.2}}),
                       Matrix::from_rows({{0.1, 0.0}, {0.05, 0.1}})};
    g.counting_family = CountingFamily::Geometric;
    g.immigration = {ImmigrationFamily::Poisson, {1.0, 0.5}};
    // Mean (I - sum A)^{-1} E U.
    const std::vector<Matrix> ga = g.mean_matrices;
    const Vector target = stationary_mean(std::vector<double>{1.0, 0.5}, sum(ga));
    const Vector mean = simulate(g, 40000, 500, 2).mean_counts();
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(mean[i] / target[i] - 1.0) < 0.05);

    LogLinearSpec l;
    l.p = 2;
    l.q = 1;
    l.d = {0.5, 0.2};
    l.mu_matrices = {Matrix::from_rows({{-0.3, 0.0}, {0.2, -0.1}})};
    l.logcount_matrices = {Matrix::from_rows({{0.2, 0.1}, {0.0, 0.3}})};
    const SamplePath p = simulate(l, 2000, 100, 3);
    for (std::size_t k = 0; k < p.length(); ++k)
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(p.counts[k][i] >= 0);
            CHECK(p.intensities[k][i] > 0.0);
        }
}

TEST_CASE("CSV layout")
{
    const SamplePath p = simulate(mean_example(), 5, 10, 1);
    const std::string csv = to_csv(p);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.back() == '\n');
    const auto lines = split_lines(csv);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "t,y_1,y_2,lambda_1,lambda_2");
    // Every real round-trips exactly.
    for (std::size_t k = 1; k < lines.size(); ++k) {
        std::vector<std::string> cells;
        std::istringstream row(lines[k]);
        for (std::string cell; std::getline(row, cell, ',');)
            cells.push_back(cell);
        REQUIRE(cells.size() == 5);
        CHECK(cells[0] == std::to_string(k));
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(cells[1 + i] == std::to_string(p.counts[k - 1][i]));
            double x = 0.0;
            const std::string& c = cells[3 + i];
            std::from_chars(c.data(), c.data() + c.size(), x);
            CHECK(x == p.intensities[k - 1][i]);
        }
    }
    std::ostringstream out;
    write_csv(p, out);
    CHECK(out.str() == csv);
}

TEST_CASE("fit_log_rate recovers a geometric rate")
{
    std::vector<double> d;
    for (int k = 1; k <= 40; ++k)
        d.push_back(3.0 * std::pow(0.7, k));
    double rate = 0.0;
    std::size_t used = 0;
    REQUIRE(fit_log_rate(d, 10, 40, rate, used));
    CHECK(rate == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(used == 40);

    d[20] = 0.0;
    REQUIRE(fit_log_rate(d, 10, 40, rate, used));
    CHECK(used == 20);
    CHECK_FALSE(fit_log_rate(d, 21, 40, rate, used));
}

TEST_CASE("coupling from equal windows is degenerate")
{
    const ModelSpec m = mean_example();
    const CouplingReport r = couple(m, 50, default_window(m), default_window(m), 3);
    CHECK(r.status == RateStatus::DegenerateEqual);
    for (double d : r.distances)
        CHECK(d == 0.0);
}

TEST_CASE("coupled chains contract under the stationarity condition")
{
    const ModelSpec m = mean_example();
    const StateWindow far({CompositeState{{20, 10}, {15.0, 8.0}}});
    const CouplingReport r = couple(m, 200, default_window(m), far, 5, 20);
    CHECK(r.initial_distance == doctest::Approx(20 + 10 + 14 + 7.5));
    CHECK(r.distances.back() < 1e-3 * r.initial_distance);
    CHECK(r.fitted_rate < 1.0);
    CHECK(r.diverged_replicates == 0);
    CHECK(r.final_distances.size() == 20);
    CHECK(r.initial_b.front() == far.lag(1));
}

TEST_CASE("coupling is independent of the thread count")
{
    const ModelSpec m = mean_example();
    const StateWindow far({CompositeState{{20, 10}, {15.0, 8.0}}});
    const CouplingReport one = couple(m, 100, default_window(m), far, 5, 12, 1);
    const CouplingReport three = couple(m, 100, default_window(m), far, 5, 12, 3);
    CHECK(one.distances == three.distances);
    CHECK(one.final_distances == three.final_distances);
    CHECK(one.status == three.status);
    CHECK((one.fitted_rate == three.fitted_rate ||
           (std::isnan(one.fitted_rate) && std::isnan(three.fitted_rate))));
}

TEST_CASE("coupling rejects bad arguments")
{
    const ModelSpec m = mean_example();
    CHECK_THROWS_AS(couple(m, 5, default_window(m), default_window(m), 1), DomainError);
    const StateWindow wrong({CompositeState{{1}, {1.0}}});
    CHECK_THROWS_AS(couple(m, 50, default_window(m), wrong, 1), ConfigError);
}

TEST_CASE("explosive coupling is reported as diverged")
{
    IngarchSpec s = iid_poisson(1.0);
    s.lambda_matrices[0](0, 0) = 0.6;
    s.count_matrices[0](0, 0) = 0.6;
    const ModelSpec m = s;
    const CouplingReport r =
        couple(m, 200, default_window(m), StateWindow({CompositeState{{5}, {5.0}}}), 1, 3);
    CHECK(r.status == RateStatus::Diverged);
    CHECK(r.diverged_replicates == 3);
    CHECK(r.median_final_distance >= r.initial_distance);
}

TEST_CASE("polynomial estimator on an explicit sample")
{
    const std::vector<std::vector<double>> batches{{1.0, 2.0}, {3.0, 4.0}};
    const PolynomialMoment m = estimate_polynomial(batches, 2.0);
    CHECK(m.estimate == doctest::Approx(7.5));
    // Batch means 2.5 and 12.5: sd 7.0710678, SE = sd / sqrt(2) = 5.
    CHECK(m.std_error == doctest::Approx(5.0));
    const std::vector<std::vector<double>> one{{2.0, 2.0}};
    CHECK(estimate_polynomial(one, 1.0).std_error == 0.0);
    const std::vector<std::vector<double>> empty{{}};
    CHECK_THROWS_AS(estimate_polynomial(empty, 1.0), DomainError);
}

TEST_CASE("exponential estimator works in log space")
{
    const std::vector<std::vector<double>> zeros{{0.0, 0.0}, {0.0, 0.0}};
    const ExponentialMoment z = estimate_exponential(zeros, 0.5);
    CHECK(z.log_estimate == 0.0);
    CHECK(z.std_error == 0.0);

    // exp(1000 * 2) overflows a double; log-sum-exp does not.
    const std::vector<std::vector<double>> big{{1000.0, 1000.0}, {1000.0, 1000.0}};
    const ExponentialMoment b = estimate_exponential(big, 2.0);
    CHECK(b.log_estimate == doctest::Approx(2000.0));

    std::vector<double> values(1000, 1.0);
    values[17] = 200.0;
    const std::vector<std::vector<double>> heavy{values};
    const ExponentialMoment h = estimate_exponential(heavy, 1.0);
    CHECK(h.saturated);
    CHECK(h.top10_share > 0.99);
    CHECK(h.log_estimate == doctest::Approx(std::log((999 * std::exp(1.0) + std::exp(200.0)) / 1000)));

    std::vector<double> light(1000);
    for (std::size_t i = 0; i < light.size(); ++i)
        light[i] = static_cast<double>(i % 5);
    const std::vector<std::vector<double>> flat{light};
    CHECK_FALSE(estimate_exponential(flat, 0.1).saturated);
}

TEST_CASE("Monte Carlo moments of an i.i.d. Poisson model")
{
    const ModelSpec m = iid_poisson(1.0);
    const std::vector<double> r{1.0, 2.0};
    const std::vector<double> delta{0.1};
    const MomentReport rep = monte_carlo_moments(m, r, delta, 20000, 10, 4, 8);
    CHECK(rep.sample_size == 80000);
    CHECK(std::abs(rep.polynomial[0].estimate - 1.0) < 4 * rep.polynomial[0].std_error);
    CHECK(std::abs(rep.polynomial[1].estimate - 2.0) < 4 * rep.polynomial[1].std_error);
    CHECK(std::abs(rep.exponential[0].log_estimate - std::expm1(0.1)) <
          4 * rep.exponential[0].std_error);
    CHECK_FALSE(rep.exponential[0].saturated);
}

TEST_CASE("Monte Carlo moments are reproducible and thread-count independent")
{
    const ModelSpec m = mean_example();
    const std::vector<double> r{1.0};
    const std::vector<double> delta{0.05};
    const MomentReport a = monte_carlo_moments(m, r, delta, 3000, 100, 6, 21, 1);
    const MomentReport b = monte_carlo_moments(m, r, delta, 3000, 100, 6, 21, 3);
    CHECK(a == b);
    CHECK(a == monte_carlo_moments(m, r, delta, 3000, 100, 6, 21, 2));
    const std::vector<double> bad_r{0.5};
    CHECK_THROWS_AS(monte_carlo_moments(m, bad_r, delta, 100, 0, 1, 1), DomainError);
    const std::vector<double> bad_delta{0.0};
    CHECK_THROWS_AS(monte_carlo_moments(m, r, bad_delta, 100, 0, 1, 1), DomainError);
}

TEST_CASE("exponential moment estimate is stable when T doubles")
{
    // |sum(A + B)|_inf = 0.75 < 1 for this model.
    const ModelSpec m = mean_example();
    const std::vector<double> r{};
    const std::vector<double> delta{0.1};
    const MomentReport a = monte_carlo_moments(m, r, delta, 20000, 500, 4, 33);
    const MomentReport b = monte_carlo_moments(m, r, delta, 40000, 500, 4, 34);
    const ExponentialMoment& ea = a.exponential[0];
    const ExponentialMoment& eb = b.exponential[0];
    CHECK_FALSE(ea.saturated);
    CHECK_FALSE(eb.saturated);
    const double se = std::hypot(ea.std_error, eb.std_error);
    CHECK(std::abs(ea.log_estimate - eb.log_estimate) < 5 * se);
}
