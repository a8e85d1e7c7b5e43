#include "countar/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "countar/errors.hpp"

namespace countar {

namespace {

bool near_one(double v)
{
    return std::abs(v - 1.0) <= kBoundaryTolerance;
}

void add_diagnostic(ConditionReport& report, std::string name, double value,
                    std::string expression, Matrix source)
{
    report.diagnostics.push_back(Diagnostic{std::move(name), value, std::move(expression),
                                            std::move(source), near_one(value)});
}

// Holds iff the diagnostic is strictly below 1.
void add_below_one(ConditionReport& report, std::string name, const std::string& diagnostic)
{
    const Diagnostic* d = report.diagnostic(diagnostic);
    report.verdicts.push_back(VerdictEntry{std::move(name),
                                           d->value < 1.0 ? Verdict::Holds : Verdict::Fails,
                                           diagnostic, d->boundary});
}

Verdict verdict_of(const ConditionReport& report, std::string_view name)
{
    return report.verdict(name)->verdict;
}

Matrix as_row(const Vector& v)
{
    return Matrix(1, v.size(), v);
}

}  // namespace

std::string_view to_string(Verdict verdict) noexcept
{
    switch (verdict) {
    case Verdict::Holds:
        return "Holds";
    case Verdict::Fails:
        return "Fails";
    case Verdict::NotApplicable:
        return "NotApplicable";
    }
    return "unknown";
}

const Diagnostic* ConditionReport::diagnostic(std::string_view name) const
{
    for (const Diagnostic& d : diagnostics)
        if (d.name == name)
            return &d;
    return nullptr;
}

const VerdictEntry* ConditionReport::verdict(std::string_view name) const
{
    for (const VerdictEntry& v : verdicts)
        if (v.name == name)
            return &v;
    return nullptr;
}

ConditionReport check_ginar(const GinarSpec& spec)
{
    ConditionReport report;
    report.model_kind = "ginar";
    const Matrix total = sum(spec.mean_matrices);
    add_diagnostic(report, "rho_sum_A", spectral_radius(total), "rho(sum(A_j))", total);
    add_below_one(report, "stationarity", "rho_sum_A");
    report.verdicts.push_back(
        VerdictEntry{"finite_moments", Verdict::Holds, "", false});
    report.notes.push_back("counting family " + std::string(to_string(spec.counting_family)) +
                           " and immigration family " +
                           std::string(to_string(spec.immigration.family)) +
                           " have finite moments of every order");
    if (verdict_of(report, "stationarity") == Verdict::Holds)
        report.implications.push_back(
            "rho(sum(A_j)) < 1: a stationary causal solution exists, is unique and has "
            "finite mean");
    return report;
}

ConditionReport check_ingarch(const IngarchSpec& spec)
{
    ConditionReport report;
    report.model_kind = "ingarch";

    std::vector<Matrix> all = spec.lambda_matrices;
    all.insert(all.end(), spec.count_matrices.begin(), spec.count_matrices.end());
    const Matrix total = sum(all);

    double l1 = 0.0;
    double l2 = 0.0;
    for (const Matrix& m : all) {
        l1 += matrix_norm(m, NormKind::L1);
        l2 += matrix_norm(m, NormKind::L2);
    }
    const double min_d = *std::min_element(spec.d.begin(), spec.d.end());

    add_diagnostic(report, "rho_sum_AB", spectral_radius(total), "rho(sum(A_i + B_i))", total);
    add_diagnostic(report, "l1_sum_norms", l1, "sum(|A_i|_1 + |B_i|_1)", total);
    add_diagnostic(report, "linf_sum", matrix_norm(total, NormKind::LInf),
                   "|sum(A_i + B_i)|_inf", total);
    add_diagnostic(report, "min_d", min_d, "min_k d_k", as_row(spec.d));
    add_diagnostic(report, "l2_sum_norms", l2, "sum(|A_i|_2 + |B_i|_2)", total);

    add_below_one(report, "stationarity", "rho_sum_AB");
    add_below_one(report, "polynomial_moments", "rho_sum_AB");
    add_below_one(report, "exp_moments_l1", "l1_sum_norms");
    add_below_one(report, "exp_moments_linf", "linf_sum");
    report.verdicts.push_back(VerdictEntry{
        "necessity_applicable", min_d > 0.0 ? Verdict::Holds : Verdict::NotApplicable, "min_d",
        false});

    const bool stationary = verdict_of(report, "stationarity") == Verdict::Holds;
    const bool exp_l1 = verdict_of(report, "exp_moments_l1") == Verdict::Holds;
    const bool exp_linf = verdict_of(report, "exp_moments_linf") == Verdict::Holds;
    if (stationary)
        report.implications.push_back(
            "rho(sum(A_i + B_i)) < 1: a unique stationary causal solution exists and "
            "E|Y_t|^r is finite for every r");
    if (exp_l1)
        report.implications.push_back(
            "sum(|A_i|_1 + |B_i|_1) < 1: E exp(delta |Y_t|_1) finite for some delta > 0");
    if (exp_linf)
        report.implications.push_back(
            "|sum(A_i + B_i)|_inf < 1: E exp(delta |Y_t|_1) finite for some delta > 0");
    if (min_d > 0.0)
        report.implications.push_back(
            "min(d) > 0: rho(sum(A_i + B_i)) < 1 is also necessary for a stationary solution "
            "with finite first moment");
    if (stationary && !exp_l1 && !exp_linf)
        report.notes.push_back(
            "stationarity holds but neither exponential-moment criterion does; no "
            "exponential-moment guarantee is available for this configuration");
    report.notes.push_back(
        "necessity_applicable only reports whether d > 0; necessity itself is not checked");
    report.notes.push_back("l2_sum_norms is informational and carries no verdict");
    return report;
}

ConditionReport check_loglinear(const LogLinearSpec& spec)
{
    ConditionReport report;
    report.model_kind = "loglinear";

    std::vector<Matrix> all;
    for (const Matrix& m : spec.mu_matrices)
        all.push_back(entrywise_abs(m));
    for (const Matrix& m : spec.logcount_matrices)
        all.push_back(entrywise_abs(m));
    const Matrix total = sum(all);

    add_diagnostic(report, "rho_sum_abs", spectral_radius(total), "rho(sum(|A_i| + |B_i|))",
                   total);
    add_diagnostic(report, "linf_sum_abs", matrix_norm(total, NormKind::LInf),
                   "|sum(|A_i| + |B_i|)|_inf", total);
    add_below_one(report, "stationarity", "rho_sum_abs");
    add_below_one(report, "exp_moments", "linf_sum_abs");

    if (verdict_of(report, "stationarity") == Verdict::Holds)
        report.implications.push_back(
            "rho(sum(|A_i| + |B_i|)) < 1: a unique stationary causal solution exists and "
            "E|Y_t| is finite");
    if (verdict_of(report, "exp_moments") == Verdict::Holds)
        report.implications.push_back(
            "|sum(|A_i| + |B_i|)|_inf < 1: E exp(delta |Y_t|_1) finite for some delta > 0");
    return report;
}

ConditionReport check(const ModelSpec& model)
{
    return std::visit(
        [](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, GinarSpec>)
                return check_ginar(spec);
            else if constexpr (std::is_same_v<T, IngarchSpec>)
                return check_ingarch(spec);
            else
                return check_loglinear(spec);
        },
        model);
}

BigCount stirling2(int n, int k)
{
    if (n < 1 || n > 30)
        throw DomainError("stirling2: n must be in [1, 30]");
    if (k < 0 || k > n)
        throw DomainError("stirling2: k must be in [0, n]");
    // row[j] holds S(m, j) for the current m.
    std::vector<BigCount> row(static_cast<std::size_t>(n) + 1, 0);
    row[1] = 1;
    for (int m = 2; m <= n; ++m)
        for (int j = m; j >= 1; --j)
            row[j] = BigCount(j) * row[j] + row[j - 1];
    return row[k];
}

double poisson_raw_moment(double lambda, int r)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw DomainError("poisson_raw_moment: lambda must be finite and >= 0");
    if (r < 1 || r > 30)
        throw DomainError("poisson_raw_moment: r must be in [1, 30]");
    double total = 0.0;
    double power = 1.0;
    for (int i = 1; i <= r; ++i) {
        power *= lambda;
        total += power * stirling2(r, i).convert_to<double>();
    }
    return total;
}

double poisson_mgf(double lambda, double delta)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw DomainError("poisson_mgf: lambda must be finite and >= 0");
    if (!std::isfinite(delta))
        throw DomainError("poisson_mgf: delta must be finite");
    if (lambda == 0.0)
        return 0.0;
    return lambda * std::expm1(delta);
}

}  // namespace countar
