#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "countar/linalg.hpp"
#include "countar/models.hpp"

namespace countar {

enum class Verdict { Holds, Fails, NotApplicable };

std::string_view to_string(Verdict verdict) noexcept;

/// Values within this distance of 1 are flagged as boundary cases.
inline constexpr double kBoundaryTolerance = 1e-12;

struct Diagnostic {
    std::string name;
    double value = 0.0;
    /// How the value is obtained, e.g. "rho(sum(A_i + B_i))".
    std::string expression;
    /// Matrix the value was computed from (d is stored as a 1 x p row).
    Matrix source;
    bool boundary = false;
};

struct VerdictEntry {
    std::string name;
    Verdict verdict = Verdict::NotApplicable;
    /// Name of the diagnostic the verdict was read from.
    std::string diagnostic;
    bool boundary = false;
};

struct ConditionReport {
    std::string model_kind;
    std::vector<Diagnostic> diagnostics;
    std::vector<VerdictEntry> verdicts;
    /// Conclusions licensed by the conditions that hold, each prefixed by
    /// the condition it rests on.
    std::vector<std::string> implications;
    std::vector<std::string> notes;

    const Diagnostic* diagnostic(std::string_view name) const;
    const VerdictEntry* verdict(std::string_view name) const;
};

ConditionReport check_ginar(const GinarSpec& spec);
ConditionReport check_ingarch(const IngarchSpec& spec);
ConditionReport check_loglinear(const LogLinearSpec& spec);
ConditionReport check(const ModelSpec& model);

using BigCount = boost::multiprecision::uint128_t;

/// Stirling number of the second kind, 1 <= n <= 30, 0 <= k <= n.
BigCount stirling2(int n, int k);

/// E X^r for X ~ Poisson(lambda), 1 <= r <= 30.
double poisson_raw_moment(double lambda, int r);

/// log E exp(delta X) = lambda (e^delta - 1) for X ~ Poisson(lambda).
double poisson_mgf(double lambda, double delta);

}  // namespace countar
