#include "countar/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "config_json.hpp"

namespace countar {

namespace {

std::string join(const std::string& path, std::string_view key)
{
    return path + "/" + std::string(key);
}

std::string join(const std::string& path, std::size_t index)
{
    return path + "/" + std::to_string(index);
}

std::string describe(const std::vector<ConfigIssue>& issues)
{
    std::string out = "invalid config:";
    for (const ConfigIssue& i : issues)
        out += "\n  " + (i.path.empty() ? std::string("/") : i.path) + ": " + i.message;
    return out;
}

// Collects issues while walking the document. Every reader returns nullopt
// (and records an issue) when the value is missing or malformed.
class Reader {
public:
    std::vector<ConfigIssue> issues;

    void issue(std::string path, std::string message)
    {
        issues.push_back({std::move(path), std::move(message)});
    }

    bool object(const Json& j, const std::string& path)
    {
        if (!j.is_object()) {
            issue(path, "expected an object");
            return false;
        }
        return true;
    }

    void allowed_keys(const Json& j, const std::string& path,
                      std::initializer_list<std::string_view> keys, std::string_view context)
    {
        for (const auto& [key, value] : j.items())
            if (std::find(keys.begin(), keys.end(), key) == keys.end())
                issue(join(path, key), "unknown key for " + std::string(context));
    }

    const Json* member(const Json& j, std::string_view key, const std::string& path,
                       bool required)
    {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required)
                issue(join(path, key), std::string(key) + " required");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::uint64_t> unsigned_integer(const Json& j, const std::string& path)
    {
        if (j.is_number_unsigned())
            return j.get<std::uint64_t>();
        if (j.is_number_integer()) {
            issue(path, "must be nonnegative");
            return std::nullopt;
        }
        issue(path, "expected a nonnegative integer");
        return std::nullopt;
    }

    std::optional<std::uint64_t> count(const Json& j, const std::string& path, std::uint64_t min)
    {
        auto v = unsigned_integer(j, path);
        if (v && *v < min) {
            issue(path, "must be at least " + std::to_string(min));
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> real(const Json& j, const std::string& path)
    {
        if (!j.is_number()) {
            issue(path, "expected a number");
            return std::nullopt;
        }
        const double x = j.get<double>();
        if (!std::isfinite(x)) {
            issue(path, "must be finite");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::string> string(const Json& j, const std::string& path)
    {
        if (!j.is_string()) {
            issue(path, "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    std::optional<Vector> vector(const Json& j, const std::string& path,
                                 std::optional<std::size_t> length)
    {
        if (!j.is_array()) {
            issue(path, "expected an array of numbers");
            return std::nullopt;
        }
        if (length && j.size() != *length) {
            issue(path, "expected " + std::to_string(*length) + " entries, got " +
                            std::to_string(j.size()));
            return std::nullopt;
        }
        Vector out;
        bool ok = true;
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto x = real(j[i], join(path, i));
            ok = ok && x.has_value();
            out.push_back(x.value_or(0.0));
        }
        if (!ok)
            return std::nullopt;
        return out;
    }

    std::optional<Matrix> matrix(const Json& j, const std::string& path, std::size_t p)
    {
        if (!j.is_array() || j.size() != p) {
            issue(path, "expected a " + std::to_string(p) + "x" + std::to_string(p) +
                            " matrix as an array of rows");
            return std::nullopt;
        }
        std::vector<double> entries;
        bool ok = true;
        for (std::size_t i = 0; i < p; ++i) {
            auto row = vector(j[i], join(path, i), p);
            ok = ok && row.has_value();
            if (row)
                entries.insert(entries.end(), row->begin(), row->end());
        }
        if (!ok)
            return std::nullopt;
        return Matrix(p, p, std::move(entries));
    }

    std::optional<std::vector<Matrix>> matrices(const Json& j, const std::string& path,
                                                std::size_t p, std::size_t q)
    {
        if (!j.is_array() || j.size() != q) {
            issue(path, "expected a list of " + std::to_string(q) + " matrices");
            return std::nullopt;
        }
        std::vector<Matrix> out;
        bool ok = true;
        for (std::size_t k = 0; k < q; ++k) {
            auto m = matrix(j[k], join(path, k), p);
            ok = ok && m.has_value();
            if (m)
                out.push_back(std::move(*m));
        }
        if (!ok)
            return std::nullopt;
        return out;
    }

    void require_nonnegative(const std::vector<Matrix>& ms, const std::string& path)
    {
        for (std::size_t k = 0; k < ms.size(); ++k)
            for (std::size_t i = 0; i < ms[k].rows(); ++i)
                for (std::size_t l = 0; l < ms[k].cols(); ++l)
                    if (ms[k](i, l) < 0.0)
                        issue(join(join(join(path, k), i), l), "must be nonnegative");
    }

    void require_nonnegative(const Vector& v, const std::string& path)
    {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] < 0.0)
                issue(join(path, i), "must be nonnegative");
    }
};

std::optional<DependenceScheme> read_dependence(Reader& r, const Json* j, const std::string& path,
                                                std::size_t p)
{
    if (j == nullptr)
        return DependenceScheme::independent();
    if (!r.object(*j, path))
        return std::nullopt;
    r.allowed_keys(*j, path, {"scheme", "correlation"}, "dependence");
    const Json* scheme = r.member(*j, "scheme", path, true);
    if (scheme == nullptr)
        return std::nullopt;
    auto name = r.string(*scheme, join(path, "scheme"));
    if (!name)
        return std::nullopt;
    const Json* corr = r.member(*j, "correlation", path, false);
    if (*name != "gaussian_copula" && corr != nullptr)
        r.issue(join(path, "correlation"), "only used by the gaussian_copula scheme");
    if (*name == "independent")
        return DependenceScheme::independent();
    if (*name == "comonotone")
        return DependenceScheme::comonotone();
    if (*name == "gaussian_copula") {
        if (corr == nullptr) {
            r.issue(join(path, "correlation"), "correlation required for gaussian_copula");
            return std::nullopt;
        }
        auto m = r.matrix(*corr, join(path, "correlation"), p);
        if (!m)
            return std::nullopt;
        try {
            return DependenceScheme::gaussian_copula(*m);
        } catch (const Error& e) {
            r.issue(join(path, "correlation"), e.what());
            return std::nullopt;
        }
    }
    r.issue(join(path, "scheme"),
            "unknown scheme '" + *name + "' (independent, comonotone, gaussian_copula)");
    return std::nullopt;
}

std::optional<Immigration> read_immigration(Reader& r, const Json* j, const std::string& path,
                                            std::size_t p)
{
    if (j == nullptr || !r.object(*j, path))
        return std::nullopt;
    r.allowed_keys(*j, path, {"family", "mean", "value"}, "immigration");
    Immigration imm;
    std::string family = "poisson";
    if (const Json* f = r.member(*j, "family", path, false)) {
        auto name = r.string(*f, join(path, "family"));
        if (!name)
            return std::nullopt;
        family = *name;
    }
    std::string_view key = "mean";
    if (family == "poisson") {
        imm.family = ImmigrationFamily::Poisson;
    } else if (family == "geometric") {
        imm.family = ImmigrationFamily::Geometric;
    } else if (family == "constant") {
        imm.family = ImmigrationFamily::Constant;
        key = "value";
    } else {
        r.issue(join(path, "family"),
                "unknown immigration family '" + family + "' (poisson, geometric, constant)");
        return std::nullopt;
    }
    const std::string_view other = key == "mean" ? "value" : "mean";
    if (j->contains(other))
        r.issue(join(path, other), "not used by the " + family + " family");
    const Json* param = r.member(*j, key, path, true);
    if (param == nullptr)
        return std::nullopt;
    auto v = r.vector(*param, join(path, key), p);
    if (!v)
        return std::nullopt;
    const std::size_t before = r.issues.size();
    r.require_nonnegative(*v, join(path, key));
    if (imm.family == ImmigrationFamily::Constant)
        for (std::size_t i = 0; i < v->size(); ++i)
            if ((*v)[i] != std::floor((*v)[i]))
                r.issue(join(join(path, key), i), "constant immigration must be an integer");
    if (r.issues.size() != before)
        return std::nullopt;
    imm.parameter = std::move(*v);
    return imm;
}

std::optional<ModelSpec> read_model(Reader& r, const Json& j)
{
    const std::string path = "/model";
    if (!r.object(j, path))
        return std::nullopt;
    const Json* kind_json = r.member(j, "kind", path, true);
    if (kind_json == nullptr)
        return std::nullopt;
    auto kind = r.string(*kind_json, join(path, "kind"));
    if (!kind)
        return std::nullopt;
    if (*kind == "ginar")
        r.allowed_keys(j, path, {"kind", "p", "q", "A", "counting_family", "immigration"},
                       "ginar models");
    else if (*kind == "ingarch" || *kind == "loglinear")
        r.allowed_keys(j, path, {"kind", "p", "q", "d", "A", "B", "dependence"},
                       *kind + " models");
    else {
        r.issue(join(path, "kind"), "unknown model kind '" + *kind +
                                        "' (ginar, ingarch, loglinear)");
        return std::nullopt;
    }

    std::optional<std::uint64_t> p, q;
    if (const Json* x = r.member(j, "p", path, true))
        p = r.count(*x, join(path, "p"), 1);
    if (const Json* x = r.member(j, "q", path, true))
        q = r.count(*x, join(path, "q"), 1);
    if (!p || !q)
        return std::nullopt;
    const auto pp = static_cast<std::size_t>(*p);
    const auto qq = static_cast<std::size_t>(*q);
    const std::size_t before = r.issues.size();

    std::optional<std::vector<Matrix>> A;
    if (const Json* x = r.member(j, "A", path, true))
        A = r.matrices(*x, join(path, "A"), pp, qq);

    if (*kind == "ginar") {
        GinarSpec spec;
        spec.p = pp;
        spec.q = qq;
        if (const Json* f = r.member(j, "counting_family", path, false)) {
            if (auto name = r.string(*f, join(path, "counting_family"))) {
                if (auto fam = counting_family_from_string(*name))
                    spec.counting_family = *fam;
                else
                    r.issue(join(path, "counting_family"),
                            "unknown counting family '" + *name +
                                "' (bernoulli, poisson, geometric)");
            }
        }
        if (A) {
            r.require_nonnegative(*A, join(path, "A"));
            if (spec.counting_family == CountingFamily::Bernoulli)
                for (std::size_t k = 0; k < A->size(); ++k)
                    for (std::size_t i = 0; i < pp; ++i)
                        for (std::size_t l = 0; l < pp; ++l)
                            if ((*A)[k](i, l) > 1.0)
                                r.issue(join(join(join(join(path, "A"), k), i), l),
                                        "Bernoulli counting sequences need a mean <= 1");
        }
        auto imm = read_immigration(r, r.member(j, "immigration", path, true),
                                    join(path, "immigration"), pp);
        if (!A || !imm || r.issues.size() != before)
            return std::nullopt;
        spec.mean_matrices = std::move(*A);
        spec.immigration = std::move(*imm);
        return spec;
    }

    const bool linear = *kind == "ingarch";
    std::optional<Vector> d;
    if (const Json* x = r.member(j, "d", path, true))
        d = r.vector(*x, join(path, "d"), pp);
    std::optional<std::vector<Matrix>> B;
    if (const Json* x = r.member(j, "B", path, true))
        B = r.matrices(*x, join(path, "B"), pp, qq);
    auto dep = read_dependence(r, r.member(j, "dependence", path, false),
                               join(path, "dependence"), pp);
    if (linear) {
        if (d)
            r.require_nonnegative(*d, join(path, "d"));
        if (A)
            r.require_nonnegative(*A, join(path, "A"));
        if (B)
            r.require_nonnegative(*B, join(path, "B"));
    }
    if (!A || !B || !d || !dep || r.issues.size() != before)
        return std::nullopt;
    if (linear)
        return IngarchSpec{pp, qq, std::move(*d), std::move(*A), std::move(*B), std::move(*dep)};
    return LogLinearSpec{pp, qq, std::move(*d), std::move(*A), std::move(*B), std::move(*dep)};
}

std::vector<CompositeState> default_start_b(const ModelSpec& model)
{
    constexpr Count kStartCount = 10;
    const std::size_t p = dimension(model);
    CompositeState s{CountVector(p, kStartCount), Vector(p, static_cast<double>(kStartCount))};
    if (const auto* g = std::get_if<GinarSpec>(&model))
        s.latent = immigration_mean(g->immigration);
    else if (std::holds_alternative<LogLinearSpec>(model))
        s.latent = Vector(p, std::log1p(static_cast<double>(kStartCount)));
    return std::vector<CompositeState>(order(model), s);
}

std::string_view counts_key(const ModelSpec& model)
{
    return std::holds_alternative<GinarSpec>(model) ? "x" : "y";
}

std::string_view latent_key(const ModelSpec& model)
{
    if (std::holds_alternative<IngarchSpec>(model))
        return "lambda";
    if (std::holds_alternative<LogLinearSpec>(model))
        return "mu";
    return "";
}

std::optional<std::vector<CompositeState>> read_window(Reader& r, const Json& j,
                                                       const std::string& path,
                                                       const ModelSpec& model)
{
    const std::size_t p = dimension(model);
    const std::size_t q = order(model);
    if (!j.is_array() || j.size() != q) {
        r.issue(path, "expected " + std::to_string(q) + " states, newest first");
        return std::nullopt;
    }
    const std::string_view ck = counts_key(model);
    const std::string_view lk = latent_key(model);
    std::vector<CompositeState> out;
    const std::size_t before = r.issues.size();
    for (std::size_t k = 0; k < q; ++k) {
        const std::string at = join(path, k);
        if (!r.object(j[k], at))
            continue;
        if (lk.empty())
            r.allowed_keys(j[k], at, {ck}, "window states of this model");
        else
            r.allowed_keys(j[k], at, {ck, lk}, "window states of this model");
        CompositeState s;
        if (const Json* c = r.member(j[k], ck, at, true)) {
            if (auto v = r.vector(*c, join(at, ck), p)) {
                for (std::size_t i = 0; i < p; ++i) {
                    const double x = (*v)[i];
                    if (x < 0.0 || x != std::floor(x) || x > kMaxIntensity)
                        r.issue(join(join(at, ck), i), "counts must be nonnegative integers");
                    s.counts.push_back(static_cast<Count>(x));
                }
            }
        }
        if (lk.empty()) {
            s.latent = immigration_mean(std::get<GinarSpec>(model).immigration);
        } else if (const Json* l = r.member(j[k], lk, at, true)) {
            if (auto v = r.vector(*l, join(at, lk), p)) {
                if (lk == "lambda")
                    r.require_nonnegative(*v, join(at, lk));
                s.latent = std::move(*v);
            }
        }
        out.push_back(std::move(s));
    }
    if (r.issues.size() != before)
        return std::nullopt;
    return out;
}

std::vector<double> read_list(Reader& r, const Json* j, const std::string& path,
                              std::vector<double> fallback, bool inclusive_one)
{
    if (j == nullptr)
        return fallback;
    auto v = r.vector(*j, path, std::nullopt);
    if (!v)
        return {};
    if (v->empty())
        r.issue(path, "must not be empty");
    for (std::size_t i = 0; i < v->size(); ++i) {
        const double x = (*v)[i];
        if (inclusive_one && x < 1.0)
            r.issue(join(path, i), "polynomial orders must be >= 1");
        if (!inclusive_one && !(x > 0.0))
            r.issue(join(path, i), "exponential rates must be > 0");
    }
    return *v;
}

void read_experiment(Reader& r, const Json& j, ExperimentConfig& config,
                     const std::optional<ModelSpec>& model)
{
    const std::string path = "/experiment";
    if (!r.object(j, path))
        return;
    const Json* kind_json = r.member(j, "kind", path, true);
    if (kind_json == nullptr)
        return;
    auto kind = r.string(*kind_json, join(path, "kind"));
    if (!kind)
        return;
    if (*kind == "check") {
        config.kind = ExperimentKind::Check;
        r.allowed_keys(j, path, {"kind", "require"}, "check experiments");
    } else if (*kind == "simulate") {
        config.kind = ExperimentKind::Simulate;
        config.T = kDefaultSimulateT;
        r.allowed_keys(j, path, {"kind", "T", "burn_in", "require"}, "simulate experiments");
    } else if (*kind == "couple") {
        config.kind = ExperimentKind::Couple;
        r.allowed_keys(j, path, {"kind", "n", "replicates", "window_a", "window_b", "require"},
                       "couple experiments");
    } else if (*kind == "moments") {
        config.kind = ExperimentKind::Moments;
        config.T = kDefaultMomentsT;
        r.allowed_keys(j, path,
                       {"kind", "T", "burn_in", "replicates", "r_values", "delta_values",
                        "require"},
                       "moments experiments");
    } else {
        r.issue(join(path, "kind"),
                "unknown experiment kind '" + *kind + "' (check, simulate, couple, moments)");
        return;
    }

    if (const Json* x = r.member(j, "T", path, false))
        if (auto v = r.count(*x, join(path, "T"), 1))
            config.T = static_cast<std::int64_t>(*v);
    if (const Json* x = r.member(j, "burn_in", path, false))
        if (auto v = r.count(*x, join(path, "burn_in"), 0))
            config.burn_in = static_cast<std::int64_t>(*v);
    if (const Json* x = r.member(j, "replicates", path, false))
        if (auto v = r.count(*x, join(path, "replicates"), 1))
            config.replicates = static_cast<std::size_t>(*v);
    if (const Json* x = r.member(j, "n", path, false))
        if (auto v = r.count(*x, join(path, "n"), 10))
            config.n = static_cast<std::size_t>(*v);

    if (config.kind == ExperimentKind::Moments) {
        config.r_values = read_list(r, r.member(j, "r_values", path, false),
                                    join(path, "r_values"), {1.0, 2.0}, true);
        config.delta_values = read_list(r, r.member(j, "delta_values", path, false),
                                        join(path, "delta_values"), {0.1}, false);
    }

    if (model && config.kind == ExperimentKind::Couple) {
        const StateWindow start = default_window(*model);
        config.window_a = std::vector<CompositeState>(start.begin(), start.end());
        config.window_b = default_start_b(*model);
        if (const Json* x = r.member(j, "window_a", path, false))
            if (auto w = read_window(r, *x, join(path, "window_a"), *model))
                config.window_a = std::move(*w);
        if (const Json* x = r.member(j, "window_b", path, false))
            if (auto w = read_window(r, *x, join(path, "window_b"), *model))
                config.window_b = std::move(*w);
    }

    if (const Json* x = r.member(j, "require", path, false)) {
        config.require.clear();
        if (!x->is_array()) {
            r.issue(join(path, "require"), "expected an array of verdict names");
        } else {
            const std::vector<std::string> known =
                model ? verdict_names(*model) : std::vector<std::string>{};
            for (std::size_t i = 0; i < x->size(); ++i) {
                auto name = r.string((*x)[i], join(join(path, "require"), i));
                if (!name)
                    continue;
                if (model && std::find(known.begin(), known.end(), *name) == known.end())
                    r.issue(join(join(path, "require"), i),
                            "unknown verdict '" + *name + "' for this model");
                config.require.push_back(*name);
            }
        }
    }
}

void read_output(Reader& r, const Json* j, ExperimentConfig& config)
{
    if (j == nullptr)
        return;
    const std::string path = "/output";
    if (!r.object(*j, path))
        return;
    r.allowed_keys(*j, path, {"dir", "csv"}, "output");
    if (const Json* x = r.member(*j, "dir", path, false))
        if (auto s = r.string(*x, join(path, "dir"))) {
            if (s->empty())
                r.issue(join(path, "dir"), "must not be empty");
            config.output_dir = *s;
        }
    if (const Json* x = r.member(*j, "csv", path, false)) {
        if (x->is_boolean())
            config.csv = x->get<bool>();
        else
            r.issue(join(path, "csv"), "expected true or false");
    }
}

Json matrix_json(const Matrix& m)
{
    return Json(m.to_rows());
}

Json matrices_json(const std::vector<Matrix>& ms)
{
    Json out = Json::array();
    for (const Matrix& m : ms)
        out.push_back(matrix_json(m));
    return out;
}

Json dependence_json(const DependenceScheme& scheme)
{
    Json out = Json::object();
    out["scheme"] = std::string(scheme.name());
    if (scheme.kind() == SchemeKind::GaussianCopula)
        out["correlation"] = matrix_json(scheme.correlation());
    return out;
}

Json model_json(const ModelSpec& model)
{
    Json out = Json::object();
    out["kind"] = std::string(model_kind(model));
    out["p"] = dimension(model);
    out["q"] = order(model);
    if (const auto* g = std::get_if<GinarSpec>(&model)) {
        out["A"] = matrices_json(g->mean_matrices);
        out["counting_family"] = std::string(to_string(g->counting_family));
        Json imm = Json::object();
        imm["family"] = std::string(to_string(g->immigration.family));
        imm[g->immigration.family == ImmigrationFamily::Constant ? "value" : "mean"] =
            g->immigration.parameter;
        out["immigration"] = imm;
    } else if (const auto* s = std::get_if<IngarchSpec>(&model)) {
        out["d"] = s->d;
        out["A"] = matrices_json(s->lambda_matrices);
        out["B"] = matrices_json(s->count_matrices);
        out["dependence"] = dependence_json(s->dependence);
    } else {
        const auto& l = std::get<LogLinearSpec>(model);
        out["d"] = l.d;
        out["A"] = matrices_json(l.mu_matrices);
        out["B"] = matrices_json(l.logcount_matrices);
        out["dependence"] = dependence_json(l.dependence);
    }
    return out;
}

Json window_json(const ModelSpec& model, const std::vector<CompositeState>& window)
{
    Json out = Json::array();
    const std::string_view lk = latent_key(model);
    for (const CompositeState& s : window) {
        Json state = Json::object();
        state[std::string(counts_key(model))] = s.counts;
        if (!lk.empty())
            state[std::string(lk)] = s.latent;
        out.push_back(state);
    }
    return out;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept
{
    switch (kind) {
    case ExperimentKind::Check:
        return "check";
    case ExperimentKind::Simulate:
        return "simulate";
    case ExperimentKind::Couple:
        return "couple";
    case ExperimentKind::Moments:
        return "moments";
    }
    return "unknown";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : ConfigError("parse error at line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ": " + what),
      line_(line),
      column_(column)
{
}

ValidationError::ValidationError(std::vector<ConfigIssue> issues)
    : ConfigError(describe(issues)), issues_(std::move(issues))
{
}

std::vector<std::string> verdict_names(const ModelSpec& model)
{
    if (std::holds_alternative<GinarSpec>(model))
        return {"stationarity", "finite_moments"};
    if (std::holds_alternative<IngarchSpec>(model))
        return {"stationarity", "polynomial_moments", "exp_moments_l1", "exp_moments_linf",
                "necessity_applicable"};
    return {"stationarity", "exp_moments"};
}

ExperimentConfig parse_config(std::string_view text)
{
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        // e.byte is the 1-based offset of the offending character.
        const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const std::size_t line =
            1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
        const std::size_t last_nl = text.rfind('\n', offset == 0 ? 0 : offset - 1);
        const std::size_t column =
            (last_nl == std::string_view::npos || offset == 0) ? offset + 1 : offset - last_nl;
        std::string what = e.what();
        if (auto pos = what.find("syntax error"); pos != std::string::npos)
            what = what.substr(pos);
        throw ParseError(line, column, what);
    }

    Reader r;
    ExperimentConfig config;
    if (!r.object(doc, ""))
        throw ValidationError(std::move(r.issues));
    r.allowed_keys(doc, "", {"seed", "model", "experiment", "output"}, "the config");

    if (const Json* s = r.member(doc, "seed", "", true)) {
        if (auto v = r.unsigned_integer(*s, "/seed"))
            config.seed = *v;
    }

    std::optional<ModelSpec> model;
    if (const Json* m = r.member(doc, "model", "", true))
        model = read_model(r, *m);
    if (model) {
        try {
            validate(*model);
            config.model = *model;
        } catch (const ConfigError& e) {
            r.issue("/model", e.what());
            model.reset();
        }
    }
    if (const Json* e = r.member(doc, "experiment", "", true))
        read_experiment(r, *e, config, model);
    read_output(r, r.member(doc, "output", "", false), config);

    if (model && config.kind == ExperimentKind::Couple && r.issues.empty()) {
        try {
            check_window(*model, StateWindow(config.window_a));
            check_window(*model, StateWindow(config.window_b));
        } catch (const ConfigError& e) {
            r.issue("/experiment", e.what());
        }
    }
    if (!r.issues.empty())
        throw ValidationError(std::move(r.issues));
    return config;
}

Json config_to_json(const ExperimentConfig& config)
{
    Json out = Json::object();
    out["seed"] = config.seed;
    out["model"] = model_json(config.model);

    Json e = Json::object();
    e["kind"] = std::string(to_string(config.kind));
    switch (config.kind) {
    case ExperimentKind::Check:
        break;
    case ExperimentKind::Simulate:
        e["T"] = config.T;
        e["burn_in"] = config.burn_in;
        break;
    case ExperimentKind::Couple:
        e["n"] = config.n;
        e["replicates"] = config.replicates;
        e["window_a"] = window_json(config.model, config.window_a);
        e["window_b"] = window_json(config.model, config.window_b);
        break;
    case ExperimentKind::Moments:
        e["T"] = config.T;
        e["burn_in"] = config.burn_in;
        e["replicates"] = config.replicates;
        e["r_values"] = config.r_values;
        e["delta_values"] = config.delta_values;
        break;
    }
    e["require"] = config.require;
    out["experiment"] = e;

    Json o = Json::object();
    o["dir"] = config.output_dir;
    o["csv"] = config.csv;
    out["output"] = o;
    return out;
}

std::string serialize_config(const ExperimentConfig& config)
{
    return config_to_json(config).dump(2) + "\n";
}

}  // namespace countar
