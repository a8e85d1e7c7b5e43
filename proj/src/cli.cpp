#include "countar/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "config_json.hpp"

namespace countar {

namespace {

namespace fs = std::filesystem;

// JSON has no inf/nan; write them as strings so reports stay lossless.
Json number(double x)
{
    if (std::isfinite(x))
        return x;
    if (std::isnan(x))
        return "nan";
    return x > 0 ? "inf" : "-inf";
}

Json numbers(const std::vector<double>& xs)
{
    Json out = Json::array();
    for (double x : xs)
        out.push_back(number(x));
    return out;
}

Json conditions_json(const ConditionReport& report)
{
    Json out = Json::object();
    out["model_kind"] = report.model_kind;
    Json diags = Json::object();
    for (const Diagnostic& d : report.diagnostics) {
        Json entry = Json::object();
        entry["value"] = number(d.value);
        entry["expression"] = d.expression;
        entry["source"] = d.source.to_rows();
        entry["boundary"] = d.boundary;
        diags[d.name] = entry;
    }
    out["diagnostics"] = diags;
    Json verdicts = Json::object();
    for (const VerdictEntry& v : report.verdicts) {
        Json entry = Json::object();
        entry["verdict"] = std::string(to_string(v.verdict));
        entry["diagnostic"] = v.diagnostic;
        entry["boundary"] = v.boundary;
        verdicts[v.name] = entry;
    }
    out["verdicts"] = verdicts;
    out["implications"] = report.implications;
    out["notes"] = report.notes;
    return out;
}

Json states_json(const std::vector<CompositeState>& states)
{
    Json out = Json::array();
    for (const CompositeState& s : states) {
        Json e = Json::object();
        e["counts"] = s.counts;
        e["latent"] = numbers(s.latent);
        out.push_back(e);
    }
    return out;
}

Json coupling_json(const CouplingReport& r)
{
    Json out = Json::object();
    out["status"] = std::string(to_string(r.status));
    out["initial_distance"] = number(r.initial_distance);
    out["final_distance"] = number(r.distances.empty() ? 0.0 : r.distances.back());
    out["fitted_rate"] = number(r.fitted_rate);
    out["fit_start"] = r.fit_start;
    out["fit_end"] = r.fit_end;
    out["replicates"] = r.replicates;
    out["diverged_replicates"] = r.diverged_replicates;
    out["median_final_distance"] = number(r.median_final_distance);
    out["initial_a"] = states_json(r.initial_a);
    out["initial_b"] = states_json(r.initial_b);
    out["final_distances"] = numbers(r.final_distances);
    out["distances"] = numbers(r.distances);
    return out;
}

Json moments_json(const MomentReport& r)
{
    Json out = Json::object();
    out["sample_size"] = r.sample_size;
    out["T"] = r.T;
    out["burn_in"] = r.burn_in;
    out["replicates"] = r.replicates;
    Json poly = Json::array();
    for (const PolynomialMoment& m : r.polynomial) {
        Json e = Json::object();
        e["r"] = m.r;
        e["estimate"] = number(m.estimate);
        e["std_error"] = number(m.std_error);
        poly.push_back(e);
    }
    out["polynomial"] = poly;
    Json expo = Json::array();
    for (const ExponentialMoment& m : r.exponential) {
        Json e = Json::object();
        e["delta"] = m.delta;
        e["log_estimate"] = number(m.log_estimate);
        e["std_error"] = number(m.std_error);
        e["top10_share"] = number(m.top10_share);
        e["saturated"] = m.saturated;
        expo.push_back(e);
    }
    out["exponential"] = expo;
    return out;
}

Json lineage_json(const ExperimentConfig& config)
{
    Json out = Json::object();
    out["version"] = std::string(kVersion);
    out["master_seed"] = config.seed;
    std::size_t replicates = 1;
    if (config.kind == ExperimentKind::Couple || config.kind == ExperimentKind::Moments)
        replicates = config.replicates;
    if (config.kind == ExperimentKind::Check)
        replicates = 0;
    // Replicate ids run from 0 to replicates - 1.
    out["replicates"] = replicates;
    out["stream"] =
        "xoshiro256** per step, keyed by (master_seed, replicate_id, time_index)";
    return out;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f)
        throw std::runtime_error("failed writing " + path.string());
}

std::string fmt(double x)
{
    std::ostringstream s;
    s << std::setprecision(6) << x;
    return s.str();
}

void print_coupling(const CouplingReport& r, std::ostream& out)
{
    out << "coupling: status " << to_string(r.status) << ", replicates " << r.replicates
        << ", diverged " << r.diverged_replicates << "\n"
        << "  initial distance   " << fmt(r.initial_distance) << "\n"
        << "  distance at n      " << fmt(r.distances.back()) << "\n"
        << "  median final       " << fmt(r.median_final_distance) << "\n"
        << "  fitted rate        " << fmt(r.fitted_rate) << " (steps " << r.fit_start << ".."
        << r.fit_end << ")\n";
}

void print_moments(const MomentReport& r, std::ostream& out)
{
    out << "moments of |Y_t|_1 over " << r.sample_size << " samples (" << r.replicates
        << " replicates)\n";
    for (const PolynomialMoment& m : r.polynomial)
        out << "  E|Y|^" << fmt(m.r) << "  " << fmt(m.estimate) << " +- " << fmt(m.std_error)
            << "\n";
    for (const ExponentialMoment& m : r.exponential)
        out << "  log E exp(" << fmt(m.delta) << "|Y|)  " << fmt(m.log_estimate) << " +- "
            << fmt(m.std_error) << (m.saturated ? "  SATURATED" : "") << " (top-10 share "
            << fmt(m.top10_share) << ")\n";
}

}  // namespace

void print_conditions(const ConditionReport& report, std::ostream& out)
{
    out << "model: " << report.model_kind << "\n";
    for (const Diagnostic& d : report.diagnostics)
        out << "  " << std::left << std::setw(14) << d.name << std::setw(12) << fmt(d.value)
            << d.expression << (d.boundary ? "  [boundary]" : "") << "\n";
    for (const VerdictEntry& v : report.verdicts)
        out << "  " << std::left << std::setw(22) << v.name << std::setw(14)
            << to_string(v.verdict) << (v.boundary ? "[boundary]" : "") << "\n";
    for (const std::string& s : report.implications)
        out << "  => " << s << "\n";
    for (const std::string& s : report.notes)
        out << "  note: " << s << "\n";
    out << std::right;
}

int run(const ExperimentConfig& original, const RunOptions& options, std::ostream& out,
        std::ostream& err)
{
    ExperimentConfig config = original;
    if (options.seed)
        config.seed = *options.seed;
    if (options.output_dir)
        config.output_dir = *options.output_dir;
    if (options.command && *options.command != config.kind) {
        if (*options.command != ExperimentKind::Check) {
            err << "error: the config describes a " << to_string(config.kind)
                << " experiment, not " << to_string(*options.command) << "\n";
            return kExitRuntimeError;
        }
        config.kind = ExperimentKind::Check;
    }
    const std::size_t jobs = std::max<std::size_t>(1, options.jobs);

    const ConditionReport conditions = check(config.model);
    Json results = Json::object();
    results["conditions"] = conditions_json(conditions);
    print_conditions(conditions, out);

    std::vector<std::string> failing;
    for (const std::string& name : config.require) {
        const VerdictEntry* v = conditions.verdict(name);
        if (v == nullptr || v->verdict != Verdict::Holds)
            failing.push_back(name);
    }
    for (const std::string& name : failing)
        out << "required condition does not hold: " << name << "\n";

    int status = kExitOk;
    const fs::path dir(config.output_dir);
    try {
        fs::create_directories(dir);
        if (options.strict && !failing.empty()) {
            results["skipped"] = "required conditions do not hold";
            status = kExitConditionFails;
        } else {
            try {
                switch (config.kind) {
                case ExperimentKind::Check:
                    break;
                case ExperimentKind::Simulate: {
                    const SamplePath path = simulate(config.model, config.T, config.burn_in,
                                                     config.seed, 0);
                    Json sim = Json::object();
                    sim["T"] = config.T;
                    sim["burn_in"] = config.burn_in;
                    sim["mean_counts"] = numbers(path.mean_counts());
                    sim["csv"] = config.csv ? Json("path.csv") : Json(nullptr);
                    results["simulation"] = sim;
                    if (config.csv)
                        write_file(dir / "path.csv", to_csv(path));
                    out << "simulated " << config.T << " steps after burn-in " << config.burn_in
                        << "; mean counts";
                    for (double m : path.mean_counts())
                        out << " " << fmt(m);
                    out << "\n";
                    break;
                }
                case ExperimentKind::Couple: {
                    const CouplingReport r =
                        couple(config.model, config.n, StateWindow(config.window_a),
                               StateWindow(config.window_b), config.seed, config.replicates,
                               jobs);
                    results["coupling"] = coupling_json(r);
                    print_coupling(r, out);
                    break;
                }
                case ExperimentKind::Moments: {
                    const MomentReport r = monte_carlo_moments(
                        config.model, config.r_values, config.delta_values, config.T,
                        config.burn_in, config.replicates, config.seed, jobs);
                    results["moments"] = moments_json(r);
                    print_moments(r, out);
                    break;
                }
                }
            } catch (const DivergenceError& e) {
                Json error = Json::object();
                error["type"] = "divergence";
                error["time_index"] = e.time_index();
                error["message"] = e.what();
                results["error"] = error;
                err << "error: " << e.what() << "\n";
                status = kExitRuntimeError;
            } catch (const Error& e) {
                Json error = Json::object();
                error["type"] = "runtime";
                error["message"] = e.what();
                results["error"] = error;
                err << "error: " << e.what() << "\n";
                status = kExitRuntimeError;
            }
        }

        Json report = Json::object();
        report["config"] = config_to_json(config);
        report["lineage"] = lineage_json(config);
        report["results"] = results;
        write_file(dir / "report.json", report.dump(2) + "\n");
        out << "report written to " << (dir / "report.json").string() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return status;
}

int run_file(const std::string& path, const RunOptions& options, std::ostream& out,
             std::ostream& err)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        err << "error: cannot read config " << path << "\n";
        return kExitRuntimeError;
    }
    std::ostringstream text;
    text << f.rdbuf();
    try {
        const ExperimentConfig config = parse_config(text.str());
        return run(config, options, out, err);
    } catch (const ConfigError& e) {
        err << path << ": " << e.what() << "\n";
        return kExitRuntimeError;
    }
}

}  // namespace countar
