#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "countar/config.hpp"

using namespace countar;

namespace {

const char* kMinimal = R"({
  "seed": 5,
  "model": {"kind": "ingarch", "p": 1, "q": 1, "d": [1.0], "A": [[[0.2]]], "B": [[[0.3]]]},
  "experiment": {"kind": "check"}
})";

std::vector<ConfigIssue> issues_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ValidationError& e) {
        return e.issues();
    }
    return {};
}

bool has_issue(const std::vector<ConfigIssue>& issues, const std::string& path,
               const std::string& fragment = "")
{
    for (const ConfigIssue& i : issues)
        if (i.path == path && i.message.find(fragment) != std::string::npos)
            return true;
    return false;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("minimal INGARCH config gets defaults")
{
    const ExperimentConfig c = parse_config(kMinimal);
    CHECK(c.seed == 5);
    CHECK(c.kind == ExperimentKind::Check);
    CHECK(c.burn_in == 1000);
    CHECK(c.output_dir == "out");
    CHECK(c.require == std::vector<std::string>{"stationarity"});
    const auto& s = std::get<IngarchSpec>(c.model);
    CHECK(s.dependence.kind() == SchemeKind::Independent);
    CHECK(s.d == Vector{1.0});
}

TEST_CASE("missing seed is reported")
{
    const auto issues = issues_of(R"({
      "model": {"kind": "ingarch", "p": 1, "q": 1, "d": [1.0], "A": [[[0.2]]], "B": [[[0.3]]]},
      "experiment": {"kind": "check"}
    })");
    CHECK(has_issue(issues, "/seed", "seed required"));
}

TEST_CASE("Bernoulli mean above one names the entry")
{
    const auto issues = issues_of(R"({
      "seed": 1,
      "model": {"kind": "ginar", "p": 2, "q": 1, "A": [[[0.2, 0.1], [1.5, 0.3]]],
                "immigration": {"mean": [1.0, 1.0]}},
      "experiment": {"kind": "check"}
    })");
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].path == "/model/A/0/1/0");
}

TEST_CASE("validation errors are batched")
{
    const auto issues = issues_of(R"({
      "model": {"kind": "ingarch", "p": 2, "q": 1, "d": [1.0, -1.0],
                "A": [[[0.2, 0.1], [0.0]]], "B": [[[0.3, -0.05], [0.1, 0.25]]],
                "colour": "blue"},
      "experiment": {"kind": "simulate", "T": 0}
    })");
    CHECK(has_issue(issues, "/seed"));
    CHECK(has_issue(issues, "/model/d/1", "nonnegative"));
    CHECK(has_issue(issues, "/model/A/0/1"));
    CHECK(has_issue(issues, "/model/B/0/0/1", "nonnegative"));
    CHECK(has_issue(issues, "/model/colour", "unknown key"));
    CHECK(has_issue(issues, "/experiment/T"));
    CHECK(issues.size() >= 6);
}

TEST_CASE("correlation matrices must be PSD at load time")
{
    const auto issues = issues_of(R"({
      "seed": 1,
      "model": {"kind": "ingarch", "p": 2, "q": 1, "d": [1.0, 1.0],
                "A": [[[0.2, 0.1], [0.0, 0.2]]], "B": [[[0.3, 0.0], [0.1, 0.2]]],
                "dependence": {"scheme": "gaussian_copula", "correlation": [[1.0, 1.5], [1.5, 1.0]]}},
      "experiment": {"kind": "check"}
    })");
    CHECK(has_issue(issues, "/model/dependence/correlation"));
}

TEST_CASE("unknown names are rejected")
{
    CHECK(has_issue(issues_of(R"({"seed": 1, "model": {"kind": "garch"}, "experiment": {"kind": "check"}})"),
                    "/model/kind"));
    const auto issues = issues_of(R"({
      "seed": 1,
      "model": {"kind": "ingarch", "p": 1, "q": 1, "d": [1.0], "A": [[[0.2]]], "B": [[[0.3]]]},
      "experiment": {"kind": "check", "require": ["exp_moments", "stationarity"]}
    })");
    CHECK(has_issue(issues, "/experiment/require/0", "unknown verdict"));
    CHECK(has_issue(issues_of(R"({"seed": -3, "model": {"kind": "ingarch", "p": 1, "q": 1, "d": [1.0], "A": [[[0.2]]], "B": [[[0.3]]]}, "experiment": {"kind": "check"}})"),
                    "/seed", "nonnegative"));
    CHECK(has_issue(issues_of(R"({"seed": 1, "model": {"kind": "ingarch", "p": 1, "q": 1, "d": [1.0], "A": [[[0.2]]], "B": [[[0.3]]]}, "experiment": {"kind": "check", "T": 5}})"),
                    "/experiment/T", "unknown key"));
}

TEST_CASE("parse errors carry line and column")
{
    try {
        parse_config("{\n  \"seed\": 1,\n  \"model\": [1, 2,,]\n}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 18);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("couple windows are parsed newest first with defaults")
{
    const ExperimentConfig c = parse_config(R"({
      "seed": 2,
      "model": {"kind": "loglinear", "p": 1, "q": 2, "d": [0.1],
                "A": [[[0.2]], [[-0.1]]], "B": [[[0.1]], [[0.1]]]},
      "experiment": {"kind": "couple", "window_b": [{"y": [4], "mu": [1.5]}, {"y": [2], "mu": [0.5]}]}
    })");
    CHECK(c.kind == ExperimentKind::Couple);
    CHECK(c.n == 200);
    REQUIRE(c.window_b.size() == 2);
    CHECK(c.window_b[0].counts == CountVector{4});
    CHECK(c.window_b[1].latent == Vector{0.5});
    REQUIRE(c.window_a.size() == 2);
    CHECK(c.window_a[0].counts == CountVector{0});

    const auto issues = issues_of(R"({
      "seed": 2,
      "model": {"kind": "ingarch", "p": 1, "q": 1, "d": [0.1], "A": [[[0.2]]], "B": [[[0.1]]]},
      "experiment": {"kind": "couple", "window_a": [{"y": [1.5], "lambda": [-1.0]}]}
    })");
    CHECK(has_issue(issues, "/experiment/window_a/0/y/0"));
    CHECK(has_issue(issues, "/experiment/window_a/0/lambda/0"));
}

TEST_CASE("serialization is idempotent")
{
    for (const auto& entry : std::filesystem::directory_iterator(COUNTAR_CONFIG_DIR)) {
        CAPTURE(entry.path().string());
        const ExperimentConfig c = parse_config(read_file(entry.path()));
        const std::string once = serialize_config(c);
        const std::string twice = serialize_config(parse_config(once));
        CHECK(once == twice);
    }
    const std::string minimal = serialize_config(parse_config(kMinimal));
    CHECK(minimal.find("\"dependence\"") != std::string::npos);
    CHECK(serialize_config(parse_config(minimal)) == minimal);
}

TEST_CASE("every shipped config parses")
{
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(COUNTAR_CONFIG_DIR)) {
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(parse_config(read_file(entry.path())));
        ++count;
    }
    CHECK(count >= 7);
}
