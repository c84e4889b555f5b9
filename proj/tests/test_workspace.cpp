#include <catch2/catch_amalgamated.hpp>

#include "twinmet/workspace.hpp"

using namespace twinmet;

namespace {

const char* kMiniConfig = R"JSON({
  "seed": 11,
  "parameters": {"a": 3.0},
  "tolerances": {"einstein": 1e-8},
  "charts": [
    {"name": "s2", "coords": ["th", "ph"], "domain": [[0.4, 2.7], [0.3, 6.0]]},
    {"name": "line", "coords": ["t"], "domain": [[-0.8, 0.8]]},
    {"name": "flat3", "coords": ["q1", "q2", "q3"]}
  ],
  "holomorphic_metrics": [
    {"name": "cs2", "builtin": "complex_sphere", "m": 2}
  ],
  "metrics": [
    {"name": "sphere", "chart": "s2", "components": [["1", "0"], ["0", "sin(th)^2"]]},
    {"name": "scaled", "chart": "s2", "components": [["a", "0"], ["0", "a*sin(th)^2"]]},
    {"name": "line_m", "chart": "line", "components": [["1"]]},
    {"name": "flat3_m", "chart": "flat3", "constant": [[1,0,0],[0,1,0],[0,0,1]]},
    {"name": "warped", "product": {"factor1": "line_m", "factor2": "flat3_m", "warp": "t"}},
    {"name": "ak", "realify": "cs2"}
  ],
  "k_fields": [
    {"name": "jak", "builtin": "canonical_j", "metric": "ak"},
    {"name": "pw", "metric": "warped", "epsilon": 1, "sigma": 1,
     "constant": [[1,0,0,0],[0,-1,0,0],[0,0,-1,0],[0,0,0,-1]]}
  ],
  "lagrangians": [
    {"name": "akl", "n": 4, "coefficients": [4, 0, 1]}
  ],
  "sample_plans": [
    {"name": "small", "chart": "s2", "count": 16, "seed": 3}
  ],
  "suites": [
    {"name": "good", "checks": [
      {"name": "sphere-einstein", "type": "einstein", "metric": "sphere",
       "expect_gamma": 1.0, "plan": "small"},
      {"name": "ak-palatini", "type": "palatini", "metric": "ak", "k_field": "jak",
       "lagrangian": "akl", "root": -2.0, "points": 16}
    ]},
    {"name": "sabotage", "checks": [
      {"name": "decomposability", "type": "kahler_like", "metric": "warped", "k_field": "pw"}
    ]}
  ]
})JSON";

} // namespace

TEST_CASE("workspace parses and cross-references resolve") {
    auto ws = Workspace::from_json_text(kMiniConfig);
    REQUIRE(ws.default_seed == 11);
    REQUIRE(ws.charts.count("s2") == 1);
    REQUIRE(ws.metrics.count("sphere") == 1);
    REQUIRE(ws.metrics.count("warped") == 1);
    REQUIRE(ws.metrics.count("ak") == 1);
    REQUIRE(ws.k_fields.count("jak") == 1);
    REQUIRE(ws.metric("ak").dim() == 4);
    // parameters bind inside expressions
    Eigen::VectorXd p(2);
    p << 1.0, 2.0;
    REQUIRE(ws.metric("scaled").value(p)(0, 0) == 3.0);
    // registered derived charts
    REQUIRE(ws.charts.count(ws.metric("warped").chart().name()) == 1);

    REQUIRE_THROWS_AS(ws.metric("nope"), ConfigError);
    REQUIRE_THROWS_AS(ws.suite("nope"), ConfigError);
}

TEST_CASE("config errors: duplicates, bad references, bad json") {
    REQUIRE_THROWS_AS(Workspace::from_json_text("{ not json"), ConfigError);
    REQUIRE_THROWS_AS(Workspace::from_json_text(R"({"charts": [
        {"name": "a", "coords": ["x"]}, {"name": "a", "coords": ["y"]}]})"),
                      ConfigError);
    REQUIRE_THROWS_AS(Workspace::from_json_text(R"({"metrics": [
        {"name": "m", "chart": "missing", "components": [["1"]]}]})"),
                      ConfigError);
}

TEST_CASE("suites run and reports are byte-deterministic") {
    auto ws = Workspace::from_json_text(kMiniConfig);
    RunOptions opts;
    opts.seed = 5;
    auto doc1 = run_suite(ws, "good", opts);
    auto doc2 = run_suite(ws, "good", opts);
    REQUIRE(doc1.pass);
    REQUIRE(doc1.to_structured() == doc2.to_structured());
    // checks are reported in name order
    REQUIRE(doc1.checks.size() == 2);
    REQUIRE(doc1.checks[0].name == "ak-palatini");
    REQUIRE(doc1.checks[1].name == "sphere-einstein");
    // a different seed gives a valid (possibly different) document
    RunOptions other;
    other.seed = 9;
    auto doc3 = run_suite(ws, "good", other);
    REQUIRE(doc3.pass);
    REQUIRE(doc3.seed == 9);
}

TEST_CASE("sabotaged warp fails the decomposability check") {
    auto ws = Workspace::from_json_text(kMiniConfig);
    auto doc = run_suite(ws, "sabotage", {});
    REQUIRE_FALSE(doc.pass);
    REQUIRE(doc.checks.size() == 1);
    REQUIRE_FALSE(doc.checks[0].pass);
    REQUIRE(doc.checks[0].residuals.at("nabla_k") > 1e-3);
}

TEST_CASE("tolerance overrides flip a marginal check") {
    auto ws = Workspace::from_json_text(kMiniConfig);
    RunOptions strict;
    strict.tolerance_overrides["sphere-einstein"] = 1e-30; // impossible bound
    auto doc = run_suite(ws, "good", strict);
    bool sphere_failed = false;
    for (const auto& c : doc.checks)
        if (c.name == "sphere-einstein") sphere_failed = !c.pass;
    REQUIRE(sphere_failed);
}

TEST_CASE("structured report renders and carries 17-digit numbers") {
    auto ws = Workspace::from_json_text(kMiniConfig);
    auto doc = run_suite(ws, "good", {});
    const std::string s = doc.to_structured();
    REQUIRE(s.find("\"schema\": \"twinmet-report/1\"") != std::string::npos);
    REQUIRE(s.find("gamma_fit") != std::string::npos);
    // gamma_fit of the unit sphere prints as a full-precision value near 1
    REQUIRE(s.find("0.9999999999") != std::string::npos);
    const std::string t = doc.to_text();
    REQUIRE(t.find("overall: pass") != std::string::npos);
}
