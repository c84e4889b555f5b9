#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinmet/antikahler.hpp"
#include "twinmet/fixtures.hpp"
#include "twinmet/palatini.hpp"
#include "twinmet/product_structures.hpp"
#include "twinmet/report.hpp"
#include "twinmet/scalar_root.hpp"

namespace twinmet {

using json = nlohmann::json;

struct SamplePlanSpec {
    std::string chart;
    std::size_t count = 64;
    std::optional<std::uint64_t> seed;
};

struct CheckSpec {
    std::string name;
    std::string type;
    json args;
};

struct SuiteSpec {
    std::string name;
    std::vector<CheckSpec> checks;
};

namespace detail {

template <class T>
const T& named(const std::map<std::string, T>& reg, const std::string& name,
               const char* what) {
    auto it = reg.find(name);
    if (it == reg.end()) throw ConfigError(std::string("unknown ") + what + " '" + name + "'");
    return it->second;
}

template <class T>
void insert_unique(std::map<std::string, T>& reg, const std::string& name, T v,
                   const char* what) {
    if (!reg.emplace(name, std::move(v)).second)
        throw ConfigError(std::string("duplicate ") + what + " name '" + name + "'");
}

inline std::string require_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ConfigError(std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
}

} // namespace detail

/// The declarative workspace: charts, fields, Lagrangians, plans and suites,
/// all by name in a single document.
class Workspace {
public:
    std::map<std::string, ChartSpec> charts;
    std::map<std::string, MetricField> metrics;
    std::map<std::string, KField> k_fields;
    std::map<std::string, HolomorphicMetricField> holomorphics;
    std::map<std::string, LagrangianSpec> lagrangians;
    std::map<std::string, SamplePlanSpec> plans;
    std::map<std::string, SuiteSpec> suites;
    std::map<std::string, double> tolerances;
    std::map<std::string, double> parameters;
    std::map<std::string, int> product_first_dim; // product metrics: dim of factor1
    std::uint64_t default_seed = 0;

    static Workspace from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return from_json_text(ss.str());
    }

    static Workspace from_json_text(const std::string& text);

    const ChartSpec& chart(const std::string& n) const {
        return detail::named(charts, n, "chart");
    }
    const MetricField& metric(const std::string& n) const {
        return detail::named(metrics, n, "metric");
    }
    const KField& k_field(const std::string& n) const {
        return detail::named(k_fields, n, "k_field");
    }
    const HolomorphicMetricField& holomorphic(const std::string& n) const {
        return detail::named(holomorphics, n, "holomorphic_metric");
    }
    const LagrangianSpec& lagrangian(const std::string& n) const {
        return detail::named(lagrangians, n, "lagrangian");
    }
    const SuiteSpec& suite(const std::string& n) const {
        return detail::named(suites, n, "suite");
    }

private:
    void register_chart_if_new(const ChartSpec& c) {
        if (charts.find(c.name()) == charts.end()) charts.emplace(c.name(), c);
    }

    ChartSpec parse_chart(const json& j, const std::string& name) const {
        if (!j.contains("coords")) throw ConfigError("chart '" + name + "' needs coords");
        std::vector<std::string> coords = j.at("coords").get<std::vector<std::string>>();
        std::vector<Interval> dom;
        if (j.contains("domain")) {
            for (const auto& iv : j.at("domain")) {
                if (!iv.is_array() || iv.size() != 2)
                    throw ConfigError("chart '" + name + "': domain entries are [lo, hi]");
                dom.push_back({iv[0].get<double>(), iv[1].get<double>()});
            }
        }
        return ChartSpec::make(name, std::move(coords), std::move(dom));
    }

    std::vector<std::vector<ScalarExpr>> parse_components(const json& j, const ChartSpec& chart,
                                                          const std::string& what,
                                                          int expected_rows = -1) const {
        if (!j.is_array()) throw ConfigError(what + ": components must be a matrix of strings");
        std::vector<std::vector<ScalarExpr>> comps;
        for (const auto& row : j) {
            std::vector<ScalarExpr> r;
            for (const auto& cell : row)
                r.push_back(parse_scalar(cell.get<std::string>(), chart, parameters));
            comps.push_back(std::move(r));
        }
        const int want = expected_rows >= 0 ? expected_rows : chart.dim();
        if (comps.size() != static_cast<std::size_t>(want))
            throw ConfigError(what + ": component matrix has the wrong dimension");
        return comps;
    }

    void build_metric(const json& j);
    void build_k_field(const json& j);
    void build_holomorphic(const json& j);
};

inline void Workspace::build_holomorphic(const json& j) {
    const std::string name = detail::require_string(j, "name");
    if (j.contains("builtin")) {
        const std::string b = j.at("builtin").get<std::string>();
        if (b == "complex_sphere") {
            const int m = j.value("m", 2);
            detail::insert_unique(holomorphics, name, complex_sphere_metric(m),
                                  "holomorphic_metric");
        } else {
            throw ConfigError("unknown holomorphic builtin '" + b + "'");
        }
    } else if (j.contains("real_chart")) {
        ChartSpec rc = parse_chart(j.at("real_chart"), name + "_re");
        if (rc.dim() % 2 != 0) throw ConfigError(name + ": real chart dimension must be even");
        auto comps = parse_components(j.at("components"), rc, name, rc.dim() / 2);
        detail::insert_unique(holomorphics, name,
                              HolomorphicMetricField::from_real_chart(rc, std::move(comps)),
                              "holomorphic_metric");
    } else {
        ChartSpec zc = parse_chart(j, name + "_z");
        auto comps = parse_components(j.at("components"), zc, name);
        detail::insert_unique(holomorphics, name,
                              HolomorphicMetricField::from_holomorphic(zc, std::move(comps)),
                              "holomorphic_metric");
    }
    register_chart_if_new(holomorphics.at(name).real_chart());
}

inline void Workspace::build_metric(const json& j) {
    const std::string name = detail::require_string(j, "name");
    if (j.contains("product")) {
        const json& p = j.at("product");
        ProductSpec spec{metric(detail::require_string(p, "factor1")),
                         metric(detail::require_string(p, "factor2")), std::nullopt};
        if (p.contains("warp")) {
            spec.warp = parse_scalar(p.at("warp").get<std::string>(), spec.factor1.chart(),
                                     parameters);
            detail::insert_unique(metrics, name, build_warped(spec), "metric");
        } else {
            ProductBuild built = build_product(spec);
            detail::insert_unique(metrics, name, built.g, "metric");
            product_first_dim[name] = spec.factor1.dim();
        }
    } else if (j.contains("realify")) {
        const auto& G = holomorphic(j.at("realify").get<std::string>());
        SamplePlan plan = SamplePlan::halton(G.real_chart(), 32, default_seed);
        RealifiedMetric R = realify(G, plan);
        detail::insert_unique(metrics, name, R.metric, "metric");
    } else if (j.contains("constant")) {
        const ChartSpec& c = chart(detail::require_string(j, "chart"));
        const auto rows = j.at("constant");
        Eigen::MatrixXd m(c.dim(), c.dim());
        for (int i = 0; i < c.dim(); ++i)
            for (int k = 0; k < c.dim(); ++k) m(i, k) = rows.at(i).at(k).get<double>();
        detail::insert_unique(metrics, name, MetricField::constant(c, m), "metric");
    } else {
        const ChartSpec& c = chart(detail::require_string(j, "chart"));
        auto comps = parse_components(j.at("components"), c, name);
        detail::insert_unique(metrics, name, MetricField::make(c, std::move(comps)), "metric");
    }
    register_chart_if_new(metrics.at(name).chart());
}

inline void Workspace::build_k_field(const json& j) {
    const std::string name = detail::require_string(j, "name");
    const ChartSpec* c = nullptr;
    std::string metric_ref;
    if (j.contains("metric")) {
        metric_ref = j.at("metric").get<std::string>();
        c = &metric(metric_ref).chart();
    } else if (j.contains("chart")) {
        c = &chart(j.at("chart").get<std::string>());
    } else {
        throw ConfigError("k_field '" + name + "' needs a chart or metric reference");
    }

    if (j.contains("builtin")) {
        const std::string b = j.at("builtin").get<std::string>();
        if (b == "canonical_j") {
            if (c->dim() % 2 != 0) throw ConfigError("canonical_j needs an even dimension");
            detail::insert_unique(k_fields, name,
                                  KField::constant(*c, fixtures::j0_xy(c->dim() / 2), -1, -1),
                                  "k_field");
        } else if (b == "product_split") {
            auto it = product_first_dim.find(metric_ref);
            if (it == product_first_dim.end())
                throw ConfigError("product_split needs a product metric reference");
            Eigen::MatrixXd pm = Eigen::MatrixXd::Identity(c->dim(), c->dim());
            for (int i = it->second; i < c->dim(); ++i) pm(i, i) = -1.0;
            detail::insert_unique(k_fields, name, KField::constant(*c, pm, 1, 1), "k_field");
        } else if (b == "identity") {
            detail::insert_unique(
                k_fields, name,
                KField::constant(*c, Eigen::MatrixXd::Identity(c->dim(), c->dim()), 1, 1),
                "k_field");
        } else if (b == "shear") {
            detail::insert_unique(k_fields, name, fixtures::shear_k4(*c), "k_field");
        } else {
            throw ConfigError("unknown k_field builtin '" + b + "'");
        }
        return;
    }

    const int eps = j.value("epsilon", 1);
    const int sig = j.value("sigma", 1);
    if (j.contains("constant")) {
        const auto rows = j.at("constant");
        Eigen::MatrixXd m(c->dim(), c->dim());
        for (int i = 0; i < c->dim(); ++i)
            for (int k = 0; k < c->dim(); ++k) m(i, k) = rows.at(i).at(k).get<double>();
        detail::insert_unique(k_fields, name, KField::constant(*c, m, eps, sig), "k_field");
    } else {
        auto comps = parse_components(j.at("components"), *c, name);
        detail::insert_unique(k_fields, name, KField::make(*c, std::move(comps), eps, sig),
                              "k_field");
    }
}

inline Workspace Workspace::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    Workspace ws;
    try {
        ws.default_seed = doc.value("seed", 0ULL);
        if (doc.contains("parameters"))
            for (const auto& [k, v] : doc.at("parameters").items())
                ws.parameters[k] = v.get<double>();
        if (doc.contains("tolerances"))
            for (const auto& [k, v] : doc.at("tolerances").items())
                ws.tolerances[k] = v.get<double>();
        if (doc.contains("charts"))
            for (const auto& j : doc.at("charts")) {
                const std::string name = detail::require_string(j, "name");
                detail::insert_unique(ws.charts, name, ws.parse_chart(j, name), "chart");
            }
        if (doc.contains("holomorphic_metrics"))
            for (const auto& j : doc.at("holomorphic_metrics")) ws.build_holomorphic(j);
        if (doc.contains("metrics"))
            for (const auto& j : doc.at("metrics")) ws.build_metric(j);
        if (doc.contains("k_fields"))
            for (const auto& j : doc.at("k_fields")) ws.build_k_field(j);
        if (doc.contains("lagrangians"))
            for (const auto& j : doc.at("lagrangians")) {
                const std::string name = detail::require_string(j, "name");
                LagrangianSpec spec;
                spec.n = j.at("n").get<int>();
                spec.f = j.at("coefficients").get<std::vector<double>>();
                spec.validate();
                detail::insert_unique(ws.lagrangians, name, std::move(spec), "lagrangian");
            }
        if (doc.contains("sample_plans"))
            for (const auto& j : doc.at("sample_plans")) {
                const std::string name = detail::require_string(j, "name");
                SamplePlanSpec sp;
                sp.chart = detail::require_string(j, "chart");
                sp.count = j.value("count", 64U);
                if (j.contains("seed")) sp.seed = j.at("seed").get<std::uint64_t>();
                ws.chart(sp.chart); // must resolve
                detail::insert_unique(ws.plans, name, std::move(sp), "sample_plan");
            }
        if (doc.contains("suites"))
            for (const auto& j : doc.at("suites")) {
                SuiteSpec s;
                const std::string suite_name = detail::require_string(j, "name");
                s.name = suite_name;
                for (const auto& cj : j.at("checks")) {
                    CheckSpec c;
                    c.name = detail::require_string(cj, "name");
                    c.type = detail::require_string(cj, "type");
                    c.args = cj;
                    s.checks.push_back(std::move(c));
                }
                detail::insert_unique(ws.suites, suite_name, std::move(s), "suite");
            }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config structure error: ") + e.what());
    }
    return ws;
}

// ---------------------------------------------------------------------------
// Suite runner
// ---------------------------------------------------------------------------

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::map<std::string, double> tolerance_overrides;
};

namespace detail {

struct RunContext {
    const Workspace& ws;
    std::uint64_t seed;
    const std::map<std::string, double>& overrides;
};

inline double resolve_tolerance(const RunContext& ctx, const CheckSpec& spec, double dflt) {
    double tol = dflt;
    if (auto it = ctx.ws.tolerances.find(spec.type); it != ctx.ws.tolerances.end())
        tol = it->second;
    if (auto it = ctx.ws.tolerances.find(spec.name); it != ctx.ws.tolerances.end())
        tol = it->second;
    if (spec.args.contains("tolerance")) tol = spec.args.at("tolerance").get<double>();
    if (auto it = ctx.overrides.find(spec.type); it != ctx.overrides.end()) tol = it->second;
    if (auto it = ctx.overrides.find(spec.name); it != ctx.overrides.end()) tol = it->second;
    return tol;
}

inline SamplePlan plan_for(const RunContext& ctx, const CheckSpec& spec, const ChartSpec& chart,
                           std::uint64_t& seed_out) {
    if (spec.args.contains("plan")) {
        const auto& sp = named(ctx.ws.plans, spec.args.at("plan").get<std::string>(),
                               "sample_plan");
        const ChartSpec& c = ctx.ws.chart(sp.chart);
        if (!c.same_as(chart))
            throw ConfigError("check '" + spec.name + "': plan chart does not match");
        seed_out = sp.seed.value_or(ctx.seed);
        return SamplePlan::halton(c, sp.count, seed_out);
    }
    seed_out = ctx.seed;
    return SamplePlan::halton(chart, spec.args.value("points", 64U), seed_out);
}

inline CheckResult run_check(const RunContext& ctx, const CheckSpec& spec) {
    CheckResult r;
    r.name = spec.name;
    r.type = spec.type;
    const auto t0 = std::chrono::steady_clock::now();
    const json& a = spec.args;
    const Workspace& ws = ctx.ws;

    if (spec.type == "einstein") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const double tol = resolve_tolerance(ctx, spec, 1e-8);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const EinsteinReport rep = einstein_residual(g, plan);
        r.residuals["einstein_residual"] = rep.max_residual;
        r.tolerances["einstein_residual"] = tol;
        r.residuals["gamma_fit"] = rep.gamma_fit;
        r.pass = rep.max_residual <= tol;
        if (a.contains("expect_gamma")) {
            const double gap = std::abs(rep.gamma_fit - a.at("expect_gamma").get<double>());
            r.residuals["gamma_gap"] = gap;
            r.tolerances["gamma_gap"] = tol;
            r.pass = r.pass && gap <= tol;
        }
    } else if (spec.type == "compat") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const double tol = resolve_tolerance(ctx, spec, 1e-9);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const CompatReport rep = check_k_compatibility(g, K, plan);
        r.residuals["involution_residual"] = rep.involution_residual;
        r.residuals["metric_residual"] = rep.metric_residual;
        r.tolerances["involution_residual"] = tol;
        r.tolerances["metric_residual"] = tol;
        r.pass = rep.pass(tol);
    } else if (spec.type == "kahler_like") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const double tol = resolve_tolerance(ctx, spec, 1e-8);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const KahlerLikeReport rep = kahler_like_check(g, K, plan, tol);
        r.residuals["nabla_k"] = rep.max_nabla_k;
        r.residuals["nijenhuis"] = rep.max_nijenhuis;
        r.tolerances["nabla_k"] = tol;
        r.pass = rep.passed;
    } else if (spec.type == "psi_symmetries") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const double tol = resolve_tolerance(ctx, spec, 1e-8);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const PsiSymmetryReport rep = psi_symmetry_check(g, K, plan);
        r.residuals["psi_k_pair"] = rep.k_pair;
        r.residuals["psi_swap"] = rep.swap;
        r.tolerances["psi_k_pair"] = tol;
        r.tolerances["psi_swap"] = tol;
        r.pass = rep.max() <= tol;
    } else if (spec.type == "curvature_identities") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const double tol = resolve_tolerance(ctx, spec, 1e-8);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const CurvatureIdentityReport rep = curvature_k_identities(g, K, plan, tol);
        r.residuals["commute"] = rep.commute;
        r.residuals["pair"] = rep.pair;
        r.residuals["ricci_pair"] = rep.ricci_pair;
        r.residuals["trace_identity"] = rep.trace_identity;
        for (const auto& k : {"commute", "pair", "ricci_pair", "trace_identity"})
            r.tolerances[k] = tol;
        r.pass = rep.max() <= tol;
    } else if (spec.type == "ricci_twin") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const double tol = resolve_tolerance(ctx, spec, 1e-8);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const RicciTwinReport rep = ricci_twin_check(g, K, plan, tol);
        r.residuals["twin_residual"] = rep.max_residual;
        r.residuals["lambda_fit"] = rep.lambda_fit;
        r.tolerances["twin_residual"] = tol;
        r.pass = rep.max_residual <= tol;
        if (a.contains("expect_lambda")) {
            const double gap = std::abs(rep.lambda_fit - a.at("expect_lambda").get<double>());
            r.residuals["lambda_gap"] = gap;
            r.tolerances["lambda_gap"] = tol;
            r.pass = r.pass && gap <= tol;
        }
    } else if (spec.type == "nijenhuis_nonzero") {
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const double min_norm = a.value("min_norm", 1e-3);
        Eigen::VectorXd pt(K.dim());
        const auto& coords = a.at("point");
        for (int i = 0; i < K.dim(); ++i) pt[i] = coords.at(i).get<double>();
        const double norm = nijenhuis(K, pt).max_abs();
        r.residuals["nijenhuis_norm"] = norm;
        r.tolerances["nijenhuis_norm_min"] = min_norm;
        r.plan_seed = ctx.seed;
        r.pass = norm >= min_norm;
    } else if (spec.type == "holomorphy") {
        const auto& G = ws.holomorphic(require_string(a, "holomorphic_metric"));
        const double tol = resolve_tolerance(ctx, spec, 1e-9);
        const SamplePlan plan = plan_for(ctx, spec, G.real_chart(), r.plan_seed);
        const double res = holomorphy_check(G, plan);
        r.residuals["cr_residual"] = res;
        r.tolerances["cr_residual"] = tol;
        r.pass = res <= tol;
    } else if (spec.type == "realify_check") {
        const auto& G = ws.holomorphic(require_string(a, "holomorphic_metric"));
        const double tol = resolve_tolerance(ctx, spec, 1e-8);
        const SamplePlan plan = plan_for(ctx, spec, G.real_chart(), r.plan_seed);
        const RealifiedMetric R = realify(G, plan, tol);
        const CompatReport cr = check_k_compatibility(R.metric, R.J, plan);
        const KahlerLikeReport kl = kahler_like_check(R.metric, R.J, plan, tol);
        const BlockCheckReport bc = antihermitian_block_check(R.metric, R.J, plan);
        r.residuals["compat"] = std::max(cr.involution_residual, cr.metric_residual);
        r.residuals["nabla_j"] = kl.max_nabla_k;
        r.residuals["g_mixed_block"] = bc.g_mixed;
        r.residuals["ricci_mixed_block"] = bc.ricci_mixed;
        for (const auto& k : {"compat", "nabla_j", "g_mixed_block", "ricci_mixed_block"})
            r.tolerances[k] = tol;
        bool sig_ok = true;
        for (const auto& p : plan.points()) {
            const auto sig = signature(SymMatrix::make(R.metric.value(p)));
            sig_ok = sig_ok && sig.first == G.m() && sig.second == G.m();
        }
        r.residuals["signature_split"] = sig_ok ? 0.0 : 1.0;
        r.tolerances["signature_split"] = 0.5;
        r.pass = kl.passed && bc.g_mixed <= tol && bc.ricci_mixed <= tol && sig_ok &&
                 cr.pass(tol);
    } else if (spec.type == "block_check") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const double tol = resolve_tolerance(ctx, spec, 1e-8);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const BlockCheckReport rep = antihermitian_block_check(g, K, plan);
        r.residuals["g_mixed_block"] = rep.g_mixed;
        r.residuals["ricci_mixed_block"] = rep.ricci_mixed;
        r.tolerances["g_mixed_block"] = tol;
        r.tolerances["ricci_mixed_block"] = tol;
        r.pass = rep.g_mixed <= tol && rep.ricci_mixed <= tol;
    } else if (spec.type == "complex_einstein") {
        const auto& G = ws.holomorphic(require_string(a, "holomorphic_metric"));
        const double tol = resolve_tolerance(ctx, spec, 1e-7);
        const SamplePlan plan = plan_for(ctx, spec, G.real_chart(), r.plan_seed);
        const ComplexEinsteinReport rep = complex_einstein_check(G, plan);
        r.residuals["complex_residual"] = rep.max_residual;
        r.residuals["real_residual"] = rep.real_max_residual;
        r.residuals["route_gamma_gap"] = rep.route_gamma_gap;
        r.residuals["gamma_fit"] = rep.gamma_fit.real();
        for (const auto& k : {"complex_residual", "real_residual", "route_gamma_gap"})
            r.tolerances[k] = tol;
        r.pass = rep.max_residual <= tol && rep.real_max_residual <= tol &&
                 rep.route_gamma_gap <= tol;
        if (a.contains("expect_gamma")) {
            const double gap = std::abs(rep.gamma_fit.real() - a.at("expect_gamma").get<double>());
            r.residuals["gamma_gap"] = gap;
            r.tolerances["gamma_gap"] = tol;
            r.pass = r.pass && gap <= tol;
        }
    } else if (spec.type == "palatini") {
        const auto& g = ws.metric(require_string(a, "metric"));
        const auto& K = ws.k_field(require_string(a, "k_field"));
        const auto& lag = ws.lagrangian(require_string(a, "lagrangian"));
        const double root = a.at("root").get<double>();
        const double tol = resolve_tolerance(ctx, spec, 1e-7);
        const SamplePlan plan = plan_for(ctx, spec, g.chart(), r.plan_seed);
        const PalatiniSolution sol = assemble(g, K, lag, root, plan, tol);
        const VerificationReport rep = verify_euler_lagrange(sol, plan, tol);
        for (const auto& e : rep.entries) {
            r.residuals[e.name] = e.residual;
            r.tolerances[e.name] = e.tolerance;
        }
        r.pass = rep.pass;
        if (a.value("control", true)) {
            // unscaled twin must break the metric equation
            PalatiniSolution bad = sol;
            bad.h = twin_field(g, K).as_metric();
            const double bad_res =
                verify_euler_lagrange(bad, plan, tol).residual("euler_lagrange_metric");
            const double min_fail = a.value("control_min", 1e-2);
            r.residuals["unscaled_control"] = bad_res;
            r.tolerances["unscaled_control_min"] = min_fail;
            r.pass = r.pass && bad_res >= min_fail;
        }
    } else if (spec.type == "congruence_random") {
        const double tol = resolve_tolerance(ctx, spec, 1e-9);
        const std::string kind = a.value("case", "product");
        const std::size_t count = a.value("count", 100U);
        std::vector<int> dims;
        if (a.contains("dims")) dims = a.at("dims").get<std::vector<int>>();
        else if (kind == "complex") dims = {2, 4, 6, 8};
        else dims = {2, 3, 4, 5, 6, 7, 8};
        std::mt19937_64 rng(ctx.seed * 1000003ULL + 17ULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> logu(-std::log(30.0), std::log(30.0));
        std::bernoulli_distribution coin(0.5);
        double worst = 0.0;
        bool k_invariant = true;
        for (std::size_t t = 0; t < count; ++t) {
            const int n = dims[t % dims.size()];
            Eigen::MatrixXd A(n, n), B(n, n);
            for (int i = 0; i < n; ++i)
                for (int jj = 0; jj < n; ++jj) {
                    A(i, jj) = gauss(rng);
                    B(i, jj) = gauss(rng);
                }
            Eigen::MatrixXd Q1 = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
            Eigen::MatrixXd Q2 = Eigen::HouseholderQR<Eigen::MatrixXd>(B).householderQ();
            Eigen::VectorXd sv(n);
            for (int i = 0; i < n; ++i) sv[i] = std::exp(logu(rng));
            Eigen::MatrixXd R0 = Q1 * sv.asDiagonal() * Q2;
            Eigen::MatrixXd Dh, Dg;
            int expect_k = 0;
            if (kind == "complex") {
                const int m = n / 2;
                Dh = Eigen::MatrixXd::Zero(n, n);
                Dh.topLeftCorner(m, m).setIdentity();
                Dh.bottomRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
                Dg = Eigen::MatrixXd::Zero(n, n);
                Dg.topRightCorner(m, m).setIdentity();
                Dg.bottomLeftCorner(m, m).setIdentity();
            } else {
                Eigen::VectorXd dh(n), dk(n);
                for (int i = 0; i < n; ++i) {
                    dh[i] = coin(rng) ? 1.0 : -1.0;
                    dk[i] = coin(rng) ? 1.0 : -1.0;
                    if (dk[i] < 0) ++expect_k;
                }
                Dh = dh.asDiagonal();
                Dg = dh.cwiseProduct(dk).asDiagonal();
            }
            const Eigen::MatrixXd h = R0.transpose() * Dh * R0;
            const Eigen::MatrixXd gmat = R0.transpose() * Dg * R0;
            const auto dec =
                simultaneous_congruence(SymMatrix::make(h), SymMatrix::make(gmat), tol);
            worst = std::max(worst, std::max(dec.residual_h, dec.residual_g));
            if (kind != "complex") k_invariant = k_invariant && (dec.k == expect_k);
        }
        r.plan_seed = ctx.seed;
        r.residuals["reconstruction_residual"] = worst;
        r.tolerances["reconstruction_residual"] = tol;
        r.residuals["k_invariant"] = k_invariant ? 0.0 : 1.0;
        r.tolerances["k_invariant"] = 0.5;
        r.pass = worst <= tol && k_invariant;
    } else if (spec.type == "root_classification") {
        const auto& lag = ws.lagrangian(require_string(a, "lagrangian"));
        const RootReport rep = classify_roots(lag);
        int admissible = 0;
        double rule_gap = 0.0;
        for (const auto& root : rep.roots)
            if (root.admissible) {
                ++admissible;
                rule_gap = std::max(rule_gap,
                                    std::abs(epsilon_of_root(root.c, lag) - root.epsilon));
            }
        r.plan_seed = ctx.seed;
        r.residuals["admissible_roots"] = admissible;
        r.residuals["epsilon_rule_gap"] = rule_gap;
        r.tolerances["epsilon_rule_gap"] = 1e-9;
        r.pass = rule_gap <= 1e-9 && !rep.identically_degenerate;
        if (a.contains("expect_admissible"))
            r.pass = r.pass && admissible == a.at("expect_admissible").get<int>();
    } else {
        throw ConfigError("unknown check type '" + spec.type + "'");
    }

    const auto t1 = std::chrono::steady_clock::now();
    r.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return r;
}

} // namespace detail

/// Run a named suite; checks execute and report in name order so the
/// structured document is deterministic.
inline ReportDocument run_suite(const Workspace& ws, const std::string& suite_name,
                                const RunOptions& opts = {}) {
    const SuiteSpec& suite = ws.suite(suite_name);
    detail::RunContext ctx{ws, opts.seed.value_or(ws.default_seed), opts.tolerance_overrides};
    ReportDocument doc;
    doc.suite = suite_name;
    doc.seed = ctx.seed;

    std::vector<CheckSpec> ordered = suite.checks;
    std::sort(ordered.begin(), ordered.end(),
              [](const CheckSpec& a, const CheckSpec& b) { return a.name < b.name; });
    for (const auto& spec : ordered) {
        CheckResult r;
        try {
            r = detail::run_check(ctx, spec);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            r.name = spec.name;
            r.type = spec.type;
            r.pass = false;
            r.residuals["check_error"] = 1.0;
            r.tolerances["check_error"] = 0.0;
        }
        doc.pass = doc.pass && r.pass;
        doc.checks.push_back(std::move(r));
    }
    return doc;
}

} // namespace twinmet
