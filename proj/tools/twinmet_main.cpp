#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twinmet/matrix_core.hpp"
#include "twinmet/workspace.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFail = 1;
constexpr int kNonResult = 2;
constexpr int kUsage = 64;
constexpr int kInternal = 70;

using twinmet::detail::fmt17;

Eigen::MatrixXd read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw twinmet::ConfigError("cannot open matrix file '" + path + "'");
    int n = 0;
    if (!(in >> n) || n <= 0)
        throw twinmet::ConfigError("matrix file '" + path + "' must start with the dimension");
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(in >> m(i, j)))
                throw twinmet::ConfigError("matrix file '" + path + "' is truncated");
    return m;
}

void print_matrix(std::ostream& os, const std::string& label, const Eigen::MatrixXd& m) {
    os << label << " (" << m.rows() << "x" << m.cols() << "):\n";
    for (int i = 0; i < m.rows(); ++i) {
        os << " ";
        for (int j = 0; j < m.cols(); ++j) os << " " << fmt17(m(i, j));
        os << "\n";
    }
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw twinmet::ConfigError("tolerance override must be NAME=VALUE: '" + kv + "'");
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

void write_file(const std::string& content, const std::string& out_path) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw twinmet::ConfigError("cannot write '" + out_path + "'");
    out << content;
}

int cmd_roots(const std::string& config_path, const std::string& lagrangian_name) {
    const auto ws = twinmet::Workspace::from_file(config_path);
    const auto& spec = ws.lagrangian(lagrangian_name);
    const auto rep = twinmet::classify_roots(spec);
    if (rep.identically_degenerate) {
        std::cout << "phi(S) = f'(S)S - (n/4)f(S) vanishes identically: every S solves the "
                     "scalar equation and no root selects a structure\n";
        return kNonResult;
    }
    std::cout << "roots of phi(S) = f'(S)S - (n/4)f(S), n = " << spec.n << ":\n";
    int admissible = 0;
    for (const auto& r : rep.roots) {
        std::cout << "  c = " << fmt17(r.c) << "  multiplicity " << r.multiplicity
                  << "  f'(c) = " << fmt17(r.f_prime_at_c)
                  << "  epsilon = " << fmt17(r.epsilon) << "  "
                  << (r.admissible ? "admissible" : "degenerate")
                  << (r.almost_tangent ? " (almost-tangent)" : "") << "\n";
        if (r.admissible && !r.almost_tangent) ++admissible;
    }
    return admissible > 0 ? kPass : kNonResult;
}

int cmd_congruence(const std::string& h_path, const std::string& g_path, double tol) {
    const Eigen::MatrixXd hm = read_matrix_file(h_path);
    const Eigen::MatrixXd gm = read_matrix_file(g_path);
    if (hm.rows() != gm.rows())
        throw twinmet::ConfigError("matrix dimensions differ: " + std::to_string(hm.rows()) +
                                   " vs " + std::to_string(gm.rows()));
    const auto h = twinmet::SymMatrix::make(hm);
    const auto g = twinmet::SymMatrix::make(gm);

    const auto kp = twinmet::k_from_pair(h, g);
    std::cout << "epsilon = " << fmt17(kp.epsilon) << "\n";
    const auto rescaled = twinmet::rescale_to_canonical(h, g, kp.epsilon);
    const auto dec = twinmet::simultaneous_congruence(rescaled.h, rescaled.g, tol);
    std::cout << "case: "
              << (dec.case_tag == twinmet::CongruenceDecomposition::Case::Product ? "product"
                                                                                  : "complex")
              << "\n";
    if (dec.case_tag == twinmet::CongruenceDecomposition::Case::Product)
        std::cout << "k (dimension of the -1 eigenspace) = " << dec.k << "\n";
    print_matrix(std::cout, "R", dec.R);
    print_matrix(std::cout, "D_h", dec.D_h);
    print_matrix(std::cout, "D_g", dec.D_g);
    std::cout << "residual_h = " << fmt17(dec.residual_h) << "\n";
    std::cout << "residual_g = " << fmt17(dec.residual_g) << "\n";
    return kPass;
}

int cmd_verify(const std::string& config_path, const std::string& suite,
               const std::vector<std::string>& tol_kvs, unsigned long long seed, bool seed_set,
               const std::string& out_path, const std::string& format) {
    const auto ws = twinmet::Workspace::from_file(config_path);
    twinmet::RunOptions opts;
    if (seed_set) opts.seed = seed;
    opts.tolerance_overrides = parse_overrides(tol_kvs);
    const auto doc = twinmet::run_suite(ws, suite, opts);
    if (!out_path.empty()) write_file(doc.to_structured(), out_path);
    std::cout << (format == "structured" ? doc.to_structured() : doc.to_text());
    return doc.pass ? kPass : kCheckFail;
}

int cmd_realify(const std::string& config_path, const std::string& name) {
    const auto ws = twinmet::Workspace::from_file(config_path);
    const auto& G = ws.holomorphic(name);
    const auto plan = twinmet::SamplePlan::halton(G.real_chart(), 32, ws.default_seed);
    const double cr = twinmet::holomorphy_check(G, plan);
    std::cout << "cr_residual = " << fmt17(cr) << "\n";
    if (cr > 1e-9) {
        std::cout << "components are not holomorphic; realification refused\n";
        return kCheckFail;
    }
    const auto R = twinmet::realify(G, plan);
    const auto sig =
        twinmet::signature(twinmet::SymMatrix::make(R.metric.value(plan.points()[0])));
    std::cout << "real dimension " << 2 * G.m() << ", signature (" << sig.first << ", "
              << sig.second << ")\n";
    std::cout << "components over chart " << R.metric.chart().name() << ":\n";
    for (int i = 0; i < R.metric.dim(); ++i)
        for (int j = i; j < R.metric.dim(); ++j)
            std::cout << "  g[" << R.metric.chart().coord_name(i) << "]["
                      << R.metric.chart().coord_name(j)
                      << "] = " << print_scalar(R.metric.component(i, j), R.metric.chart())
                      << "\n";
    print_matrix(std::cout, "J", R.J.value(plan.points()[0]));
    return kPass;
}

int cmd_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw twinmet::ConfigError("cannot open report '" + path + "'");
    twinmet::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw twinmet::ConfigError(std::string("report parse error: ") + e.what());
    }
    twinmet::ReportDocument rep;
    rep.suite = doc.value("suite", std::string());
    rep.seed = doc.value("seed", 0ULL);
    rep.pass = doc.value("pass", false);
    for (const auto& c : doc.value("checks", twinmet::json::array())) {
        twinmet::CheckResult r;
        r.name = c.value("name", std::string());
        r.type = c.value("type", std::string());
        r.pass = c.value("pass", false);
        r.plan_seed = c.value("plan_seed", 0ULL);
        for (const auto& [k, v] : c.value("residuals", twinmet::json::object()).items())
            r.residuals[k] = v.get<double>();
        for (const auto& [k, v] : c.value("tolerances", twinmet::json::object()).items())
            r.tolerances[k] = v.get<double>();
        rep.checks.push_back(std::move(r));
    }
    std::cout << rep.to_text();
    return kPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"twinmet: twin-metric and K-structure verification toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "text";
    std::vector<std::string> tol_kvs;
    unsigned long long seed = 0;

    auto* roots =
        app.add_subcommand("roots", "classify roots of the fundamental scalar equation");
    std::string lagrangian_name;
    roots->add_option("--config", config_path, "workspace config")->required();
    roots->add_option("lagrangian", lagrangian_name, "lagrangian name")->required();

    auto* congruence = app.add_subcommand("congruence", "canonical forms of a twin metric pair");
    std::string h_path, g_path;
    double cong_tol = 1e-9;
    congruence->add_option("h_file", h_path, "h matrix file")->required();
    congruence->add_option("g_file", g_path, "g matrix file")->required();
    congruence->add_option("--tolerance", cong_tol, "reconstruction tolerance");

    auto* verify = app.add_subcommand("verify", "run a named verification suite");
    std::string suite_name;
    verify->add_option("--config", config_path, "workspace config")->required();
    verify->add_option("suite", suite_name, "suite name")->required();
    auto* seed_opt = verify->add_option("--seed", seed, "sample plan seed");
    verify->add_option("--tolerance", tol_kvs, "override NAME=VALUE (repeatable)");
    verify->add_option("--out", out_path, "write the structured report here");
    verify->add_option("--format", format, "stdout format: text|structured")
        ->check(CLI::IsMember({"text", "structured"}));

    auto* realify_cmd = app.add_subcommand("realify", "realify a holomorphic metric");
    std::string holo_name;
    realify_cmd->add_option("--config", config_path, "workspace config")->required();
    realify_cmd->add_option("metric", holo_name, "holomorphic metric name")->required();

    auto* report_cmd = app.add_subcommand("report", "render a structured report as text");
    std::string report_path;
    report_cmd->add_option("file", report_path, "structured report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (roots->parsed()) return cmd_roots(config_path, lagrangian_name);
        if (congruence->parsed()) return cmd_congruence(h_path, g_path, cong_tol);
        if (verify->parsed())
            return cmd_verify(config_path, suite_name, tol_kvs, seed, seed_opt->count() > 0,
                              out_path, format);
        if (realify_cmd->parsed()) return cmd_realify(config_path, holo_name);
        if (report_cmd->parsed()) return cmd_report(report_path);
    } catch (const twinmet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const twinmet::AlmostTangentError& e) {
        std::cerr << "no result: " << e.what() << "\n";
        return kNonResult;
    } catch (const twinmet::PreconditionError& e) {
        std::cerr << "no result: " << e.what() << "\n";
        return kNonResult;
    } catch (const twinmet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
