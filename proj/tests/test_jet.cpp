#include <catch2/catch_amalgamated.hpp>

#include "twinmet/expr.hpp"
#include "twinmet/jet.hpp"

#include <random>

using namespace twinmet;
using Catch::Approx;

namespace {

// Independent oracle: central finite differences of plain point evaluation.
double eval_value(const ScalarExpr& e, const Eigen::VectorXd& x) {
    return eval_jet2(e, x).v;
}

struct FiniteDiff {
    const ScalarExpr& e;
    Eigen::VectorXd x;
    double h;

    double grad(int i) const {
        Eigen::VectorXd a = x, b = x;
        a[i] += h;
        b[i] -= h;
        return (eval_value(e, a) - eval_value(e, b)) / (2 * h);
    }
    double hess(int i, int j) const {
        if (i == j) {
            Eigen::VectorXd a = x, b = x;
            a[i] += h;
            b[i] -= h;
            return (eval_value(e, a) - 2 * eval_value(e, x) + eval_value(e, b)) / (h * h);
        }
        Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
        pp[i] += h; pp[j] += h;
        pm[i] += h; pm[j] -= h;
        mp[i] -= h; mp[j] += h;
        mm[i] -= h; mm[j] -= h;
        return (eval_value(e, pp) - eval_value(e, pm) - eval_value(e, mp) + eval_value(e, mm)) /
               (4 * h * h);
    }
};

struct ExprGen {
    std::mt19937_64 rng;
    int dim;
    ExprGen(int d, std::uint64_t seed) : rng(seed), dim(d) {}

    ScalarExpr gen(int depth) {
        std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
        switch (pick(rng)) {
        case 0: {
            std::uniform_real_distribution<double> u(-2.0, 2.0);
            return ScalarExpr::constant(u(rng));
        }
        case 1: {
            std::uniform_int_distribution<int> c(0, dim - 1);
            return ScalarExpr::coordinate(c(rng));
        }
        case 2: return gen(depth - 1) + gen(depth - 1);
        case 3: return gen(depth - 1) - gen(depth - 1);
        case 4: return gen(depth - 1) * gen(depth - 1);
        case 5: return sin(gen(depth - 1));
        case 6: return cos(gen(depth - 1));
        case 7: return exp(ScalarExpr::constant(0.3) * sin(gen(depth - 1)));
        case 8: {
            std::uniform_int_distribution<int> e(0, 2);
            return pow(gen(depth - 1), e(rng));
        }
        default:
            return gen(depth - 1) /
                   (ScalarExpr::constant(2.0) + pow(cos(gen(depth - 1)), 2));
        }
    }
};

} // namespace

TEST_CASE("jet2 on bilinear expression") {
    auto chart = ChartSpec::make("xy", {"x", "y"});
    auto e = parse_scalar("x*y", chart);
    Eigen::VectorXd p(2);
    p << 2.0, 3.0;
    auto j = eval_jet2(e, p);
    REQUIRE(j.v == 6.0);
    REQUIRE(j.g[0] == 3.0);
    REQUIRE(j.g[1] == 2.0);
    REQUIRE(j.H(0, 0) == 0.0);
    REQUIRE(j.H(0, 1) == 1.0);
    REQUIRE(j.H(1, 0) == 1.0);
    REQUIRE(j.H(1, 1) == 0.0);
}

TEST_CASE("jet2 of sin(th)^2 at pi/2") {
    auto chart = ChartSpec::make("s2", {"th", "ph"});
    auto e = parse_scalar("sin(th)^2", chart);
    Eigen::VectorXd p(2);
    p << M_PI / 2, 0.5;
    auto j = eval_jet2(e, p);
    // hand derivative: d/dth sin^2 = sin(2 th) -> 0; d2/dth2 = 2 cos(2 th) -> -2
    REQUIRE(j.v == Approx(1.0).margin(1e-15));
    REQUIRE(j.g[0] == Approx(0.0).margin(1e-15));
    REQUIRE(j.H(0, 0) == Approx(-2.0).margin(1e-12));

    FiniteDiff fd{e, p, 1e-5};
    REQUIRE(j.g[0] == Approx(fd.grad(0)).margin(1e-9));
    REQUIRE(j.H(0, 0) == Approx(fd.hess(0, 0)).margin(1e-5));
}

TEST_CASE("jet2 of a constant") {
    auto chart = ChartSpec::make("s2", {"th", "ph"});
    auto e = parse_scalar("5", chart);
    Eigen::VectorXd p(2);
    p << 0.3, 0.4;
    auto j = eval_jet2(e, p);
    REQUIRE(j.v == 5.0);
    REQUIRE(j.g.norm() == 0.0);
    REQUIRE(j.H.norm() == 0.0);
}

TEST_CASE("property: jet2 agrees with central differences, step 1e-5") {
    const int dim = 3;
    ExprGen gen(dim, 424242);
    std::mt19937_64 prng(7);
    std::uniform_real_distribution<double> u(-0.8, 0.8);

    int checked = 0;
    for (int trial = 0; trial < 150; ++trial) {
        ScalarExpr e = gen.gen(3);
        Eigen::VectorXd p(dim);
        for (int i = 0; i < dim; ++i) p[i] = u(prng);
        Jet2<double> j;
        try {
            j = eval_jet2(e, p);
        } catch (const DomainError&) {
            continue; // generator occasionally builds poles; skip
        }
        const double fscale = std::max(1.0, std::abs(j.v));
        FiniteDiff fd{e, p, 1e-5};
        for (int i = 0; i < dim; ++i) {
            REQUIRE(std::abs(j.g[i] - fd.grad(i)) <=
                    1e-6 * std::max(fscale, std::abs(j.g[i])));
            for (int k = i; k < dim; ++k) {
                // the second central difference carries a rounding floor of
                // roughly eps/h^2 * |f|; the jet side is exact to rounding
                const double tol =
                    1e-6 * std::max(1.0, std::abs(j.H(i, k))) + 7e-6 * fscale;
                REQUIRE(std::abs(j.H(i, k) - fd.hess(i, k)) <= tol);
                // symmetric to working precision
                REQUIRE(std::abs(j.H(i, k) - j.H(k, i)) <=
                        1e-14 * std::max(1.0, std::abs(j.H(i, k))));
            }
        }
        ++checked;
    }
    REQUIRE(checked > 100);
}

TEST_CASE("jet3 third derivatives match jet2 Hessian differences") {
    // d3/dx3 of x^3 sin(y) etc: compare T against FD of jet2 Hessians
    auto chart = ChartSpec::make("xy", {"x", "y"});
    auto e = parse_scalar("x^3*sin(y) + exp(x*y)/(2 + x^2)", chart);
    Eigen::VectorXd p(2);
    p << 0.7, -0.4;
    auto j3 = eval_jet3(e, p);
    auto j2 = eval_jet2(e, p);
    REQUIRE(j3.v == j2.v);
    REQUIRE((j3.g - j2.g).norm() == 0.0);
    REQUIRE((j3.H - j2.H).norm() <= 1e-14);

    const double h = 1e-5;
    for (int a = 0; a < 2; ++a) {
        Eigen::VectorXd pp = p, pm = p;
        pp[a] += h;
        pm[a] -= h;
        Eigen::MatrixXd dH = (eval_jet2(e, pp).H - eval_jet2(e, pm).H) / (2 * h);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                REQUIRE(j3.t(a, i, k) == Approx(dH(i, k)).margin(1e-7));
    }
}

TEST_CASE("domain errors name the subexpression and point") {
    auto chart = ChartSpec::make("xy", {"x", "y"});
    Eigen::VectorXd p(2);
    p << 1.0, 0.0;
    auto e = parse_scalar("1/(1 - x*x)", chart);
    try {
        eval_jet2(e, p, &chart);
        FAIL("expected DomainError");
    } catch (const DomainError& err) {
        REQUIRE(err.subexpr.find("1 - x*x") != std::string::npos);
        REQUIRE(err.point.find("1") != std::string::npos);
    }
    REQUIRE_THROWS_AS(eval_jet2(parse_scalar("sqrt(0 - x)", chart), p), DomainError);
    REQUIRE_THROWS_AS(eval_jet2(parse_scalar("log(0*x)", chart), p), DomainError);
}

TEST_CASE("evaluation is deterministic bit for bit") {
    auto chart = ChartSpec::make("xy", {"x", "y"});
    auto e = parse_scalar("exp(x*y)*sin(x)^3/(2 + cos(y))", chart);
    Eigen::VectorXd p(2);
    p << 0.37, -1.2;
    auto a = eval_jet2(e, p);
    auto b = eval_jet2(e, p);
    REQUIRE(a.v == b.v);
    REQUIRE((a.g - b.g).norm() == 0.0);
    REQUIRE((a.H - b.H).norm() == 0.0);
}

TEST_CASE("complex jet1: polynomial and rational examples") {
    auto chart = ChartSpec::make("c1", {"z1"});
    auto e = parse_scalar("z1*z1", chart);
    Eigen::VectorXcd z(1);
    z << std::complex<double>(1.0, 1.0);
    auto j = eval_complex_jet1(e, z);
    REQUIRE(std::abs(j.v - std::complex<double>(0.0, 2.0)) <= 1e-15);
    REQUIRE(std::abs(j.g[0] - std::complex<double>(2.0, 2.0)) <= 1e-15);

    auto r = parse_scalar("1/(1 - z1*z1)", chart);
    Eigen::VectorXcd z0(1);
    z0 << std::complex<double>(0.0, 0.0);
    auto j0 = eval_complex_jet1(r, z0);
    REQUIRE(std::abs(j0.v - 1.0) <= 1e-15);
    REQUIRE(std::abs(j0.g[0]) <= 1e-15);

    Eigen::VectorXcd z1(1);
    z1 << std::complex<double>(1.0, 0.0);
    REQUIRE_THROWS_AS(eval_complex_jet1(r, z1), DomainError);
}

TEST_CASE("complex jet satisfies Cauchy-Riemann against real-chart evaluation") {
    // f(z) holomorphic: df/dz from complex jets equals (d/dx - i d/dy)/2... via
    // substitution z = x + i y evaluated with real-chart complex jets.
    auto zchart = ChartSpec::make("c1", {"z1"});
    auto e = parse_scalar("exp(z1)/(2 + z1*z1)", zchart);

    ScalarExpr zsub = ScalarExpr::coordinate(0) +
                      ScalarExpr::constant(std::complex<double>(0, 1)) * ScalarExpr::coordinate(1);
    auto e_xy = substitute_coordinates(e, {zsub});

    Eigen::VectorXd xy(2);
    xy << 0.3, -0.7;
    auto jr = eval_real_chart_cjet2(e_xy, xy);

    Eigen::VectorXcd z(1);
    z << std::complex<double>(0.3, -0.7);
    auto jc = eval_complex_jet1(e, z);

    REQUIRE(std::abs(jr.v - jc.v) <= 1e-14);
    std::complex<double> dzbar =
        0.5 * (jr.g[0] + std::complex<double>(0, 1) * jr.g[1]);
    std::complex<double> dz = 0.5 * (jr.g[0] - std::complex<double>(0, 1) * jr.g[1]);
    REQUIRE(std::abs(dzbar) <= 1e-13);
    REQUIRE(std::abs(dz - jc.g[0]) <= 1e-13);
}

TEST_CASE("re/im nodes: valid over real charts, rejected holomorphically") {
    ScalarExpr zsub = ScalarExpr::coordinate(0) +
                      ScalarExpr::constant(std::complex<double>(0, 1)) * ScalarExpr::coordinate(1);
    ScalarExpr sq = zsub * zsub;
    ScalarExpr re_part = re(sq); // x^2 - y^2 over the real chart

    Eigen::VectorXd xy(2);
    xy << 1.25, 0.5;
    auto j = eval_jet2(re_part, xy);
    REQUIRE(j.v == Approx(1.25 * 1.25 - 0.25).margin(1e-14));
    REQUIRE(j.g[0] == Approx(2.5).margin(1e-14));
    REQUIRE(j.g[1] == Approx(-1.0).margin(1e-14));
    REQUIRE(j.H(0, 0) == Approx(2.0).margin(1e-14));
    REQUIRE(j.H(1, 1) == Approx(-2.0).margin(1e-14));

    Eigen::VectorXcd z(2);
    z << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 0.0);
    REQUIRE_THROWS_AS(eval_complex_jet1(re_part, z), NonAnalyticError);
}
