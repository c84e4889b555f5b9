#include <catch2/catch_amalgamated.hpp>

#include "twinmet/antikahler.hpp"
#include "twinmet/palatini.hpp"
#include "twinmet/product_structures.hpp"

using namespace twinmet;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

/// Unit-sphere pair with the block product structure (gamma = 1, Ric = g).
struct SphereProductFixture {
    ProductBuild built;
    SamplePlan plan;
    LagrangianSpec spec;

    SphereProductFixture() {
        ChartSpec cb = ChartSpec::make("s2b", {"th2", "ph2"}, {{0.4, 2.7}, {0.3, 6.0}});
        MetricField f2 = MetricField::make(
            cb, {{ScalarExpr::constant(1.0), ScalarExpr::constant(0.0)},
                 {ScalarExpr::constant(0.0), pow(sin(ScalarExpr::coordinate(0)), 2)}});
        ProductSpec ps{fixtures::sphere2(), f2, std::nullopt};
        built = build_product(ps);
        plan = SamplePlan::halton(built.g.chart(), 24, 7);
        spec = LagrangianSpec{fixtures::paper_lagrangian(4, 2.0), 4};
    }
};

/// Realified complex 2-sphere with its canonical J (gamma = 1, Ric = g) and
/// the documented Lagrangian f = S² + 4 whose admissible roots are ±2.
struct AntiKahlerFixture {
    RealifiedMetric real;
    SamplePlan plan;
    LagrangianSpec spec;

    AntiKahlerFixture() {
        auto G = complex_sphere_metric(2);
        plan = SamplePlan::halton(G.real_chart(), 24, 7);
        real = realify(G, plan);
        spec = LagrangianSpec{{4.0, 0.0, 1.0}, 4};
    }
};

} // namespace

TEST_CASE("lagrangian fixtures have the documented roots") {
    // f = S^2 + 4 on n = 4: phi = S^2 - 4, admissible roots +-2, eps = +-1/2
    LagrangianSpec spec{{4.0, 0.0, 1.0}, 4};
    auto rep = classify_roots(spec);
    REQUIRE(rep.roots.size() == 2);
    REQUIRE(rep.roots[0].c == Approx(-2.0).margin(1e-12));
    REQUIRE(rep.roots[0].admissible);
    REQUIRE(rep.roots[1].c == Approx(2.0).margin(1e-12));
    REQUIRE(rep.roots[1].admissible);
    REQUIRE(epsilon_of_root(-2.0, spec) == Approx(-0.5).margin(1e-12));
}

TEST_CASE("assemble on the sphere product") {
    SphereProductFixture fx;
    auto sol = assemble(fx.built.g, fx.built.P, fx.spec, 2.0, fx.plan);
    REQUIRE(sol.epsilon == Approx(0.5).margin(1e-12));

    // h = sqrt(2) (g1 脣 g2): block values match
    const VectorXd p = fx.plan.points()[0];
    const MatrixXd gv = sol.g.value(p);
    const MatrixXd hv = sol.h.value(p);
    const double s = std::sqrt(2.0);
    REQUIRE((hv.topLeftCorner(2, 2) - s * gv.topLeftCorner(2, 2)).norm() <= 1e-13);
    REQUIRE((hv.bottomRightCorner(2, 2) + s * gv.bottomRightCorner(2, 2)).norm() <= 1e-13);

    // (h^-1 g)^2 = eps I pointwise
    const MatrixXd P = hv.fullPivLu().solve(gv);
    REQUIRE((P * P - 0.5 * MatrixXd::Identity(4, 4)).norm() <= 1e-12);
}

TEST_CASE("assemble guards") {
    SphereProductFixture fx;
    SECTION("flat metric fails the Einstein normalization with a rescale hint") {
        auto flat = MetricField::constant(fx.built.g.chart(), MatrixXd::Identity(4, 4));
        try {
            assemble(flat, fx.built.P, fx.spec, 2.0, fx.plan);
            FAIL("expected the Einstein gate to fire");
        } catch (const Error& e) {
            REQUIRE(std::string(e.what()).find("gamma_fit") != std::string::npos);
        }
    }
    SECTION("degenerate root is rejected") {
        REQUIRE_THROWS_AS(assemble(fx.built.g, fx.built.P, fx.spec, -2.0, fx.plan),
                          DegenerateRootError);
    }
    SECTION("sign mismatch between the root and the K-structure") {
        LagrangianSpec both{{4.0, 0.0, 1.0}, 4}; // admissible roots at +-2
        REQUIRE_THROWS_AS(assemble(fx.built.g, fx.built.P, both, -2.0, fx.plan),
                          PreconditionError);
    }
    SECTION("almost-tangent root is rejected upstream") {
        LagrangianSpec zero_root{{0.0, 1.0, 0.25}, 4}; // f = S + S^2/4, phi(0) = 0
        REQUIRE_THROWS_AS(assemble(fx.built.g, fx.built.P, zero_root, 0.0, fx.plan),
                          AlmostTangentError);
    }
}

TEST_CASE("verify_euler_lagrange on the sphere-product fixture") {
    SphereProductFixture fx;
    auto sol = assemble(fx.built.g, fx.built.P, fx.spec, 2.0, fx.plan);
    auto rep = verify_euler_lagrange(sol, fx.plan);
    for (const auto& e : rep.entries) {
        INFO(e.name << " residual " << e.residual);
        REQUIRE(e.residual <= 1e-7);
    }
    REQUIRE(rep.pass);

    // the scalar invariant equals c everywhere (S = eps * n = c)
    for (const auto& p : fx.plan.points())
        REQUIRE(scalar_invariant(sol, p) == Approx(2.0).margin(1e-8));
}

TEST_CASE("verify_euler_lagrange on the anti-Kahler fixture") {
    AntiKahlerFixture fx;
    auto sol = assemble(fx.real.metric, fx.real.J, fx.spec, -2.0, fx.plan);
    REQUIRE(sol.epsilon == Approx(-0.5).margin(1e-12));
    auto rep = verify_euler_lagrange(sol, fx.plan);
    for (const auto& e : rep.entries) {
        INFO(e.name << " residual " << e.residual);
        REQUIRE(e.residual <= 1e-7);
    }
    for (const auto& p : fx.plan.points())
        REQUIRE(scalar_invariant(sol, p) == Approx(-2.0).margin(1e-8));
}

TEST_CASE("negative control: unscaled twin fails the metric equation") {
    SphereProductFixture fx;
    auto good = assemble(fx.built.g, fx.built.P, fx.spec, 2.0, fx.plan);
    PalatiniSolution bad = good;
    bad.h = fx.built.twin.as_metric(); // skip the 1/sqrt|eps| scaling
    auto rep = verify_euler_lagrange(bad, fx.plan);
    REQUIRE(rep.residual("euler_lagrange_metric") >= 0.01);
    REQUIRE_FALSE(rep.pass);
}

TEST_CASE("trace identity: h = g gives S = n") {
    SphereProductFixture fx;
    auto sol = assemble(fx.built.g, fx.built.P, fx.spec, 2.0, fx.plan);
    PalatiniSolution same = sol;
    same.h = same.g;
    for (const auto& p : fx.plan.points())
        REQUIRE(scalar_invariant(same, p) == Approx(4.0).margin(1e-9));
}

TEST_CASE("Prop 2.1 round trip and the metricity identity") {
    SphereProductFixture fx;
    AntiKahlerFixture ak;
    SECTION("setting g := S recovers g and its connection") {
        for (const auto& p : fx.plan.points()) {
            auto gap = ricci_metric_round_trip(fx.built.g, p);
            REQUIRE(gap.metric_gap <= 1e-9);
            REQUIRE(gap.connection_gap <= 1e-8);
        }
        for (const auto& p : ak.plan.points()) {
            auto gap = ricci_metric_round_trip(ak.real.metric, p);
            REQUIRE(gap.metric_gap <= 1e-9);
            REQUIRE(gap.connection_gap <= 1e-8);
        }
    }
    SECTION("density metricity of the Levi-Civita connection") {
        for (const auto& p : fx.plan.points())
            REQUIRE(metricity_density_residual(fx.built.g, p) <= 1e-9);
        for (const auto& p : ak.plan.points())
            REQUIRE(metricity_density_residual(ak.real.metric, p) <= 1e-9);
    }
}
