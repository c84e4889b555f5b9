#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "twinmet/scalar_root.hpp"

using namespace twinmet;
using Catch::Approx;

namespace {

/// Brute-force oracle: sign-change scan over a bracketing grid plus bisection.
std::vector<double> scan_roots(const poly::Coeffs& phi, double lo, double hi, double step) {
    std::vector<double> roots;
    double prev = poly::eval(phi, lo);
    for (double x = lo + step; x <= hi; x += step) {
        const double cur = poly::eval(phi, x);
        if (prev == 0.0) roots.push_back(x - step);
        else if (prev * cur < 0.0) {
            double a = x - step, b = x;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = poly::eval(phi, m);
                if (fm == 0.0 || (b - a) < 1e-12) { a = b = m; break; }
                if (poly::eval(phi, a) * fm < 0) b = m;
                else a = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev = cur;
    }
    return roots;
}

LagrangianSpec paper_family(int n, double c0) {
    // f(S) = (n S + c0 (8 - n))^2
    const double p = static_cast<double>(n);
    const double q = c0 * (8.0 - p);
    return LagrangianSpec{{q * q, 2 * p * q, p * p}, n};
}

} // namespace

TEST_CASE("paper example: f = (4S+8)^2 on n = 4") {
    LagrangianSpec spec = paper_family(4, 2.0);
    auto rep = classify_roots(spec);
    REQUIRE_FALSE(rep.identically_degenerate);
    REQUIRE(rep.roots.size() == 2);

    // S = -2: phi-simple but f'(-2) = 0, hence not admissible
    REQUIRE(rep.roots[0].c == Approx(-2.0).margin(1e-9));
    REQUIRE_FALSE(rep.roots[0].admissible);
    REQUIRE(std::abs(rep.roots[0].f_prime_at_c) <= 1e-8);

    // S = 2 admissible with epsilon = 1/2
    REQUIRE(rep.roots[1].c == Approx(2.0).margin(1e-12));
    REQUIRE(rep.roots[1].admissible);
    REQUIRE(rep.roots[1].epsilon == Approx(0.5).margin(1e-12));

    REQUIRE(epsilon_of_root(2.0, spec) == Approx(0.5).margin(1e-12));
    // cross-check the rule: f(2)/(4 f'(2)) = 256/512
    REQUIRE(poly::eval(spec.f, 2.0) / (4 * poly::eval(poly::derivative(spec.f), 2.0)) ==
            Approx(0.5).margin(1e-15));
    REQUIRE_THROWS_AS(epsilon_of_root(-2.0, spec), DegenerateRootError);
}

TEST_CASE("identically degenerate family: f = S^2, n = 8") {
    LagrangianSpec spec{{0.0, 0.0, 1.0}, 8};
    auto rep = classify_roots(spec);
    REQUIRE(rep.identically_degenerate);
    REQUIRE(rep.roots.empty());
}

TEST_CASE("linear example: f = S - 2a, a = 3, n = 6") {
    LagrangianSpec spec{{-6.0, 1.0}, 6};
    auto rep = classify_roots(spec);
    REQUIRE(rep.roots.size() == 1);
    REQUIRE(rep.roots[0].c == Approx(18.0).margin(1e-9));
    REQUIRE(rep.roots[0].admissible);
    REQUIRE(rep.roots[0].epsilon == Approx(3.0).margin(1e-12));
    REQUIRE(epsilon_of_root(18.0, spec) == Approx(3.0).margin(1e-12));

    // hand check by sign scan
    auto scanned = scan_roots(phi_polynomial(spec), -100, 100, 1e-3);
    REQUIRE(scanned.size() == 1);
    REQUIRE(scanned[0] == Approx(18.0).margin(1e-8));
}

TEST_CASE("multiple root of phi is reported inadmissible") {
    // n = 4: phi = 0.5 (S-1)^2 (S+0.5) comes from f = 0.5 S^3 - 1.5 S^2 - 0.5
    LagrangianSpec spec{{-0.5, 0.0, -1.5, 0.5}, 4};
    auto rep = classify_roots(spec);
    REQUIRE(rep.roots.size() == 2);
    REQUIRE(rep.roots[0].c == Approx(-0.5).margin(1e-9));
    REQUIRE(rep.roots[0].multiplicity == 1);
    REQUIRE(rep.roots[0].admissible);
    REQUIRE(rep.roots[0].epsilon == Approx(-0.125).margin(1e-12));
    REQUIRE(rep.roots[1].c == Approx(1.0).margin(1e-7));
    REQUIRE(rep.roots[1].multiplicity == 2);
    REQUIRE_FALSE(rep.roots[1].admissible);
}

TEST_CASE("almost-tangent root at c = 0") {
    // f(0) = 0 with f'(0) != 0: phi(0) = 0, epsilon = 0
    LagrangianSpec spec{{0.0, 1.0, 0.25}, 4}; // f = S + S^2/4
    auto rep = classify_roots(spec);
    bool found_zero = false;
    for (const auto& r : rep.roots)
        if (std::abs(r.c) <= 1e-10) {
            found_zero = true;
            REQUIRE(r.almost_tangent);
            REQUIRE(r.epsilon == Approx(0.0).margin(1e-12));
        }
    REQUIRE(found_zero);
    REQUIRE(epsilon_of_root(0.0, spec) == 0.0);
}

TEST_CASE("paper family across n and c0 (acceptance criterion slice)") {
    for (int n = 3; n <= 7; ++n) {
        for (int c0i = -3; c0i <= 3; ++c0i) {
            if (c0i == 0) continue;
            const double c0 = c0i;
            LagrangianSpec spec = paper_family(n, c0);
            auto rep = classify_roots(spec);
            INFO("n = " << n << " c0 = " << c0);
            REQUIRE(rep.roots.size() == 2);
            bool has_admissible = false, has_degenerate = false;
            for (const auto& r : rep.roots) {
                if (r.admissible) {
                    has_admissible = true;
                    REQUIRE(r.c == Approx(c0).margin(1e-8));
                    REQUIRE(r.epsilon == Approx(c0 / n).margin(1e-10));
                    // both expressions of the epsilon rule agree
                    REQUIRE(epsilon_of_root(r.c, spec) == Approx(c0 / n).margin(1e-9));
                } else {
                    has_degenerate = true;
                    REQUIRE(r.c == Approx(c0 * (n - 8.0) / n).margin(1e-7));
                    REQUIRE(std::abs(r.f_prime_at_c) <= 1e-6);
                }
            }
            REQUIRE(has_admissible);
            REQUIRE(has_degenerate);
        }
    }
}

TEST_CASE("property: positive scaling of f leaves roots and flags unchanged") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> scale_u(0.1, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int deg = 1 + static_cast<int>(rng() % 6);
        LagrangianSpec spec;
        spec.n = 3 + static_cast<int>(rng() % 6);
        spec.f.resize(static_cast<std::size_t>(deg) + 1);
        for (auto& c : spec.f) c = coef(rng);
        if (std::abs(spec.f.back()) < 0.5) spec.f.back() = 1.0;
        auto rep1 = classify_roots(spec);
        if (rep1.identically_degenerate) continue;

        LagrangianSpec scaled = spec;
        const double lam = scale_u(rng);
        for (auto& c : scaled.f) c *= lam;
        auto rep2 = classify_roots(scaled);
        REQUIRE(rep2.identically_degenerate == rep1.identically_degenerate);
        REQUIRE(rep2.roots.size() == rep1.roots.size());
        for (std::size_t i = 0; i < rep1.roots.size(); ++i) {
            REQUIRE(rep2.roots[i].c ==
                    Approx(rep1.roots[i].c).margin(1e-7 * std::max(1.0, std::abs(rep1.roots[i].c))));
            REQUIRE(rep2.roots[i].admissible == rep1.roots[i].admissible);
        }
    }
}

TEST_CASE("property: roots match the brute-force scan oracle") {
    std::mt19937_64 rng(97531);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int deg = 2 + static_cast<int>(rng() % 5);
        LagrangianSpec spec;
        spec.n = 3 + static_cast<int>(rng() % 6);
        spec.f.resize(static_cast<std::size_t>(deg) + 1);
        for (auto& c : spec.f) c = coef(rng);
        if (std::abs(spec.f.back()) < 0.5) spec.f.back() = 1.0;

        auto rep = classify_roots(spec);
        if (rep.identically_degenerate) continue;
        auto phi = phi_polynomial(spec);
        auto scanned = scan_roots(phi, -50.0, 50.0, 1e-3);

        // every sign-change root must be reported
        for (double s : scanned) {
            bool matched = false;
            for (const auto& r : rep.roots)
                matched |= std::abs(r.c - s) <= 1e-8 * std::max(1.0, std::abs(s)) + 1e-8;
            INFO("scan root " << s);
            REQUIRE(matched);
        }
        // every reported odd-multiplicity root in range must be scanned
        for (const auto& r : rep.roots) {
            if (std::abs(r.c) > 45.0 || r.multiplicity % 2 == 0) continue;
            bool matched = false;
            for (double s : scanned)
                matched |= std::abs(r.c - s) <= 1e-8 * std::max(1.0, std::abs(r.c)) + 1e-8;
            INFO("reported root " << r.c);
            REQUIRE(matched);
        }
        // residual bound on every reported root
        const double pscale = poly::max_abs(phi);
        for (const auto& r : rep.roots) {
            const double bound =
                1e-9 * pscale * std::pow(std::max(1.0, std::abs(r.c)), (int)phi.size() - 1);
            REQUIRE(std::abs(poly::eval(phi, r.c)) <= std::max(bound, 1e-12));
        }
    }
}
