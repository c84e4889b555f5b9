#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "twinmet/errors.hpp"

namespace twinmet {

/// Polynomial Lagrangian f (ascending coefficients) on an n-manifold, n > 2.
struct LagrangianSpec {
    std::vector<double> f;
    int n = 4;

    void validate() const {
        if (n <= 2) throw Error("LagrangianSpec: n > 2 required");
        bool nonzero = false;
        for (double c : f) nonzero |= (c != 0.0);
        if (!nonzero) throw Error("LagrangianSpec: f must not be the zero polynomial");
    }
};

struct RootEntry {
    double c = 0.0;
    int multiplicity = 1;
    double f_prime_at_c = 0.0;
    double epsilon = 0.0; // c / n
    bool admissible = false;
    bool almost_tangent = false; // epsilon == 0 root
};

struct RootReport {
    std::vector<RootEntry> roots;
    bool identically_degenerate = false;
};

namespace poly {

using Coeffs = std::vector<double>;

inline double eval(const Coeffs& p, double x) {
    double acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

inline Coeffs derivative(const Coeffs& p) {
    Coeffs d;
    for (std::size_t k = 1; k < p.size(); ++k) d.push_back(static_cast<double>(k) * p[k]);
    return d;
}

inline double max_abs(const Coeffs& p) {
    double m = 0.0;
    for (double c : p) m = std::max(m, std::abs(c));
    return m;
}

/// Drop trailing coefficients below a relative tolerance.
inline Coeffs trim(Coeffs p, double rel_tol) {
    const double m = max_abs(p);
    while (!p.empty() && std::abs(p.back()) <= rel_tol * m) p.pop_back();
    return p;
}

/// Real eigenvalues of the balanced companion matrix.
inline std::vector<double> companion_real_roots(const Coeffs& p_in) {
    Coeffs p = trim(p_in, 1e-14);
    std::vector<double> out;
    if (p.size() <= 1) return out;
    const int d = static_cast<int>(p.size()) - 1;
    if (d == 1) {
        out.push_back(-p[0] / p[1]);
        return out;
    }
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) C(i, d - 1) = -p[static_cast<std::size_t>(i)] / p.back();
    C.block(1, 0, d - 1, d - 1).setIdentity();
    Eigen::EigenSolver<Eigen::MatrixXd> es(C);
    for (int i = 0; i < d; ++i) {
        const std::complex<double> z = es.eigenvalues()[i];
        if (std::abs(z.imag()) <= 1e-7 * (1.0 + std::abs(z))) out.push_back(z.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Numeric gcd degree via the Euclidean remainder chain with relative
/// coefficient trimming. Used for the square-free reduction.
inline Coeffs gcd(Coeffs a, Coeffs b, double rel_tol = 1e-8) {
    a = trim(std::move(a), 1e-14);
    b = trim(std::move(b), 1e-14);
    if (a.size() < b.size()) std::swap(a, b);
    while (!b.empty()) {
        // remainder a mod b
        Coeffs r = a;
        const double lead_b = b.back();
        while (r.size() >= b.size() && !r.empty()) {
            const double q = r.back() / lead_b;
            const std::size_t shift = r.size() - b.size();
            for (std::size_t i = 0; i < b.size(); ++i) r[shift + i] -= q * b[i];
            r.pop_back();
            r = trim(std::move(r), 1e-14);
            if (r.size() < b.size()) break;
        }
        r = trim(std::move(r), rel_tol);
        a = std::move(b);
        b = std::move(r);
    }
    // normalize monic-ish for downstream division
    const double lead = a.empty() ? 1.0 : a.back();
    for (double& c : a) c /= lead;
    return a;
}

/// Quotient of an (assumed) exact division, coefficients by synthetic division.
inline Coeffs divide(const Coeffs& num, const Coeffs& den) {
    Coeffs r = num, q;
    if (den.empty()) throw Error("poly division by zero polynomial");
    while (r.size() >= den.size() && !r.empty()) {
        const double c = r.back() / den.back();
        q.push_back(c);
        const std::size_t shift = r.size() - den.size();
        for (std::size_t i = 0; i < den.size(); ++i) r[shift + i] -= c * den[i];
        r.pop_back();
    }
    std::reverse(q.begin(), q.end());
    return q;
}

} // namespace poly

/// φ(S) = f'(S)·S − (n/4)·f(S); for polynomial f the coefficients close as
/// φ_k = a_k (k − n/4).
inline poly::Coeffs phi_polynomial(const LagrangianSpec& spec) {
    poly::Coeffs phi(spec.f.size());
    for (std::size_t k = 0; k < spec.f.size(); ++k)
        phi[k] = spec.f[k] * (static_cast<double>(k) - spec.n / 4.0);
    return phi;
}

/// Classify all real roots of the fundamental scalar equation with
/// multiplicities; ε = c/n per root, Kähler-side admissibility flags.
inline RootReport classify_roots(const LagrangianSpec& spec) {
    spec.validate();
    RootReport report;

    const poly::Coeffs phi_raw = phi_polynomial(spec);
    const double fscale = poly::max_abs(spec.f);
    const poly::Coeffs phi = poly::trim(phi_raw, 1e-14);
    if (phi.empty()) {
        report.identically_degenerate = true;
        return report;
    }

    const poly::Coeffs dphi = poly::derivative(phi);
    const poly::Coeffs fprime = poly::derivative(spec.f);

    // square-free part carries each root once; companion roots of it are
    // well separated even when phi has multiple roots
    poly::Coeffs sqfree = phi;
    const poly::Coeffs g = poly::gcd(phi, dphi);
    if (g.size() > 1) sqfree = poly::trim(poly::divide(phi, g), 1e-12);

    std::vector<double> candidates = poly::companion_real_roots(sqfree);

    // Newton polish on phi^(m-1) after the multiplicity test
    const int deg = static_cast<int>(phi.size()) - 1;
    for (double c : candidates) {
        // multiplicity: smallest j with |phi^(j)(c)| above the noise floor
        int mult = deg;
        poly::Coeffs d = phi;
        for (int j = 1; j <= deg; ++j) {
            d = poly::derivative(d);
            const double scale_j =
                poly::max_abs(d) * std::pow(std::max(1.0, std::abs(c)), (int)d.size() - 1);
            if (std::abs(poly::eval(d, c)) > 1e-8 * std::max(scale_j, 1e-30)) {
                mult = j;
                break;
            }
        }
        // polish the root on the (m-1)-th derivative where it is simple
        poly::Coeffs target = phi;
        for (int j = 1; j < mult; ++j) target = poly::derivative(target);
        const poly::Coeffs dtarget = poly::derivative(target);
        for (int it = 0; it < 60; ++it) {
            const double fv = poly::eval(target, c);
            const double dv = poly::eval(dtarget, c);
            if (dv == 0.0) break;
            const double step = fv / dv;
            c -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(c))) break;
        }

        RootEntry e;
        e.c = c;
        e.multiplicity = mult;
        e.f_prime_at_c = poly::eval(fprime, c);
        e.epsilon = c / spec.n;
        const bool fprime_nonzero =
            std::abs(e.f_prime_at_c) > 1e-10 * std::max(fscale, 1e-300);
        e.admissible = (mult == 1) && fprime_nonzero;
        e.almost_tangent = (e.epsilon == 0.0) || std::abs(c) <= 1e-12;
        report.roots.push_back(e);
    }
    std::sort(report.roots.begin(), report.roots.end(),
              [](const RootEntry& a, const RootEntry& b) { return a.c < b.c; });
    return report;
}

/// ε = c/n for an admissible root; asserts agreement with f(c)/(4f'(c)).
inline double epsilon_of_root(double c, const LagrangianSpec& spec) {
    spec.validate();
    const poly::Coeffs phi = phi_polynomial(spec);
    const double phi_scale =
        poly::max_abs(phi) * std::pow(std::max(1.0, std::abs(c)), (int)phi.size() - 1);
    const double phi_at_c = poly::eval(phi, c);
    if (std::abs(phi_at_c) > 1e-9 * std::max(phi_scale, 1e-300))
        throw PreconditionError("phi(c) = 0", std::abs(phi_at_c));

    const double fp = poly::eval(poly::derivative(spec.f), c);
    const double fscale = poly::max_abs(spec.f);
    if (std::abs(fp) <= 1e-10 * std::max(fscale, 1e-300)) throw DegenerateRootError(c);

    const double eps_rule = poly::eval(spec.f, c) / (4.0 * fp);
    const double eps_trace = c / spec.n;
    if (std::abs(eps_rule - eps_trace) > 1e-9 * std::max(1.0, std::abs(eps_trace)))
        throw Error("epsilon rule mismatch: f(c)/4f'(c) and c/n disagree");
    return eps_trace;
}

} // namespace twinmet
