#pragma once

#include <string>
#include <vector>

#include "twinmet/scalar_root.hpp"
#include "twinmet/tensor_calc.hpp"

namespace twinmet {

/// An assembled candidate for the Euler-Lagrange system: an Einstein metric
/// normalized to Ric(g) = g, the scaled twin h with (h⁻¹g)² = εI, and the
/// Lagrangian root that selected ε = c/n.
struct PalatiniSolution {
    MetricField g;
    MetricField h;
    KField seed;
    LagrangianSpec spec;
    double root_c = 0.0;
    double epsilon = 0.0;
};

struct VerificationEntry {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<VerificationEntry> entries;
    bool pass = true;

    void add(std::string name, double residual, double tolerance) {
        entries.push_back({std::move(name), residual, tolerance, residual <= tolerance});
        pass = pass && entries.back().pass;
    }
    double residual(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return e.residual;
        throw Error("no verification entry named '" + name + "'");
    }
};

namespace detail {

/// Inverse-matrix first derivatives from component first derivatives.
inline std::vector<Eigen::MatrixXd> inverse_d1(const Eigen::MatrixXd& inv,
                                               const std::vector<Eigen::MatrixXd>& d1) {
    std::vector<Eigen::MatrixXd> out(d1.size());
    for (std::size_t a = 0; a < d1.size(); ++a) out[a] = -inv * d1[a] * inv;
    return out;
}

} // namespace detail

/// Build a PalatiniSolution: h = (1/sqrt|ε|)·gK with ε = c/n, after the
/// Einstein normalization, root admissibility, parity and compatibility
/// gates.
inline PalatiniSolution assemble(const MetricField& g_einstein, const KField& seed,
                                 const LagrangianSpec& spec, double root_c,
                                 const SamplePlan& plan, double tol = 1e-7) {
    spec.validate();
    if (g_einstein.dim() != spec.n)
        throw Error("assemble: chart dimension differs from the Lagrangian's n");
    // root admissibility and the epsilon rule
    const double eps = epsilon_of_root(root_c, spec); // throws on degenerate roots
    if (std::abs(eps) < 1e-12) throw AlmostTangentError();
    if (eps < 0 && spec.n % 2 != 0) throw ParityError(spec.n);
    if ((eps > 0) != (seed.epsilon() > 0))
        throw PreconditionError("sign of c/n matches the K-structure's epsilon",
                                std::abs(eps - seed.epsilon()));
    if (seed.epsilon() * seed.sigma() != 1)
        throw Error("assemble: the twin of g must be a metric (need eps*sigma = 1)");

    const EinsteinReport er = einstein_residual(g_einstein, plan);
    if (std::abs(er.gamma_fit - 1.0) > tol || er.max_residual > tol)
        throw Error("assemble: Ric(g) = g normalization failed (gamma_fit = " +
                    std::to_string(er.gamma_fit) +
                    "); Ricci is scale-invariant, so g -> gamma_fit * g restores Ric = g");

    const CompatReport cr = check_k_compatibility(g_einstein, seed, plan);
    if (!cr.pass(1e-9))
        throw PreconditionError("K-compatibility of the seed",
                                std::max(cr.involution_residual, cr.metric_residual));

    const TwinField tw = twin_field(g_einstein, seed);
    const double scale = 1.0 / std::sqrt(std::abs(eps));
    const int n = g_einstein.dim();
    std::vector<std::vector<ScalarExpr>> comps(
        static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                ScalarExpr::constant(scale) *
                tw.comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    PalatiniSolution sol;
    sol.g = g_einstein;
    sol.h = MetricField::make(g_einstein.chart(), comps);
    sol.seed = seed;
    sol.spec = spec;
    sol.root_c = root_c;
    sol.epsilon = eps;

    // pointwise twin identity (h^-1 g)^2 = eps I
    for (const auto& pt : plan.points()) {
        const Eigen::MatrixXd hv = sol.h.value(pt);
        const Eigen::MatrixXd gv = sol.g.value(pt);
        const Eigen::MatrixXd P = hv.fullPivLu().solve(gv);
        const double res = (P * P - eps * Eigen::MatrixXd::Identity(n, n)).norm() /
                           std::max(1.0, P.squaredNorm());
        if (res > 1e-9)
            throw PreconditionError("(h^-1 g)^2 = eps I on the plan", res);
    }
    return sol;
}

/// S(h, Γ) = h^{μα} h^{νβ} S_{αβ} S_{μν} at a point (S_{μν} the symmetrized
/// Ricci of the solution connection, i.e. Ric(g)).
inline double scalar_invariant(const PalatiniSolution& sol, const Eigen::VectorXd& pt) {
    const auto bg = detail::connection_bundle(sol.g, pt);
    const Eigen::MatrixXd S = detail::ricci_from_bundle(bg);
    const Eigen::MatrixXd hv = sol.h.value(pt);
    const Eigen::MatrixXd hinv = hv.fullPivLu().inverse();
    return (hinv * S * hinv * S).trace();
}

/// Residuals of the full Euler-Lagrange system on the plan:
///   metric equation        f'(S) h^{αβ} S_{μα} S_{νβ} − ¼ f(S) h_{μν} = 0
///   connection equation    ∇_λ( f'(S) √h h^{μα} h^{νβ} S_{αβ} ) = 0
///   scalar constancy       S = c pointwise
///   determinant regularity (det S)² = εⁿ (det h)²
/// The connection equation divergence treats its argument as a weight-one
/// tensor density: ∇_λ T^{μν} = ∂_λ T^{μν} + Γ^μ_{λα} T^{αν} + Γ^ν_{λα} T^{μα}
/// − Γ^α_{αλ} T^{μν}.
inline VerificationReport verify_euler_lagrange(const PalatiniSolution& sol,
                                                const SamplePlan& plan, double tol = 1e-7) {
    const int n = sol.g.dim();
    const auto& f = sol.spec.f;
    const poly::Coeffs fp = poly::derivative(f);
    const poly::Coeffs fpp = poly::derivative(fp);

    double res_metric = 0.0, res_conn = 0.0, res_scalar = 0.0, res_det = 0.0;

    for (const auto& pt : plan.points()) {
        const auto bg = detail::connection_bundle(sol.g, pt, 3);
        const Eigen::MatrixXd S = detail::ricci_from_bundle(bg);
        const std::vector<Eigen::MatrixXd> dS = detail::ricci_derivative_from_bundle(bg);

        const MetricJets2 hj = sol.h.jets2(pt);
        const Eigen::MatrixXd& hv = hj.value;
        Eigen::FullPivLU<Eigen::MatrixXd> hlu(hv);
        if (!hlu.isInvertible())
            throw DegenerateMetricError(hlu.determinant(),
                                        detail::point_to_text(pt.cast<std::complex<double>>()));
        const Eigen::MatrixXd hinv = hlu.inverse();
        const std::vector<Eigen::MatrixXd> dhinv = detail::inverse_d1(hinv, hj.d1);
        const double deth = hlu.determinant();
        const double sqrth = std::sqrt(std::abs(deth));
        // ∂_λ √h = ½ √h tr(h^{-1} ∂_λ h)
        Eigen::VectorXd dsqrth(n);
        for (int a = 0; a < n; ++a) dsqrth[a] = 0.5 * sqrth * (hinv * hj.d1[a]).trace();

        // scalar invariant and its gradient
        const Eigen::MatrixXd hSh = hinv * S * hinv;
        const double sval = (hSh * S).trace();
        Eigen::VectorXd dsval(n);
        for (int a = 0; a < n; ++a)
            dsval[a] = 2.0 * (dhinv[a] * S * hinv * S).trace() +
                       2.0 * (hinv * dS[a] * hinv * S).trace();

        const double f0 = poly::eval(f, sval);
        const double f1 = poly::eval(fp, sval);
        const double f2 = poly::eval(fpp, sval);

        // (i) metric equation
        const Eigen::MatrixXd lhs_i = f1 * (S * hinv * S);
        const Eigen::MatrixXd rhs_i = 0.25 * f0 * hv;
        const double scale_i = std::max({lhs_i.norm(), rhs_i.norm(), 1e-30});
        res_metric = std::max(res_metric, (lhs_i - rhs_i).norm() / scale_i);

        // (ii) connection equation: T^{μν} = f'(S) √h (h^{-1} S h^{-1})^{μν}
        const Eigen::MatrixXd T = f1 * sqrth * hSh;
        std::vector<Eigen::MatrixXd> dT(n);
        for (int a = 0; a < n; ++a) {
            const Eigen::MatrixXd dhSh =
                dhinv[a] * S * hinv + hinv * dS[a] * hinv + hinv * S * dhinv[a];
            dT[a] = (f2 * dsval[a]) * sqrth * hSh + f1 * dsqrth[a] * hSh + f1 * sqrth * dhSh;
        }
        double gmax = 0.0;
        for (int s = 0; s < n; ++s) gmax = std::max(gmax, bg.Gamma[s].cwiseAbs().maxCoeff());
        const double scale_ii = std::max(T.norm(), 1e-30) * (1.0 + gmax);
        for (int l = 0; l < n; ++l)
            for (int mu = 0; mu < n; ++mu)
                for (int nu = 0; nu < n; ++nu) {
                    double cov = dT[l](mu, nu);
                    for (int a = 0; a < n; ++a)
                        cov += bg.Gamma[mu](l, a) * T(a, nu) + bg.Gamma[nu](l, a) * T(mu, a) -
                               bg.Gamma[a](a, l) * T(mu, nu);
                    res_conn = std::max(res_conn, std::abs(cov) / scale_ii);
                }

        // (iii) S = c pointwise
        res_scalar = std::max(res_scalar,
                              std::abs(sval - sol.root_c) / std::max(1.0, std::abs(sol.root_c)));

        // (iv) determinant regularity
        const double lhs_iv = S.determinant() * S.determinant();
        const double rhs_iv = std::pow(sol.epsilon, n) * deth * deth;
        res_det = std::max(res_det, std::abs(lhs_iv - rhs_iv) /
                                        std::max({std::abs(lhs_iv), std::abs(rhs_iv), 1e-30}));
    }

    VerificationReport rep;
    rep.add("euler_lagrange_metric", res_metric, tol);
    rep.add("euler_lagrange_connection", res_conn, tol);
    rep.add("scalar_constancy", res_scalar, tol);
    rep.add("determinant_regularity", res_det, tol);
    return rep;
}

/// ∇_α(√g g^{μν}) residual for the Levi-Civita connection (the identity that
/// pins the connection to the metric).
inline double metricity_density_residual(const MetricField& g, const Eigen::VectorXd& pt) {
    const auto b = detail::connection_bundle(g, pt);
    const int n = b.n;
    const double detg = b.det;
    const double sqrtg = std::sqrt(std::abs(detg));
    const std::vector<Eigen::MatrixXd> dginv = b.dginv;
    Eigen::VectorXd dsqrtg(n);
    for (int a = 0; a < n; ++a) dsqrtg[a] = 0.5 * sqrtg * (b.ginv * b.mj.d1[a]).trace();

    double worst = 0.0;
    const double scale = sqrtg * b.ginv.norm();
    for (int l = 0; l < n; ++l)
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                double cov = dsqrtg[l] * b.ginv(mu, nu) + sqrtg * dginv[l](mu, nu);
                for (int a = 0; a < n; ++a)
                    cov += b.Gamma[mu](l, a) * sqrtg * b.ginv(a, nu) +
                           b.Gamma[nu](l, a) * sqrtg * b.ginv(mu, a) -
                           b.Gamma[a](a, l) * sqrtg * b.ginv(mu, nu);
                worst = std::max(worst, std::abs(cov));
            }
    return worst / std::max(1.0, scale);
}

/// Prop-2.1 round trip at a point: the gap between S_{μν}(Γ) and g, and the
/// gap between the connection re-derived from S_{μν} and Γ itself.
struct RoundTripGap {
    double metric_gap = 0.0;
    double connection_gap = 0.0;
};

inline RoundTripGap ricci_metric_round_trip(const MetricField& g, const Eigen::VectorXd& pt) {
    const auto b = detail::connection_bundle(g, pt, 3);
    const Eigen::MatrixXd S = detail::ricci_from_bundle(b);
    const std::vector<Eigen::MatrixXd> dS = detail::ricci_derivative_from_bundle(b);
    RoundTripGap gap;
    gap.metric_gap = (S - b.g).norm() / b.g.norm();

    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (!lu.isInvertible()) throw SingularError("Ricci tensor degenerate at the sampled point");
    const Eigen::MatrixXd Sinv = lu.inverse();
    const int n = b.n;
    double worst = 0.0, scale = 1.0;
    for (int s = 0; s < n; ++s)
        for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn) {
                double acc = 0.0;
                for (int a = 0; a < n; ++a)
                    acc += 0.5 * Sinv(s, a) * (dS[m](nn, a) + dS[nn](m, a) - dS[a](m, nn));
                worst = std::max(worst, std::abs(acc - b.Gamma[s](m, nn)));
                scale = std::max(scale, std::abs(b.Gamma[s](m, nn)));
            }
    gap.connection_gap = worst / scale;
    return gap;
}

} // namespace twinmet
