#pragma once

#include <optional>
#include <set>

#include "twinmet/matrix_core.hpp"
#include "twinmet/tensor_calc.hpp"

namespace twinmet {

/// Two factors with disjoint coordinate names, optionally warped by
/// e^{2θ} with θ a function on the first factor.
struct ProductSpec {
    MetricField factor1;
    MetricField factor2;
    std::optional<ScalarExpr> warp;

    void validate() const {
        std::set<std::string> names(factor1.chart().coords().begin(),
                                    factor1.chart().coords().end());
        for (const auto& c : factor2.chart().coords())
            if (!names.insert(c).second)
                throw Error("product factors share the coordinate '" + c + "'");
    }

    ChartSpec product_chart() const {
        std::vector<std::string> coords = factor1.chart().coords();
        coords.insert(coords.end(), factor2.chart().coords().begin(),
                      factor2.chart().coords().end());
        std::vector<Interval> dom;
        for (int i = 0; i < factor1.dim(); ++i) dom.push_back(factor1.chart().domain(i));
        for (int i = 0; i < factor2.dim(); ++i) dom.push_back(factor2.chart().domain(i));
        return ChartSpec::make(factor1.chart().name() + "_x_" + factor2.chart().name(), coords,
                               dom);
    }
};

struct ProductBuild {
    MetricField g;  // g1 ⊕ g2
    KField P;       // +1 on the first factor, -1 on the second
    TwinField twin; // h = gP = g1 ⊖ g2
};

namespace detail {

inline std::vector<std::vector<ScalarExpr>> block_components(const ProductSpec& spec,
                                                             const ScalarExpr* conformal2) {
    const int n1 = spec.factor1.dim();
    const int n2 = spec.factor2.dim();
    const int n = n1 + n2;
    ScalarExpr zero = ScalarExpr::constant(0.0);
    std::vector<std::vector<ScalarExpr>> comps(
        static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n), zero));
    for (int i = 0; i < n1; ++i)
        for (int j = i; j < n1; ++j)
            comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                spec.factor1.component(i, j);
    std::vector<int> shift(static_cast<std::size_t>(n2));
    for (int i = 0; i < n2; ++i) shift[static_cast<std::size_t>(i)] = n1 + i;
    for (int i = 0; i < n2; ++i)
        for (int j = i; j < n2; ++j) {
            ScalarExpr e = remap_coordinates(spec.factor2.component(i, j), shift);
            if (conformal2) e = (*conformal2) * e;
            comps[static_cast<std::size_t>(n1 + i)][static_cast<std::size_t>(n1 + j)] = e;
        }
    return comps;
}

} // namespace detail

/// Unwarped product: block metric with the canonical product structure whose
/// twin realizes ds_h² = g1 − g2.
inline ProductBuild build_product(const ProductSpec& spec) {
    spec.validate();
    if (spec.warp) throw Error("build_product: spec carries a warp; use build_warped");
    const ChartSpec chart = spec.product_chart();
    const int n1 = spec.factor1.dim();
    const int n = chart.dim();

    ProductBuild out;
    out.g = MetricField::make(chart, detail::block_components(spec, nullptr));
    Eigen::MatrixXd pm = Eigen::MatrixXd::Identity(n, n);
    for (int i = n1; i < n; ++i) pm(i, i) = -1.0;
    out.P = KField::constant(chart, pm, 1, 1);
    out.twin = twin_field(out.g, out.P);
    return out;
}

/// Warped product g1 ⊕ e^{2θ} g2 (θ over the first factor's chart).
inline MetricField build_warped(const ProductSpec& spec) {
    spec.validate();
    if (!spec.warp) {
        ProductSpec plain = spec;
        return build_product(plain).g;
    }
    const ChartSpec chart = spec.product_chart();
    // θ lives on factor1 whose coordinates keep their indices in the product
    ScalarExpr conformal =
        exp(ScalarExpr::constant(2.0) * (*spec.warp));
    return MetricField::make(chart, detail::block_components(spec, &conformal));
}

struct ProductEinsteinReport {
    EinsteinReport factor1;
    EinsteinReport factor2;
    EinsteinReport joint;
    bool gammas_match = false;
    bool joint_einstein = false;
};

/// Prop-style criterion: the block metric is Einstein iff both factors are
/// Einstein with the same constant.
inline ProductEinsteinReport einstein_product_criterion(const ProductSpec& spec,
                                                        std::size_t count = 64,
                                                        std::uint64_t seed = 0,
                                                        double tol = 1e-8) {
    spec.validate();
    if (spec.warp) throw Error("einstein_product_criterion applies to unwarped products");
    ProductEinsteinReport rep;
    rep.factor1 =
        einstein_residual(spec.factor1, SamplePlan::halton(spec.factor1.chart(), count, seed));
    rep.factor2 =
        einstein_residual(spec.factor2, SamplePlan::halton(spec.factor2.chart(), count, seed));
    const MetricField g = build_product(spec).g;
    rep.joint = einstein_residual(g, SamplePlan::halton(g.chart(), count, seed));
    rep.gammas_match =
        std::abs(rep.factor1.gamma_fit - rep.factor2.gamma_fit) <= 1e2 * tol &&
        rep.factor1.max_residual <= tol && rep.factor2.max_residual <= tol;
    rep.joint_einstein = rep.joint.max_residual <= tol;
    return rep;
}

struct RiemannianizeResult {
    std::vector<Eigen::VectorXd> points;
    std::vector<Eigen::MatrixXd> P; // sign(h0^-1 g) per point
    std::vector<Eigen::MatrixXd> h; // strictly Riemannian metric per point
    double max_relation_residual = 0.0;
    bool trivial = false; // P = +-I everywhere (g was definite)
    // promoted to fields when constant across the plan
    std::optional<KField> constant_P;
    std::optional<MetricField> constant_h;
};

/// Prop-style Riemannianization: pointwise spectral sign of A = h0⁻¹g in the
/// h0 inner product; g(X,Y) = h(PX,Y) and h(PX,PY) = h(X,Y) by construction.
inline RiemannianizeResult riemannianize(const MetricField& g, const MetricField& h0,
                                         const SamplePlan& plan, double tol = 1e-9) {
    if (!g.chart().same_as(h0.chart()))
        throw ChartMismatchError(g.chart().name(), h0.chart().name());
    const int n = g.dim();
    RiemannianizeResult out;
    bool all_plus = true, all_minus = true;
    for (const auto& pt : plan.points()) {
        const Eigen::MatrixXd gv = g.value(pt);
        const Eigen::MatrixXd hv = h0.value(pt);
        Eigen::LLT<Eigen::MatrixXd> llt(hv);
        if (llt.info() != Eigen::Success)
            throw DefinitenessError("background metric not positive definite at " +
                                    detail::point_to_text(pt.cast<std::complex<double>>()));
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(gv, hv);
        const Eigen::VectorXd lam = es.eigenvalues();
        const double lmax = lam.cwiseAbs().maxCoeff();
        if (lmax == 0.0 || lam.cwiseAbs().minCoeff() < 1e-12 * lmax)
            throw SingularError("riemannianize: g degenerate at " +
                                detail::point_to_text(pt.cast<std::complex<double>>()));
        const Eigen::MatrixXd V = es.eigenvectors(); // V^t h0 V = I
        const Eigen::VectorXd s = lam.array().sign().matrix();
        const Eigen::MatrixXd P = V * s.asDiagonal() * V.transpose() * hv;
        const Eigen::MatrixXd habs =
            hv * V * lam.array().abs().matrix().asDiagonal() * V.transpose() * hv;
        const Eigen::MatrixXd hsym = 0.5 * (habs + habs.transpose());

        Eigen::LLT<Eigen::MatrixXd> hout(hsym);
        if (hout.info() != Eigen::Success)
            throw DefinitenessError("riemannianized metric not positive definite at " +
                                    detail::point_to_text(pt.cast<std::complex<double>>()));

        const double scale = std::max(1.0, gv.norm());
        double res = (P * P - Eigen::MatrixXd::Identity(n, n)).norm() / std::sqrt(double(n));
        res = std::max(res, (P.transpose() * hsym * P - hsym).norm() / hsym.norm());
        res = std::max(res, (hsym * P - gv).norm() / scale);
        out.max_relation_residual = std::max(out.max_relation_residual, res);

        for (int i = 0; i < n; ++i) {
            if (lam[i] < 0) all_plus = false;
            if (lam[i] > 0) all_minus = false;
        }
        out.points.push_back(pt);
        out.P.push_back(P);
        out.h.push_back(hsym);
    }
    if (out.max_relation_residual > tol)
        throw Error("riemannianize: relation residual " +
                    std::to_string(out.max_relation_residual));
    out.trivial = all_plus || all_minus;

    // promote constant outputs to honest fields
    auto is_constant = [&](const std::vector<Eigen::MatrixXd>& mats) {
        for (const auto& m : mats)
            if ((m - mats.front()).norm() > 1e-10 * std::max(1.0, mats.front().norm()))
                return false;
        return true;
    };
    if (!out.P.empty() && is_constant(out.P))
        out.constant_P = KField::constant(g.chart(), out.P.front(), 1, 1);
    if (!out.h.empty() && is_constant(out.h))
        out.constant_h = MetricField::constant(g.chart(), out.h.front());
    return out;
}

} // namespace twinmet
