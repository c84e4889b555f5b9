#pragma once

#include <complex>
#include <string>
#include <vector>

#include "twinmet/fixtures.hpp"
#include "twinmet/matrix_core.hpp"
#include "twinmet/tensor_calc.hpp"

namespace twinmet {

/// Symmetric m×m matrix of component functions of an anti-Hermitian metric
/// in its canonical complex form. Holomorphic fields carry expressions over
/// the z-chart; every field carries the real-chart (x, y) form used for
/// Cauchy-Riemann checks and realification. Negative controls are built
/// directly on the real chart and have no z-form.
class HolomorphicMetricField {
public:
    HolomorphicMetricField() = default;

    static HolomorphicMetricField from_holomorphic(ChartSpec zchart,
                                                   std::vector<std::vector<ScalarExpr>> comps) {
        HolomorphicMetricField f;
        f.m_ = zchart.dim();
        f.zchart_ = std::move(zchart);
        f.zcomps_ = detail::mirror_upper(std::move(comps));
        f.has_zform_ = true;
        f.real_chart_ = make_real_chart(f.zchart_);
        // z^a -> x^a + i y^a
        std::vector<ScalarExpr> subs;
        for (int a = 0; a < f.m_; ++a)
            subs.push_back(ScalarExpr::coordinate(a) +
                           ScalarExpr::constant(std::complex<double>(0.0, 1.0)) *
                               ScalarExpr::coordinate(f.m_ + a));
        f.rcomps_.assign(static_cast<std::size_t>(f.m_),
                         std::vector<ScalarExpr>(static_cast<std::size_t>(f.m_)));
        for (int a = 0; a < f.m_; ++a)
            for (int b = 0; b < f.m_; ++b)
                f.rcomps_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                    substitute_coordinates(f.zcomps_[static_cast<std::size_t>(a)]
                                                   [static_cast<std::size_t>(b)],
                                           subs);
        return f;
    }

    /// Components given directly on the real chart (complex-valued trees);
    /// the non-holomorphic negative controls enter this way.
    static HolomorphicMetricField from_real_chart(ChartSpec real_chart,
                                                  std::vector<std::vector<ScalarExpr>> comps) {
        if (real_chart.dim() % 2 != 0) throw ParityError(real_chart.dim());
        HolomorphicMetricField f;
        f.m_ = real_chart.dim() / 2;
        f.real_chart_ = std::move(real_chart);
        f.rcomps_ = detail::mirror_upper(std::move(comps));
        f.has_zform_ = false;
        return f;
    }

    int m() const { return m_; }
    bool has_holomorphic_form() const { return has_zform_; }
    const ChartSpec& zchart() const {
        if (!has_zform_) throw Error("field has no holomorphic coordinate form");
        return zchart_;
    }
    const ChartSpec& real_chart() const { return real_chart_; }
    const ScalarExpr& zcomponent(int a, int b) const {
        if (!has_zform_) throw Error("field has no holomorphic coordinate form");
        return zcomps_.at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b));
    }
    const ScalarExpr& rcomponent(int a, int b) const {
        return rcomps_.at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b));
    }

    /// Complex component matrix at a real-chart point.
    Eigen::MatrixXcd value_at_real(const Eigen::VectorXd& xy) const {
        Eigen::MatrixXcd g(m_, m_);
        for (int a = 0; a < m_; ++a)
            for (int b = a; b < m_; ++b) {
                const auto j = eval_real_chart_cjet2(rcomponent(a, b), xy, &real_chart_);
                g(a, b) = j.v;
                g(b, a) = j.v;
            }
        return g;
    }

    Eigen::MatrixXcd value_at_z(const Eigen::VectorXcd& z) const {
        Eigen::MatrixXcd g(m_, m_);
        for (int a = 0; a < m_; ++a)
            for (int b = a; b < m_; ++b) {
                const auto j = eval_complex_jet1(zcomponent(a, b), z, &zchart_);
                g(a, b) = j.v;
                g(b, a) = j.v;
            }
        return g;
    }

    static Eigen::VectorXcd z_of(const Eigen::VectorXd& xy) {
        const int m = static_cast<int>(xy.size()) / 2;
        Eigen::VectorXcd z(m);
        for (int a = 0; a < m; ++a) z[a] = std::complex<double>(xy[a], xy[m + a]);
        return z;
    }

private:
    static ChartSpec make_real_chart(const ChartSpec& zchart) {
        std::vector<std::string> coords;
        std::vector<Interval> dom;
        const int m = zchart.dim();
        for (int a = 0; a < m; ++a) coords.push_back("x" + std::to_string(a + 1));
        for (int a = 0; a < m; ++a) coords.push_back("y" + std::to_string(a + 1));
        for (int a = 0; a < m; ++a) dom.push_back(zchart.domain(a));
        for (int a = 0; a < m; ++a) dom.push_back(zchart.domain(a));
        return ChartSpec::make(zchart.name() + "_re", coords, dom);
    }

    int m_ = 0;
    ChartSpec zchart_;
    ChartSpec real_chart_;
    std::vector<std::vector<ScalarExpr>> zcomps_;
    std::vector<std::vector<ScalarExpr>> rcomps_;
    bool has_zform_ = false;
};

/// The anti-Hermitian Einstein example: g_ab = δ_ab + z_a z_b / (1 − z·z)
/// on the complex sphere, sampled inside |z·z| ≤ 1/2.
inline HolomorphicMetricField complex_sphere_metric(int m) {
    if (m < 1) throw Error("complex_sphere_metric: m >= 1 required");
    std::vector<std::string> coords;
    std::vector<Interval> dom;
    const double r = std::sqrt(0.25 / m);
    for (int a = 0; a < m; ++a) {
        coords.push_back("z" + std::to_string(a + 1));
        dom.push_back({-r, r});
    }
    ChartSpec zchart = ChartSpec::make("csphere" + std::to_string(m), coords, dom);
    ScalarExpr zz;
    for (int a = 0; a < m; ++a) {
        ScalarExpr t = pow(ScalarExpr::coordinate(a), 2);
        zz = zz.valid() ? zz + t : t;
    }
    ScalarExpr denom = ScalarExpr::constant(1.0) - zz;
    std::vector<std::vector<ScalarExpr>> comps(
        static_cast<std::size_t>(m), std::vector<ScalarExpr>(static_cast<std::size_t>(m)));
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            ScalarExpr t = ScalarExpr::coordinate(a) * ScalarExpr::coordinate(b) / denom;
            if (a == b) t = ScalarExpr::constant(1.0) + t;
            comps[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = t;
        }
    return HolomorphicMetricField::from_holomorphic(std::move(zchart), std::move(comps));
}

/// Max Cauchy-Riemann residual |∂_{z̄^c} g_ab| over the plan, relative to the
/// component scale. Zero (to rounding) iff the components are holomorphic.
inline double holomorphy_check(const HolomorphicMetricField& G, const SamplePlan& plan) {
    const int m = G.m();
    double worst = 0.0;
    for (const auto& xy : plan.points()) {
        double gscale = 1.0;
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                const auto j = eval_real_chart_cjet2(G.rcomponent(a, b), xy, &G.real_chart());
                gscale = std::max(gscale, std::abs(j.v));
                for (int c = 0; c < m; ++c) {
                    const std::complex<double> dzbar =
                        0.5 * (j.g[c] + std::complex<double>(0.0, 1.0) * j.g[m + c]);
                    worst = std::max(worst, std::abs(dzbar) / gscale);
                }
            }
    }
    return worst;
}

struct RealifiedMetric {
    int m = 0;
    MetricField metric; // 2m-dimensional, signature (m, m)
    KField J;           // constant canonical complex structure, J ∂x = ∂y
};

namespace detail {

/// ds² = g_ab dz^a dz^b + conj expands to the block form 2[[A, −B], [−B, −A]]
/// with A = Re g_ab, B = Im g_ab (re-derived from the dz expansion).
inline RealifiedMetric realify_unchecked(const HolomorphicMetricField& G) {
    const int m = G.m();
    const int n = 2 * m;
    const ChartSpec& chart = G.real_chart();
    ScalarExpr two = ScalarExpr::constant(2.0);
    std::vector<std::vector<ScalarExpr>> comps(
        static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            const ScalarExpr& E = G.rcomponent(a, b);
            comps[a][b] = two * re(E);
            comps[m + a][m + b] = ScalarExpr::constant(-2.0) * re(E);
        }
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            if (a <= m + b) comps[a][m + b] = ScalarExpr::constant(-2.0) * im(G.rcomponent(a, b));
        }
    RealifiedMetric out;
    out.m = m;
    out.metric = MetricField::make(chart, comps);
    out.J = KField::constant(chart, fixtures::j0_xy(m), -1, -1);
    return out;
}

} // namespace detail

/// Realify a holomorphic metric; the holomorphy gate runs on the plan first.
inline RealifiedMetric realify(const HolomorphicMetricField& G, const SamplePlan& plan,
                               double tol = 1e-9) {
    const double hres = holomorphy_check(G, plan);
    if (hres > tol) throw PreconditionError("holomorphic components (CR residual)", hres);
    RealifiedMetric out = detail::realify_unchecked(G);
    // nondegeneracy and split signature at every sampled point
    for (const auto& xy : plan.points()) {
        const auto sig = signature(SymMatrix::make(out.metric.value(xy)));
        if (sig.first != G.m() || sig.second != G.m())
            throw Error("realified metric signature is not (m, m) at " +
                        detail::point_to_text(xy.cast<std::complex<double>>()));
    }
    return out;
}

namespace detail {

/// Complex frame matrix W with Z_a = ∂x^a − i ∂y^a and Z_ā = ∂x^a + i ∂y^a.
inline Eigen::MatrixXcd z_frame(int m) {
    const std::complex<double> I(0.0, 1.0);
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
    for (int a = 0; a < m; ++a) {
        W(a, a) = 1.0;
        W(m + a, a) = -I;
        W(a, m + a) = 1.0;
        W(m + a, m + a) = I;
    }
    return W;
}

struct ComplexConnection {
    Eigen::MatrixXcd g, ginv;
    std::vector<Eigen::MatrixXcd> Gamma;               // [c](a,b)
    std::vector<std::vector<Eigen::MatrixXcd>> dGamma; // [d][c](a,b)
};

/// Holomorphic-coordinate Levi-Civita data from complex jets of g_ab.
inline ComplexConnection complex_connection(const HolomorphicMetricField& G,
                                            const Eigen::VectorXcd& z) {
    const int m = G.m();
    ComplexConnection c;
    c.g.resize(m, m);
    std::vector<Eigen::MatrixXcd> d1(m, Eigen::MatrixXcd::Zero(m, m));
    std::vector<std::vector<Eigen::MatrixXcd>> d2(
        m, std::vector<Eigen::MatrixXcd>(m, Eigen::MatrixXcd::Zero(m, m)));
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            const auto j = eval_complex_jet2(G.zcomponent(a, b), z, &G.zchart());
            c.g(a, b) = c.g(b, a) = j.v;
            for (int p = 0; p < m; ++p) {
                d1[p](a, b) = d1[p](b, a) = j.g[p];
                for (int q = 0; q < m; ++q) d2[p][q](a, b) = d2[p][q](b, a) = j.H(p, q);
            }
        }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(c.g);
    if (!lu.isInvertible())
        throw DegenerateMetricError(std::abs(lu.determinant()), point_to_text(z));
    c.ginv = lu.inverse();
    std::vector<Eigen::MatrixXcd> dginv(m);
    for (int p = 0; p < m; ++p) dginv[p] = -c.ginv * d1[p] * c.ginv;

    c.Gamma.assign(m, Eigen::MatrixXcd::Zero(m, m));
    for (int s = 0; s < m; ++s)
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                std::complex<double> acc = 0.0;
                for (int d = 0; d < m; ++d)
                    acc += c.ginv(s, d) * (d1[a](b, d) + d1[b](a, d) - d1[d](a, b));
                c.Gamma[s](a, b) = c.Gamma[s](b, a) = 0.5 * acc;
            }
    c.dGamma.assign(m, std::vector<Eigen::MatrixXcd>(m, Eigen::MatrixXcd::Zero(m, m)));
    for (int l = 0; l < m; ++l)
        for (int s = 0; s < m; ++s)
            for (int a = 0; a < m; ++a)
                for (int b = a; b < m; ++b) {
                    std::complex<double> acc = 0.0;
                    for (int d = 0; d < m; ++d) {
                        acc += dginv[l](s, d) * (d1[a](b, d) + d1[b](a, d) - d1[d](a, b));
                        acc += c.ginv(s, d) *
                               (d2[l][a](b, d) + d2[l][b](a, d) - d2[l][d](a, b));
                    }
                    c.dGamma[l][s](a, b) = c.dGamma[l][s](b, a) = 0.5 * acc;
                }
    return c;
}

inline Eigen::MatrixXcd complex_ricci_from(const ComplexConnection& c) {
    const int m = static_cast<int>(c.g.rows());
    Eigen::MatrixXcd ric = Eigen::MatrixXcd::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int s = 0; s < m; ++s) {
            std::complex<double> acc = 0.0;
            for (int nu = 0; nu < m; ++nu) {
                acc += c.dGamma[nu][nu](a, s) - c.dGamma[s][nu](a, nu);
                for (int d = 0; d < m; ++d)
                    acc += c.Gamma[nu](d, nu) * c.Gamma[d](a, s) -
                           c.Gamma[nu](d, s) * c.Gamma[d](a, nu);
            }
            ric(a, s) = acc;
        }
    return ric;
}

} // namespace detail

struct ComplexChristoffel {
    std::vector<Eigen::MatrixXcd> symbols; // [c](a,b), coordinate frame, 1/2 convention
    double mixed_symbol_residual = 0.0;    // Z-frame mixed symbols from the real route
    double frame_factor_residual = 0.0;    // Z-frame pure block vs 2x coordinate frame
};

/// Γ^c_{ab} of the holomorphic metric; also assembles the realified metric's
/// real Christoffel symbols in the Z-frame and checks that every mixed-index
/// symbol vanishes and the pure block is twice the coordinate-frame symbols
/// (Z_a = 2 ∂_a carries one factor of 2).
inline ComplexChristoffel complex_christoffel(const HolomorphicMetricField& G,
                                              const Eigen::VectorXcd& z, double tol = 1e-8) {
    const int m = G.m();
    const auto conn = detail::complex_connection(G, z);
    ComplexChristoffel out;
    out.symbols = conn.Gamma;

    // real route: Christoffel of the realified metric at (x, y), pushed into
    // the Z-frame by conjugation with W
    Eigen::VectorXd xy(2 * m);
    for (int a = 0; a < m; ++a) {
        xy[a] = z[a].real();
        xy[m + a] = z[a].imag();
    }
    const RealifiedMetric real = detail::realify_unchecked(G);
    const auto b = detail::connection_bundle(real.metric, xy);
    const Eigen::MatrixXcd W = detail::z_frame(m);
    const Eigen::MatrixXcd Winv = W.inverse();
    const int n = 2 * m;
    // Γ̃^C_{AB} = (W^{-1})^C_μ W^ν_A W^σ_B Γ^μ_{νσ}
    std::vector<Eigen::MatrixXcd> Gt(n, Eigen::MatrixXcd::Zero(n, n));
    for (int C = 0; C < n; ++C)
        for (int A = 0; A < n; ++A)
            for (int B = A; B < n; ++B) {
                std::complex<double> acc = 0.0;
                for (int mu = 0; mu < n; ++mu)
                    for (int nu = 0; nu < n; ++nu)
                        for (int sg = 0; sg < n; ++sg)
                            acc += Winv(C, mu) * W(nu, A) * W(sg, B) * b.Gamma[mu](nu, sg);
                Gt[C](A, B) = Gt[C](B, A) = acc;
            }
    double scale = 1.0;
    for (int C = 0; C < n; ++C) scale = std::max(scale, Gt[C].cwiseAbs().maxCoeff());
    for (int C = 0; C < n; ++C)
        for (int A = 0; A < n; ++A)
            for (int B = 0; B < n; ++B) {
                const bool pure_holo = (C < m && A < m && B < m);
                const bool pure_anti = (C >= m && A >= m && B >= m);
                if (!pure_holo && !pure_anti)
                    out.mixed_symbol_residual =
                        std::max(out.mixed_symbol_residual, std::abs(Gt[C](A, B)) / scale);
            }
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
            for (int bb = 0; bb < m; ++bb)
                out.frame_factor_residual =
                    std::max(out.frame_factor_residual,
                             std::abs(Gt[c](a, bb) - 2.0 * conn.Gamma[c](a, bb)) / scale);
    if (out.mixed_symbol_residual > tol)
        throw Error("complex_christoffel: mixed-index symbols do not vanish (residual " +
                    std::to_string(out.mixed_symbol_residual) + ")");
    return out;
}

struct ComplexEinsteinReport {
    std::complex<double> gamma_fit{0.0, 0.0};
    double max_residual = 0.0;   // complex-route ‖Ric − γ g‖/‖g‖
    double real_gamma_fit = 0.0; // realified-route fit
    double real_max_residual = 0.0;
    double route_gamma_gap = 0.0; // |Re γ_complex − γ_real| + |Im γ_complex|
};

/// Complex-route Einstein check (Ricci built purely in holomorphic
/// coordinates) with the realified real-route cross-check.
inline ComplexEinsteinReport complex_einstein_check(const HolomorphicMetricField& G,
                                                    const SamplePlan& plan, double tol = 1e-9) {
    const double hres = holomorphy_check(G, plan);
    if (hres > tol) throw PreconditionError("holomorphic components (CR residual)", hres);
    const int m = G.m();
    detail::KahanSum num_re, num_im, den;
    std::vector<Eigen::MatrixXcd> rics, gs;
    for (const auto& xy : plan.points()) {
        const Eigen::VectorXcd z = HolomorphicMetricField::z_of(xy);
        const auto conn = detail::complex_connection(G, z);
        const Eigen::MatrixXcd ric = detail::complex_ricci_from(conn);
        const std::complex<double> tr = (conn.ginv * ric).trace();
        num_re.add(tr.real());
        num_im.add(tr.imag());
        den.add(static_cast<double>(m));
        rics.push_back(ric);
        gs.push_back(conn.g);
    }
    ComplexEinsteinReport rep;
    rep.gamma_fit = std::complex<double>(num_re.s / den.s, num_im.s / den.s);
    for (std::size_t i = 0; i < rics.size(); ++i)
        rep.max_residual = std::max(
            rep.max_residual, (rics[i] - rep.gamma_fit * gs[i]).norm() / gs[i].norm());

    const RealifiedMetric real = detail::realify_unchecked(G);
    const EinsteinReport rr = einstein_residual(real.metric, plan);
    rep.real_gamma_fit = rr.gamma_fit;
    rep.real_max_residual = rr.max_residual;
    rep.route_gamma_gap =
        std::abs(rep.gamma_fit.real() - rr.gamma_fit) + std::abs(rep.gamma_fit.imag());
    return rep;
}

struct BlockCheckReport {
    double g_mixed = 0.0;        // ‖g_{a b̄}‖ / ‖g_AB‖ in the Z-frame
    double ricci_mixed = 0.0;    // ‖R_{a b̄}‖ / max(1, ‖R_AB‖)
    double conjugation_gap = 0.0; // ‖g_{ā b̄} − conj g_{ab}‖ / ‖g_AB‖
    double max() const { return std::max({g_mixed, ricci_mixed, conjugation_gap}); }
};

/// Transform a real metric and its Ricci into the Z-frame and measure the
/// mixed holomorphic/antiholomorphic blocks (zero for anti-Hermitian data).
inline BlockCheckReport antihermitian_block_check(const MetricField& g_real, const KField& J,
                                                  const SamplePlan& plan) {
    if (!g_real.chart().same_as(J.chart()))
        throw ChartMismatchError(g_real.chart().name(), J.chart().name());
    const int n = g_real.dim();
    if (n % 2 != 0) throw ParityError(n);
    const int m = n / 2;
    // the construction needs the canonical constant J
    const Eigen::MatrixXd j0 = fixtures::j0_xy(m);
    for (const auto& pt : plan.points()) {
        if ((J.value(pt) - j0).norm() > 1e-12)
            throw Error("antihermitian_block_check needs the constant canonical J");
        break;
    }
    const Eigen::MatrixXcd W = detail::z_frame(m);
    BlockCheckReport rep;
    for (const auto& pt : plan.points()) {
        const Eigen::MatrixXcd gAB =
            W.transpose() * g_real.value(pt).cast<std::complex<double>>() * W;
        const auto ric = ricci(g_real, pt);
        Eigen::MatrixXcd ricAB(n, n);
        {
            Eigen::MatrixXd ricM(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) ricM(i, j) = ric(i, j);
            ricAB = W.transpose() * ricM.cast<std::complex<double>>() * W;
        }
        const double gn = gAB.norm();
        rep.g_mixed = std::max(rep.g_mixed, gAB.topRightCorner(m, m).norm() / gn);
        rep.ricci_mixed = std::max(
            rep.ricci_mixed, ricAB.topRightCorner(m, m).norm() / std::max(1.0, ricAB.norm()));
        rep.conjugation_gap =
            std::max(rep.conjugation_gap,
                     (gAB.bottomRightCorner(m, m) - gAB.topLeftCorner(m, m).conjugate()).norm() /
                         gn);
    }
    return rep;
}

} // namespace twinmet
