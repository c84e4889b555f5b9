#pragma once

#include <string>
#include <vector>

#include "twinmet/fields.hpp"
#include "twinmet/matrix_core.hpp"

namespace twinmet::fixtures {

inline ChartSpec flat_chart(int n, const std::string& name = "flat") {
    std::vector<std::string> coords;
    std::vector<Interval> dom;
    for (int i = 0; i < n; ++i) {
        coords.push_back("x" + std::to_string(i + 1));
        dom.push_back({-1.0, 1.0});
    }
    return ChartSpec::make(name + std::to_string(n), coords, dom);
}

inline MetricField flat_metric(int n) {
    return MetricField::constant(flat_chart(n), Eigen::MatrixXd::Identity(n, n));
}

/// Unit 2-sphere patch: ds² = dθ² + sin²θ dφ².
inline MetricField sphere2(const std::string& name = "s2") {
    ChartSpec chart = ChartSpec::make(name, {"th", "ph"}, {{0.4, 2.7}, {0.3, 6.0}});
    ScalarExpr one = ScalarExpr::constant(1.0);
    ScalarExpr zero = ScalarExpr::constant(0.0);
    ScalarExpr s2 = pow(sin(ScalarExpr::coordinate(0)), 2);
    return MetricField::make(chart, {{one, zero}, {zero, s2}});
}

/// Unit 3-sphere patch: ds² = dχ² + sin²χ (dθ² + sin²θ dφ²).
inline MetricField sphere3(const std::string& name = "s3") {
    ChartSpec chart =
        ChartSpec::make(name, {"ch", "th", "ph"}, {{0.5, 2.6}, {0.5, 2.6}, {0.3, 6.0}});
    ScalarExpr one = ScalarExpr::constant(1.0);
    ScalarExpr zero = ScalarExpr::constant(0.0);
    ScalarExpr sch2 = pow(sin(ScalarExpr::coordinate(0)), 2);
    ScalarExpr sth2 = pow(sin(ScalarExpr::coordinate(1)), 2);
    return MetricField::make(chart, {{one, zero, zero},
                                     {zero, sch2, zero},
                                     {zero, zero, sch2 * sth2}});
}

/// Euclidean plane in polar coordinates: ds² = dr² + r² dφ² (flat).
inline MetricField polar_plane() {
    ChartSpec chart = ChartSpec::make("polar", {"r", "ph"}, {{0.5, 3.0}, {0.3, 6.0}});
    ScalarExpr one = ScalarExpr::constant(1.0);
    ScalarExpr zero = ScalarExpr::constant(0.0);
    ScalarExpr r2 = pow(ScalarExpr::coordinate(0), 2);
    return MetricField::make(chart, {{one, zero}, {zero, r2}});
}

/// Round m-sphere in graph coordinates: g_ab = δ_ab + x_a x_b / (1 − x·x).
/// The same components continue holomorphically to the complex sphere.
inline MetricField sphere_graph(int m, const std::string& name = "sgraph") {
    std::vector<std::string> coords;
    std::vector<Interval> dom;
    const double r = std::sqrt(0.25 / m);
    for (int i = 0; i < m; ++i) {
        coords.push_back("x" + std::to_string(i + 1));
        dom.push_back({-r, r});
    }
    ChartSpec chart = ChartSpec::make(name + std::to_string(m), coords, dom);
    ScalarExpr xx;
    for (int a = 0; a < m; ++a) {
        ScalarExpr t = pow(ScalarExpr::coordinate(a), 2);
        xx = xx.valid() ? xx + t : t;
    }
    ScalarExpr denom = ScalarExpr::constant(1.0) - xx;
    std::vector<std::vector<ScalarExpr>> comps(
        static_cast<std::size_t>(m), std::vector<ScalarExpr>(static_cast<std::size_t>(m)));
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            ScalarExpr t = ScalarExpr::coordinate(a) * ScalarExpr::coordinate(b) / denom;
            if (a == b) t = ScalarExpr::constant(1.0) + t;
            comps[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = t;
        }
    return MetricField::make(chart, comps);
}

/// Canonical J0 on R^{2m}: J ∂x = ∂y, as a matrix [[0, -I], [I, 0]].
inline Eigen::MatrixXd j0_xy(int m) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    J.topRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
    J.bottomLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
    return J;
}

/// Non-integrable almost-complex structure: K = T J0 T⁻¹ with the shear
/// T = I + y·E13 depending on the second coordinate. K is polynomial:
///   K = J0 + y (E J0 − J0 E) − y² E J0 E.
/// Nijenhuis components at (0.7, 0.3, −0.2, 0.5) include N^0_{01} = 0.3,
/// N^0_{12} = −0.91 and N^0_{23} = −0.6 (checked against the bracket
/// definition symbolically).
inline KField shear_k4(const ChartSpec& chart) {
    if (chart.dim() != 4) throw Error("shear_k4 needs a 4d chart");
    Eigen::MatrixXd J0(4, 4), C(4, 4), B(4, 4);
    J0 << 0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0;
    C.setZero();
    C(0, 0) = -1;
    C(2, 2) = 1;
    B.setZero();
    B(0, 2) = 1;
    ScalarExpr y = ScalarExpr::coordinate(1);
    std::vector<std::vector<ScalarExpr>> comps(4, std::vector<ScalarExpr>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                ScalarExpr::constant(J0(i, j)) + ScalarExpr::constant(C(i, j)) * y +
                ScalarExpr::constant(B(i, j)) * pow(y, 2);
    return KField::make(chart, comps, -1, 1);
}

/// The paper-family Lagrangian f(S) = (nS + c0(8−n))².
inline std::vector<double> paper_lagrangian(int n, double c0) {
    const double p = static_cast<double>(n);
    const double q = c0 * (8.0 - p);
    return {q * q, 2 * p * q, p * p};
}

/// Combined negative control for the anti-Kähler checks: the x₁-dependent
/// entry breaks ∇J = 0 and, because only the xx block carries it, the
/// anti-Hermitian block pattern as well.
inline std::pair<MetricField, KField> antikahler_negative_control() {
    ChartSpec chart = ChartSpec::make("akneg", {"x1", "x2", "y1", "y2"},
                                      {{0.8, 1.4}, {-0.4, 0.4}, {-0.4, 0.4}, {-0.4, 0.4}});
    ScalarExpr zero = ScalarExpr::constant(0.0);
    std::vector<std::vector<ScalarExpr>> comps(4, std::vector<ScalarExpr>(4, zero));
    comps[0][0] = ScalarExpr::constant(2.0) +
                  ScalarExpr::constant(2.0) * pow(ScalarExpr::coordinate(0), 2);
    comps[1][1] = ScalarExpr::constant(2.0);
    comps[2][2] = ScalarExpr::constant(-2.0);
    comps[3][3] = ScalarExpr::constant(-2.0);
    MetricField g = MetricField::make(chart, comps);
    KField J = KField::constant(chart, j0_xy(2), -1, -1);
    return {std::move(g), std::move(J)};
}

} // namespace twinmet::fixtures
