#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "twinmet/chart.hpp"
#include "twinmet/expr.hpp"
#include "twinmet/jet.hpp"

namespace twinmet {

namespace detail {

inline std::vector<std::vector<ScalarExpr>> mirror_upper(
    std::vector<std::vector<ScalarExpr>> comps) {
    const std::size_t n = comps.size();
    for (auto& row : comps)
        if (row.size() != n) throw Error("component matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) comps[j][i] = comps[i][j];
    return comps;
}

} // namespace detail

/// Metric component values with first/second coordinate derivatives at a point.
struct MetricJets2 {
    Eigen::MatrixXd value;
    std::vector<Eigen::MatrixXd> d1;               // d1[a](m,n) = ∂_a g_mn
    std::vector<std::vector<Eigen::MatrixXd>> d2;  // d2[a][b](m,n)
};

/// Adds third derivatives (for anything that differentiates curvature).
struct MetricJets3 : MetricJets2 {
    std::vector<std::vector<std::vector<Eigen::MatrixXd>>> d3;
};

/// Symmetric matrix of scalar expressions over a chart; the upper triangle is
/// the source of truth, so symmetry holds by construction.
class MetricField {
public:
    MetricField() = default;

    static MetricField make(ChartSpec chart, std::vector<std::vector<ScalarExpr>> comps) {
        if (static_cast<int>(comps.size()) != chart.dim())
            throw Error("metric components do not match chart dimension");
        MetricField f;
        f.chart_ = std::move(chart);
        f.comps_ = detail::mirror_upper(std::move(comps));
        return f;
    }

    static MetricField constant(ChartSpec chart, const Eigen::MatrixXd& m) {
        const int n = chart.dim();
        if (m.rows() != n || m.cols() != n) throw Error("constant metric size mismatch");
        std::vector<std::vector<ScalarExpr>> comps(
            static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) comps[i][j] = ScalarExpr::constant(m(i, j));
        return make(std::move(chart), std::move(comps));
    }

    const ChartSpec& chart() const { return chart_; }
    int dim() const { return chart_.dim(); }
    const ScalarExpr& component(int i, int j) const {
        return comps_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
    }

    Eigen::MatrixXd value(const Eigen::VectorXd& pt) const {
        const int n = dim();
        Eigen::MatrixXd g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = eval_jet2(component(i, j), pt, &chart_).v;
                g(i, j) = v;
                g(j, i) = v;
            }
        return g;
    }

    MetricJets2 jets2(const Eigen::VectorXd& pt) const {
        const int n = dim();
        MetricJets2 out;
        out.value.resize(n, n);
        out.d1.assign(n, Eigen::MatrixXd::Zero(n, n));
        out.d2.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const Jet2<double> jj = eval_jet2(component(i, j), pt, &chart_);
                out.value(i, j) = out.value(j, i) = jj.v;
                for (int a = 0; a < n; ++a) {
                    out.d1[a](i, j) = out.d1[a](j, i) = jj.g[a];
                    for (int b = 0; b < n; ++b)
                        out.d2[a][b](i, j) = out.d2[a][b](j, i) = jj.H(a, b);
                }
            }
        return out;
    }

    MetricJets3 jets3(const Eigen::VectorXd& pt) const {
        const int n = dim();
        MetricJets3 out;
        out.value.resize(n, n);
        out.d1.assign(n, Eigen::MatrixXd::Zero(n, n));
        out.d2.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
        out.d3.assign(n, std::vector<std::vector<Eigen::MatrixXd>>(
                             n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n))));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const Jet3<double> jj = eval_jet3(component(i, j), pt, &chart_);
                out.value(i, j) = out.value(j, i) = jj.v;
                for (int a = 0; a < n; ++a) {
                    out.d1[a](i, j) = out.d1[a](j, i) = jj.g[a];
                    for (int b = 0; b < n; ++b) {
                        out.d2[a][b](i, j) = out.d2[a][b](j, i) = jj.H(a, b);
                        for (int c = 0; c < n; ++c)
                            out.d3[a][b][c](i, j) = out.d3[a][b][c](j, i) = jj.t(a, b, c);
                    }
                }
            }
        return out;
    }

private:
    ChartSpec chart_;
    std::vector<std::vector<ScalarExpr>> comps_;
};

/// K^μ_ν values and first derivatives at a point.
struct KJets {
    Eigen::MatrixXd value;
    std::vector<Eigen::MatrixXd> d1; // d1[a](m,n) = ∂_a K^m_n
};

/// Endomorphism field with its declared (ε, σ) signature pair.
class KField {
public:
    KField() = default;

    static KField make(ChartSpec chart, std::vector<std::vector<ScalarExpr>> comps, int epsilon,
                       int sigma) {
        if (static_cast<int>(comps.size()) != chart.dim())
            throw Error("K components do not match chart dimension");
        for (auto& row : comps)
            if (static_cast<int>(row.size()) != chart.dim())
                throw Error("K component matrix not square");
        if ((epsilon != 1 && epsilon != -1) || (sigma != 1 && sigma != -1))
            throw Error("K signature pair must be +-1");
        KField f;
        f.chart_ = std::move(chart);
        f.comps_ = std::move(comps);
        f.epsilon_ = epsilon;
        f.sigma_ = sigma;
        return f;
    }

    static KField constant(ChartSpec chart, const Eigen::MatrixXd& m, int epsilon, int sigma) {
        const int n = chart.dim();
        if (m.rows() != n || m.cols() != n) throw Error("constant K size mismatch");
        std::vector<std::vector<ScalarExpr>> comps(
            static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) comps[i][j] = ScalarExpr::constant(m(i, j));
        return make(std::move(chart), std::move(comps), epsilon, sigma);
    }

    const ChartSpec& chart() const { return chart_; }
    int dim() const { return chart_.dim(); }
    int epsilon() const { return epsilon_; }
    int sigma() const { return sigma_; }
    const ScalarExpr& component(int i, int j) const {
        return comps_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
    }

    Eigen::MatrixXd value(const Eigen::VectorXd& pt) const {
        const int n = dim();
        Eigen::MatrixXd k(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) k(i, j) = eval_jet2(component(i, j), pt, &chart_).v;
        return k;
    }

    KJets jets(const Eigen::VectorXd& pt) const {
        const int n = dim();
        KJets out;
        out.value.resize(n, n);
        out.d1.assign(n, Eigen::MatrixXd::Zero(n, n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Jet2<double> jj = eval_jet2(component(i, j), pt, &chart_);
                out.value(i, j) = jj.v;
                for (int a = 0; a < n; ++a) out.d1[a](i, j) = jj.g[a];
            }
        return out;
    }

private:
    ChartSpec chart_;
    std::vector<std::vector<ScalarExpr>> comps_;
    int epsilon_ = 1;
    int sigma_ = 1;
};

/// The twin h(X,Y) = g(KX,Y): a metric when εσ = 1, a two-form when εσ = -1.
struct TwinField {
    ChartSpec chart;
    std::vector<std::vector<ScalarExpr>> comps; // h_mn
    int epsilon = 1;
    int sigma = 1;
    bool is_metric = true;

    MetricField as_metric() const {
        if (!is_metric) throw Error("twin tensor is a two-form, not a metric");
        return MetricField::make(chart, comps);
    }

    Eigen::MatrixXd value(const Eigen::VectorXd& pt) const {
        const int n = chart.dim();
        Eigen::MatrixXd h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                h(i, j) = eval_jet2(comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                    pt, &chart).v;
        return h;
    }
};

} // namespace twinmet
