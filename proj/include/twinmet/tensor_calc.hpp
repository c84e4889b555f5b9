#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "twinmet/fields.hpp"

namespace twinmet {

/// Small dense multi-index array at a single point.
class PointTensor {
public:
    PointTensor() = default;
    explicit PointTensor(std::vector<int> dims) : dims_(std::move(dims)) {
        std::size_t total = 1;
        for (int d : dims_) total *= static_cast<std::size_t>(d);
        data_.assign(total, 0.0);
    }

    int rank() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }

    double& operator()(int i) { return data_[idx({i})]; }
    double operator()(int i) const { return data_[idx({i})]; }
    double& operator()(int i, int j) { return data_[idx({i, j})]; }
    double operator()(int i, int j) const { return data_[idx({i, j})]; }
    double& operator()(int i, int j, int k) { return data_[idx({i, j, k})]; }
    double operator()(int i, int j, int k) const { return data_[idx({i, j, k})]; }
    double& operator()(int i, int j, int k, int l) { return data_[idx({i, j, k, l})]; }
    double operator()(int i, int j, int k, int l) const { return data_[idx({i, j, k, l})]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    double frob() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

private:
    std::size_t idx(std::initializer_list<int> ix) const {
        std::size_t flat = 0;
        std::size_t d = 0;
        for (int i : ix) {
            flat = flat * static_cast<std::size_t>(dims_[d]) + static_cast<std::size_t>(i);
            ++d;
        }
        return flat;
    }
    std::vector<int> dims_;
    std::vector<double> data_;
};

namespace detail {

struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

/// Levi-Civita connection data at a point, with derivatives one order below
/// the metric jets that produced it.
struct ConnectionBundle {
    int n = 0;
    Eigen::MatrixXd g, ginv;
    double det = 0.0;
    MetricJets2 mj;                                    // g, dg, ddg
    std::vector<std::vector<std::vector<Eigen::MatrixXd>>> d3; // order 3 only
    std::vector<Eigen::MatrixXd> dginv;
    std::vector<std::vector<Eigen::MatrixXd>> d2ginv;  // order 3 only
    std::vector<Eigen::MatrixXd> Gamma;                // [s](m,n)
    std::vector<std::vector<Eigen::MatrixXd>> dGamma;  // [l][s](m,n)
    std::vector<std::vector<std::vector<Eigen::MatrixXd>>> ddGamma; // [p][q][s](m,n)
};

inline ConnectionBundle connection_bundle(const MetricField& field, const Eigen::VectorXd& pt,
                                          int order = 2) {
    ConnectionBundle b;
    const int n = field.dim();
    b.n = n;
    if (order >= 3) {
        MetricJets3 j3 = field.jets3(pt);
        b.mj.value = j3.value;
        b.mj.d1 = j3.d1;
        b.mj.d2 = j3.d2;
        b.d3 = j3.d3;
    } else {
        b.mj = field.jets2(pt);
    }
    b.g = b.mj.value;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b.g);
    b.det = lu.determinant();
    if (!lu.isInvertible())
        throw DegenerateMetricError(b.det, detail::point_to_text(pt.cast<std::complex<double>>()));
    b.ginv = lu.inverse();

    b.dginv.assign(n, Eigen::MatrixXd());
    for (int a = 0; a < n; ++a) b.dginv[a] = -b.ginv * b.mj.d1[a] * b.ginv;
    if (order >= 3) {
        b.d2ginv.assign(n, std::vector<Eigen::MatrixXd>(n));
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                b.d2ginv[p][q] = -b.ginv * b.mj.d2[p][q] * b.ginv +
                                 b.ginv * b.mj.d1[p] * b.ginv * b.mj.d1[q] * b.ginv +
                                 b.ginv * b.mj.d1[q] * b.ginv * b.mj.d1[p] * b.ginv;
    }

    auto lower_sym = [&](const std::vector<Eigen::MatrixXd>& d, int m, int nn, int a) {
        return d[m](nn, a) + d[nn](m, a) - d[a](m, nn);
    };

    b.Gamma.assign(n, Eigen::MatrixXd::Zero(n, n));
    for (int s = 0; s < n; ++s)
        for (int m = 0; m < n; ++m)
            for (int nn = m; nn < n; ++nn) {
                double acc = 0.0;
                for (int a = 0; a < n; ++a) acc += b.ginv(s, a) * lower_sym(b.mj.d1, m, nn, a);
                b.Gamma[s](m, nn) = 0.5 * acc;
                b.Gamma[s](nn, m) = 0.5 * acc;
            }

    b.dGamma.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
    for (int l = 0; l < n; ++l)
        for (int s = 0; s < n; ++s)
            for (int m = 0; m < n; ++m)
                for (int nn = m; nn < n; ++nn) {
                    double acc = 0.0;
                    for (int a = 0; a < n; ++a) {
                        acc += b.dginv[l](s, a) * lower_sym(b.mj.d1, m, nn, a);
                        acc += b.ginv(s, a) * (b.mj.d2[l][m](nn, a) + b.mj.d2[l][nn](m, a) -
                                               b.mj.d2[l][a](m, nn));
                    }
                    b.dGamma[l][s](m, nn) = 0.5 * acc;
                    b.dGamma[l][s](nn, m) = 0.5 * acc;
                }

    if (order >= 3) {
        b.ddGamma.assign(
            n, std::vector<std::vector<Eigen::MatrixXd>>(n, std::vector<Eigen::MatrixXd>(
                                                               n, Eigen::MatrixXd::Zero(n, n))));
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                for (int s = 0; s < n; ++s)
                    for (int m = 0; m < n; ++m)
                        for (int nn = m; nn < n; ++nn) {
                            double acc = 0.0;
                            for (int a = 0; a < n; ++a) {
                                acc += b.d2ginv[p][q](s, a) * lower_sym(b.mj.d1, m, nn, a);
                                acc += b.dginv[p](s, a) *
                                       (b.mj.d2[q][m](nn, a) + b.mj.d2[q][nn](m, a) -
                                        b.mj.d2[q][a](m, nn));
                                acc += b.dginv[q](s, a) *
                                       (b.mj.d2[p][m](nn, a) + b.mj.d2[p][nn](m, a) -
                                        b.mj.d2[p][a](m, nn));
                                acc += b.ginv(s, a) *
                                       (b.d3[p][q][m](nn, a) + b.d3[p][q][nn](m, a) -
                                        b.d3[p][q][a](m, nn));
                            }
                            b.ddGamma[p][q][s](m, nn) = 0.5 * acc;
                            b.ddGamma[p][q][s](nn, m) = 0.5 * acc;
                        }
    }
    return b;
}

/// Curvature R^l_{mns} from a connection bundle.
inline PointTensor riemann_from_bundle(const ConnectionBundle& b) {
    const int n = b.n;
    PointTensor R({n, n, n, n});
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
            for (int nu = 0; nu < n; ++nu)
                for (int s = 0; s < n; ++s) {
                    double acc = b.dGamma[nu][l](m, s) - b.dGamma[s][l](m, nu);
                    for (int a = 0; a < n; ++a)
                        acc += b.Gamma[l](a, nu) * b.Gamma[a](m, s) -
                               b.Gamma[l](a, s) * b.Gamma[a](m, nu);
                    R(l, m, nu, s) = acc;
                }
    return R;
}

inline Eigen::MatrixXd ricci_from_bundle(const ConnectionBundle& b) {
    const int n = b.n;
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < n; ++m)
        for (int s = 0; s < n; ++s) {
            double acc = 0.0;
            for (int nu = 0; nu < n; ++nu) {
                acc += b.dGamma[nu][nu](m, s) - b.dGamma[s][nu](m, nu);
                for (int a = 0; a < n; ++a)
                    acc += b.Gamma[nu](a, nu) * b.Gamma[a](m, s) -
                           b.Gamma[nu](a, s) * b.Gamma[a](m, nu);
            }
            ric(m, s) = acc;
        }
    return ric;
}

/// ∂_l Ric_{ms}; requires an order-3 bundle.
inline std::vector<Eigen::MatrixXd> ricci_derivative_from_bundle(const ConnectionBundle& b) {
    const int n = b.n;
    if (b.ddGamma.empty()) throw Error("ricci derivative needs an order-3 bundle");
    std::vector<Eigen::MatrixXd> dric(n, Eigen::MatrixXd::Zero(n, n));
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
            for (int s = 0; s < n; ++s) {
                double acc = 0.0;
                for (int nu = 0; nu < n; ++nu) {
                    acc += b.ddGamma[l][nu][nu](m, s) - b.ddGamma[l][s][nu](m, nu);
                    for (int a = 0; a < n; ++a) {
                        acc += b.dGamma[l][nu](a, nu) * b.Gamma[a](m, s) +
                               b.Gamma[nu](a, nu) * b.dGamma[l][a](m, s);
                        acc -= b.dGamma[l][nu](a, s) * b.Gamma[a](m, nu) +
                               b.Gamma[nu](a, s) * b.dGamma[l][a](m, nu);
                    }
                }
                dric[l](m, s) = acc;
            }
    return dric;
}

} // namespace detail

/// Γ^σ_{μν} of the Levi-Civita connection at a point, indexed (σ, μ, ν).
inline PointTensor christoffel(const MetricField& g, const Eigen::VectorXd& pt) {
    const auto b = detail::connection_bundle(g, pt);
    PointTensor t({b.n, b.n, b.n});
    for (int s = 0; s < b.n; ++s)
        for (int m = 0; m < b.n; ++m)
            for (int nn = 0; nn < b.n; ++nn) t(s, m, nn) = b.Gamma[s](m, nn);
    return t;
}

/// R^λ_{μνσ}, indexed (λ, μ, ν, σ): μ the vector slot, (ν, σ) the pair.
inline PointTensor riemann(const MetricField& g, const Eigen::VectorXd& pt) {
    return detail::riemann_from_bundle(detail::connection_bundle(g, pt));
}

/// Ricci R_{μσ} = R^ν_{μνσ}.
inline PointTensor ricci(const MetricField& g, const Eigen::VectorXd& pt) {
    const auto b = detail::connection_bundle(g, pt);
    const Eigen::MatrixXd ric = detail::ricci_from_bundle(b);
    PointTensor t({b.n, b.n});
    for (int m = 0; m < b.n; ++m)
        for (int s = 0; s < b.n; ++s) t(m, s) = ric(m, s);
    return t;
}

/// ∇g residual at a point (metricity of the Levi-Civita connection).
inline double metricity_residual(const MetricField& g, const Eigen::VectorXd& pt) {
    const auto b = detail::connection_bundle(g, pt);
    double worst = 0.0;
    for (int a = 0; a < b.n; ++a)
        for (int m = 0; m < b.n; ++m)
            for (int nn = 0; nn < b.n; ++nn) {
                double acc = b.mj.d1[a](m, nn);
                for (int bb = 0; bb < b.n; ++bb)
                    acc -= b.Gamma[bb](a, m) * b.g(bb, nn) + b.Gamma[bb](a, nn) * b.g(m, bb);
                worst = std::max(worst, std::abs(acc));
            }
    return worst / std::max(1.0, b.g.norm());
}

/// First Bianchi identity residual: R^λ_{[μνσ]} cyclic sum over (μ, ν, σ).
inline double bianchi_residual(const MetricField& g, const Eigen::VectorXd& pt) {
    const auto b = detail::connection_bundle(g, pt);
    const PointTensor R = detail::riemann_from_bundle(b);
    double worst = 0.0;
    double scale = std::max(1.0, R.max_abs());
    for (int l = 0; l < b.n; ++l)
        for (int m = 0; m < b.n; ++m)
            for (int nu = 0; nu < b.n; ++nu)
                for (int s = 0; s < b.n; ++s) {
                    const double cyc = R(l, m, nu, s) + R(l, nu, s, m) + R(l, s, m, nu);
                    worst = std::max(worst, std::abs(cyc));
                }
    return worst / scale;
}

struct EinsteinReport {
    double gamma_fit = 0.0;
    double max_residual = 0.0;
};

/// γ_fit by g-raised Frobenius projection over the plan; residual is the
/// worst pointwise ‖Ric − γg‖/‖g‖.
inline EinsteinReport einstein_residual(const MetricField& g, const SamplePlan& plan) {
    detail::KahanSum num, den;
    std::vector<Eigen::MatrixXd> rics, gs;
    rics.reserve(plan.count());
    gs.reserve(plan.count());
    for (const auto& pt : plan.points()) {
        const auto b = detail::connection_bundle(g, pt);
        const Eigen::MatrixXd ric = detail::ricci_from_bundle(b);
        num.add((b.ginv * ric).trace());
        den.add(static_cast<double>(b.n));
        rics.push_back(ric);
        gs.push_back(b.g);
    }
    EinsteinReport rep;
    rep.gamma_fit = num.s / den.s;
    for (std::size_t i = 0; i < rics.size(); ++i) {
        const double r = (rics[i] - rep.gamma_fit * gs[i]).norm() / gs[i].norm();
        rep.max_residual = std::max(rep.max_residual, r);
    }
    return rep;
}

struct CompatReport {
    double involution_residual = 0.0; // ‖K² − εI‖ / √n
    double metric_residual = 0.0;     // ‖KᵗgK − σg‖ / ‖g‖
    bool pass(double tol) const {
        return involution_residual <= tol && metric_residual <= tol;
    }
};

/// Residuals of K² = εI and g(K·, K·) = σg over the plan.
inline CompatReport check_k_compatibility(const MetricField& g, const KField& K,
                                          const SamplePlan& plan) {
    if (!g.chart().same_as(K.chart())) throw ChartMismatchError(g.chart().name(), K.chart().name());
    CompatReport rep;
    const int n = g.dim();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    for (const auto& pt : plan.points()) {
        const Eigen::MatrixXd gv = g.value(pt);
        const Eigen::MatrixXd kv = K.value(pt);
        rep.involution_residual =
            std::max(rep.involution_residual,
                     (kv * kv - double(K.epsilon()) * I).norm() / std::sqrt(double(n)));
        rep.metric_residual =
            std::max(rep.metric_residual,
                     (kv.transpose() * gv * kv - double(K.sigma()) * gv).norm() / gv.norm());
    }
    return rep;
}

/// Twin h(X,Y) = g(KX,Y) as an expression-level field: h_{μν} = K^α_μ g_{αν}.
inline TwinField twin_field(const MetricField& g, const KField& K) {
    if (!g.chart().same_as(K.chart())) throw ChartMismatchError(g.chart().name(), K.chart().name());
    const int n = g.dim();
    TwinField tw;
    tw.chart = g.chart();
    tw.epsilon = K.epsilon();
    tw.sigma = K.sigma();
    tw.is_metric = (K.epsilon() * K.sigma() == 1);
    tw.comps.assign(static_cast<std::size_t>(n),
                    std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
    for (int m = 0; m < n; ++m)
        for (int nu = 0; nu < n; ++nu) {
            ScalarExpr acc;
            for (int a = 0; a < n; ++a) {
                ScalarExpr term = K.component(a, m) * g.component(a, nu);
                acc = acc.valid() ? acc + term : term;
            }
            tw.comps[static_cast<std::size_t>(m)][static_cast<std::size_t>(nu)] = acc;
        }
    return tw;
}

/// ∇_α K^μ_ν at a point, indexed (α, μ, ν).
inline PointTensor nabla_k(const MetricField& g, const KField& K, const Eigen::VectorXd& pt) {
    if (!g.chart().same_as(K.chart())) throw ChartMismatchError(g.chart().name(), K.chart().name());
    const auto b = detail::connection_bundle(g, pt);
    const KJets kj = K.jets(pt);
    const int n = b.n;
    PointTensor t({n, n, n});
    for (int a = 0; a < n; ++a)
        for (int m = 0; m < n; ++m)
            for (int nu = 0; nu < n; ++nu) {
                double acc = kj.d1[a](m, nu);
                for (int bb = 0; bb < n; ++bb)
                    acc += b.Gamma[m](a, bb) * kj.value(bb, nu) -
                           b.Gamma[bb](a, nu) * kj.value(m, bb);
                t(a, m, nu) = acc;
            }
    return t;
}

/// ψ_{αμν} = ∇_α h_{μν} with h the twin of g, indexed (α, μ, ν).
inline PointTensor psi_tensor(const MetricField& g, const KField& K, const Eigen::VectorXd& pt) {
    if (!g.chart().same_as(K.chart())) throw ChartMismatchError(g.chart().name(), K.chart().name());
    const auto b = detail::connection_bundle(g, pt);
    const KJets kj = K.jets(pt);
    const int n = b.n;
    // h = K^t g and its coordinate derivative by the product rule
    const Eigen::MatrixXd h = kj.value.transpose() * b.g;
    std::vector<Eigen::MatrixXd> dh(n);
    for (int a = 0; a < n; ++a)
        dh[a] = kj.d1[a].transpose() * b.g + kj.value.transpose() * b.mj.d1[a];
    PointTensor t({n, n, n});
    for (int a = 0; a < n; ++a)
        for (int m = 0; m < n; ++m)
            for (int nu = 0; nu < n; ++nu) {
                double acc = dh[a](m, nu);
                for (int bb = 0; bb < n; ++bb)
                    acc -= b.Gamma[bb](a, m) * h(bb, nu) + b.Gamma[bb](a, nu) * h(m, bb);
                t(a, m, nu) = acc;
            }
    return t;
}

/// Nijenhuis tensor N^λ_{μν} (bracket expansion on coordinate fields),
/// indexed (λ, μ, ν); antisymmetric in (μ, ν).
inline PointTensor nijenhuis(const KField& K, const Eigen::VectorXd& pt) {
    const KJets kj = K.jets(pt);
    const int n = K.dim();
    const Eigen::MatrixXd kk = kj.value * kj.value;
    const double invol =
        (kk - double(K.epsilon()) * Eigen::MatrixXd::Identity(n, n)).norm() / std::sqrt(double(n));
    if (invol > 1e-8) throw PreconditionError("K^2 = eps*I", invol);
    PointTensor t({n, n, n});
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
            for (int nu = 0; nu < n; ++nu) {
                double acc = 0.0;
                for (int a = 0; a < n; ++a) {
                    acc += kj.value(a, m) * kj.d1[a](l, nu) - kj.value(a, nu) * kj.d1[a](l, m);
                    acc -= kj.value(l, a) * (kj.d1[m](a, nu) - kj.d1[nu](a, m));
                }
                t(l, m, nu) = acc;
            }
    return t;
}

/// Residuals of the twin-derivative symmetries
/// ψ(X,Y,Z) = −σ ψ(X,KY,KZ) and ψ(X,Y,Z) = σε ψ(X,Z,Y) over a plan.
struct PsiSymmetryReport {
    double k_pair = 0.0;
    double swap = 0.0;
    double max() const { return std::max(k_pair, swap); }
};

inline PsiSymmetryReport psi_symmetry_check(const MetricField& g, const KField& K,
                                            const SamplePlan& plan) {
    PsiSymmetryReport rep;
    const int n = g.dim();
    for (const auto& pt : plan.points()) {
        const PointTensor psi = psi_tensor(g, K, pt);
        const Eigen::MatrixXd kv = K.value(pt);
        const double scale = std::max(1.0, psi.max_abs());
        for (int a = 0; a < n; ++a)
            for (int m = 0; m < n; ++m)
                for (int nu = 0; nu < n; ++nu) {
                    double kk = 0.0;
                    for (int al = 0; al < n; ++al)
                        for (int be = 0; be < n; ++be)
                            kk += psi(a, al, be) * kv(al, m) * kv(be, nu);
                    rep.k_pair = std::max(
                        rep.k_pair, std::abs(psi(a, m, nu) + K.sigma() * kk) / scale);
                    rep.swap = std::max(
                        rep.swap,
                        std::abs(psi(a, m, nu) -
                                 K.sigma() * K.epsilon() * psi(a, nu, m)) /
                            scale);
                }
    }
    return rep;
}

struct KahlerLikeReport {
    double max_nabla_k = 0.0;
    double max_nijenhuis = 0.0;
    bool passed = false;
};

/// ∇K = 0 check over the plan; on success the Nijenhuis tensor must vanish
/// too (integrability for a torsionless connection), which is asserted.
inline KahlerLikeReport kahler_like_check(const MetricField& g, const KField& K,
                                          const SamplePlan& plan, double tol = 1e-8) {
    KahlerLikeReport rep;
    for (const auto& pt : plan.points()) {
        rep.max_nabla_k = std::max(rep.max_nabla_k, nabla_k(g, K, pt).max_abs());
        rep.max_nijenhuis = std::max(rep.max_nijenhuis, nijenhuis(K, pt).max_abs());
    }
    rep.passed = rep.max_nabla_k <= tol;
    if (rep.passed && rep.max_nijenhuis > tol)
        throw Error("kahler-like field with nonvanishing Nijenhuis tensor: " +
                    std::to_string(rep.max_nijenhuis));
    return rep;
}

struct CurvatureIdentityReport {
    double commute = 0.0;     // R(X,Y)K = K R(X,Y)
    double pair = 0.0;        // R(KX,KY) = σ R(X,Y)
    double ricci_pair = 0.0;  // S(KX,KY) = σ S(X,Y)
    double trace_identity = 0.0; // (σ−ε) S = tr[V -> K R(X,KY)V]
    double max() const { return std::max({commute, pair, ricci_pair, trace_identity}); }
};

/// The curvature identities of a Kähler-like pair over the plan.
inline CurvatureIdentityReport curvature_k_identities(const MetricField& g, const KField& K,
                                                      const SamplePlan& plan, double tol = 1e-8) {
    const auto kl = kahler_like_check(g, K, plan, tol);
    if (!kl.passed)
        throw HypothesisError("curvature identities need nabla K = 0; max residual " +
                              std::to_string(kl.max_nabla_k));
    CurvatureIdentityReport rep;
    const int n = g.dim();
    for (const auto& pt : plan.points()) {
        const auto b = detail::connection_bundle(g, pt);
        const PointTensor R = detail::riemann_from_bundle(b);
        const Eigen::MatrixXd ric = detail::ricci_from_bundle(b);
        const Eigen::MatrixXd kv = K.value(pt);
        const double rs = std::max(1.0, R.max_abs());
        const double ss = std::max(1.0, ric.norm());

        // R(X,Y) ∘ K = K ∘ R(X,Y): R^l_{a ns} K^a_m = K^l_a R^a_{m ns}
        for (int l = 0; l < n; ++l)
            for (int m = 0; m < n; ++m)
                for (int nu = 0; nu < n; ++nu)
                    for (int s = 0; s < n; ++s) {
                        double lhs = 0.0, rhs = 0.0;
                        for (int a = 0; a < n; ++a) {
                            lhs += R(l, a, nu, s) * kv(a, m);
                            rhs += kv(l, a) * R(a, m, nu, s);
                        }
                        rep.commute = std::max(rep.commute, std::abs(lhs - rhs) / rs);
                    }

        // R(KX, KY) = σ R(X,Y): R^l_{m ab} K^a_n K^b_s = σ R^l_{m ns}
        for (int l = 0; l < n; ++l)
            for (int m = 0; m < n; ++m)
                for (int nu = 0; nu < n; ++nu)
                    for (int s = 0; s < n; ++s) {
                        double lhs = 0.0;
                        for (int a = 0; a < n; ++a)
                            for (int bb = 0; bb < n; ++bb)
                                lhs += R(l, m, a, bb) * kv(a, nu) * kv(bb, s);
                        rep.pair = std::max(
                            rep.pair, std::abs(lhs - K.sigma() * R(l, m, nu, s)) / rs);
                    }

        // S(KX,KY) = σ S(X,Y)
        const Eigen::MatrixXd skk = kv.transpose() * ric * kv;
        rep.ricci_pair =
            std::max(rep.ricci_pair, (skk - double(K.sigma()) * ric).norm() / ss);

        // (σ − ε) S_{νσ} = K^μ_α R^α_{μνβ} K^β_σ
        for (int nu = 0; nu < n; ++nu)
            for (int s = 0; s < n; ++s) {
                double tr = 0.0;
                for (int m = 0; m < n; ++m)
                    for (int a = 0; a < n; ++a)
                        for (int bb = 0; bb < n; ++bb)
                            tr += kv(m, a) * R(a, m, nu, bb) * kv(bb, s);
                const double lhs = (K.sigma() - K.epsilon()) * ric(nu, s);
                rep.trace_identity = std::max(rep.trace_identity, std::abs(lhs - tr) / ss);
            }
    }
    return rep;
}

struct RicciTwinReport {
    double lambda_fit = 0.0;
    double max_residual = 0.0; // ‖F − λh‖/‖h‖ with F the twin of the Ricci
};

/// F(X,Y) = S(KX,Y) against λ·h over the plan (the Einstein criterion for
/// Kähler-like pairs: Einstein iff the residual vanishes).
inline RicciTwinReport ricci_twin_check(const MetricField& g, const KField& K,
                                        const SamplePlan& plan, double tol = 1e-8) {
    const auto kl = kahler_like_check(g, K, plan, tol);
    if (!kl.passed)
        throw HypothesisError("ricci twin check needs nabla K = 0; max residual " +
                              std::to_string(kl.max_nabla_k));
    detail::KahanSum num, den;
    std::vector<Eigen::MatrixXd> Fs, hs;
    for (const auto& pt : plan.points()) {
        const auto b = detail::connection_bundle(g, pt);
        const Eigen::MatrixXd ric = detail::ricci_from_bundle(b);
        const Eigen::MatrixXd kv = K.value(pt);
        const Eigen::MatrixXd F = kv.transpose() * ric;
        const Eigen::MatrixXd h = kv.transpose() * b.g;
        num.add((F.array() * h.array()).sum());
        den.add((h.array() * h.array()).sum());
        Fs.push_back(F);
        hs.push_back(h);
    }
    RicciTwinReport rep;
    rep.lambda_fit = num.s / den.s;
    for (std::size_t i = 0; i < Fs.size(); ++i)
        rep.max_residual = std::max(rep.max_residual,
                                    (Fs[i] - rep.lambda_fit * hs[i]).norm() / hs[i].norm());
    return rep;
}

} // namespace twinmet
