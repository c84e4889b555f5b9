#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "twinmet/expr.hpp"

namespace twinmet {

namespace detail {

template <class S> struct is_complex_scalar : std::false_type {};
template <class T> struct is_complex_scalar<std::complex<T>> : std::true_type {};

template <class S> double abs_of(const S& v) { return std::abs(v); }

} // namespace detail

/// Degree-2 truncated Taylor value: value, gradient, symmetric Hessian.
/// Propagated through expression trees; exact to rounding.
template <class S>
struct Jet2 {
    using Scalar = S;
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

    S v{};
    Vec g;
    Mat H;

    int n() const { return static_cast<int>(g.size()); }

    static Jet2 constant(S val, int n) {
        Jet2 j;
        j.v = val;
        j.g = Vec::Zero(n);
        j.H = Mat::Zero(n, n);
        return j;
    }
    static Jet2 coordinate(S val, int n, int i) {
        Jet2 j = constant(val, n);
        j.g[i] = S(1);
        return j;
    }

    Jet2 operator+(const Jet2& o) const { return {v + o.v, g + o.g, H + o.H}; }
    Jet2 operator-(const Jet2& o) const { return {v - o.v, g - o.g, H - o.H}; }
    Jet2 operator-() const { return {-v, -g, -H}; }

    Jet2 operator*(const Jet2& o) const {
        Jet2 r;
        r.v = v * o.v;
        r.g = g * o.v + o.g * v;
        r.H = H * o.v + o.H * v + g * o.g.transpose() + o.g * g.transpose();
        return r;
    }

    /// Univariate chain rule: result of f applied to this jet, given
    /// f(v), f'(v), f''(v).
    Jet2 compose(S f0, S f1, S f2) const {
        Jet2 r;
        r.v = f0;
        r.g = f1 * g;
        r.H = f1 * H + f2 * (g * g.transpose());
        return r;
    }
};

/// Degree-3 truncated Taylor value; the third-derivative block is stored as a
/// flat n^3 array filled symmetrically.
template <class S>
struct Jet3 {
    using Scalar = S;
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

    S v{};
    Vec g;
    Mat H;
    std::vector<S> T;

    int n() const { return static_cast<int>(g.size()); }
    S& t(int i, int j, int k) { return T[static_cast<std::size_t>((i * n() + j) * n() + k)]; }
    const S& t(int i, int j, int k) const {
        return T[static_cast<std::size_t>((i * n() + j) * n() + k)];
    }

    static Jet3 constant(S val, int n) {
        Jet3 j;
        j.v = val;
        j.g = Vec::Zero(n);
        j.H = Mat::Zero(n, n);
        j.T.assign(static_cast<std::size_t>(n) * n * n, S(0));
        return j;
    }
    static Jet3 coordinate(S val, int n, int i) {
        Jet3 j = constant(val, n);
        j.g[i] = S(1);
        return j;
    }

    Jet3 operator+(const Jet3& o) const {
        Jet3 r{v + o.v, g + o.g, H + o.H, T};
        for (std::size_t i = 0; i < T.size(); ++i) r.T[i] = T[i] + o.T[i];
        return r;
    }
    Jet3 operator-(const Jet3& o) const {
        Jet3 r{v - o.v, g - o.g, H - o.H, T};
        for (std::size_t i = 0; i < T.size(); ++i) r.T[i] = T[i] - o.T[i];
        return r;
    }
    Jet3 operator-() const {
        Jet3 r{-v, -g, -H, T};
        for (std::size_t i = 0; i < T.size(); ++i) r.T[i] = -T[i];
        return r;
    }

    Jet3 operator*(const Jet3& o) const {
        const int d = n();
        Jet3 r = constant(S(0), d);
        r.v = v * o.v;
        r.g = g * o.v + o.g * v;
        r.H = H * o.v + o.H * v + g * o.g.transpose() + o.g * g.transpose();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    r.t(i, j, k) = t(i, j, k) * o.v + o.t(i, j, k) * v +
                                   H(i, j) * o.g[k] + H(i, k) * o.g[j] + H(j, k) * o.g[i] +
                                   o.H(i, j) * g[k] + o.H(i, k) * g[j] + o.H(j, k) * g[i];
        return r;
    }

    Jet3 compose(S f0, S f1, S f2, S f3) const {
        const int d = n();
        Jet3 r = constant(S(0), d);
        r.v = f0;
        r.g = f1 * g;
        r.H = f1 * H + f2 * (g * g.transpose());
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    r.t(i, j, k) = f3 * g[i] * g[j] * g[k] +
                                   f2 * (H(i, j) * g[k] + H(i, k) * g[j] + H(j, k) * g[i]) +
                                   f1 * t(i, j, k);
        return r;
    }
};

namespace detail {

template <class J> struct complex_counterpart;
template <> struct complex_counterpart<Jet2<double>> { using type = Jet2<std::complex<double>>; };
template <> struct complex_counterpart<Jet3<double>> { using type = Jet3<std::complex<double>>; };
template <> struct complex_counterpart<Jet2<std::complex<double>>> {
    using type = Jet2<std::complex<double>>;
};
template <> struct complex_counterpart<Jet3<std::complex<double>>> {
    using type = Jet3<std::complex<double>>;
};

template <class J> struct part_taker;

template <> struct part_taker<Jet2<double>> {
    static Jet2<double> take(const Jet2<std::complex<double>>& j, bool real_part) {
        Jet2<double> r;
        r.v = real_part ? j.v.real() : j.v.imag();
        r.g = real_part ? j.g.real().eval() : j.g.imag().eval();
        r.H = real_part ? j.H.real().eval() : j.H.imag().eval();
        return r;
    }
};

template <> struct part_taker<Jet3<double>> {
    static Jet3<double> take(const Jet3<std::complex<double>>& j, bool real_part) {
        Jet3<double> r;
        r.v = real_part ? j.v.real() : j.v.imag();
        r.g = real_part ? j.g.real().eval() : j.g.imag().eval();
        r.H = real_part ? j.H.real().eval() : j.H.imag().eval();
        r.T.resize(j.T.size());
        for (std::size_t i = 0; i < j.T.size(); ++i)
            r.T[i] = real_part ? j.T[i].real() : j.T[i].imag();
        return r;
    }
};

template <> struct part_taker<Jet2<std::complex<double>>> {
    static Jet2<std::complex<double>> take(const Jet2<std::complex<double>>& j, bool real_part) {
        Jet2<std::complex<double>> r = j;
        r.v = real_part ? j.v.real() : j.v.imag();
        for (int i = 0; i < r.g.size(); ++i) r.g[i] = real_part ? j.g[i].real() : j.g[i].imag();
        for (int i = 0; i < r.H.rows(); ++i)
            for (int k = 0; k < r.H.cols(); ++k)
                r.H(i, k) = real_part ? j.H(i, k).real() : j.H(i, k).imag();
        return r;
    }
};

template <> struct part_taker<Jet3<std::complex<double>>> {
    static Jet3<std::complex<double>> take(const Jet3<std::complex<double>>& j, bool real_part) {
        Jet3<std::complex<double>> r = j;
        r.v = real_part ? j.v.real() : j.v.imag();
        for (int i = 0; i < r.g.size(); ++i) r.g[i] = real_part ? j.g[i].real() : j.g[i].imag();
        for (int i = 0; i < r.H.rows(); ++i)
            for (int k = 0; k < r.H.cols(); ++k)
                r.H(i, k) = real_part ? j.H(i, k).real() : j.H(i, k).imag();
        for (std::size_t i = 0; i < j.T.size(); ++i)
            r.T[i] = real_part ? j.T[i].real() : j.T[i].imag();
        return r;
    }
};

/// Evaluation context: coordinate values (complex storage covers both modes)
/// plus flags distinguishing real charts from holomorphic charts.
struct EvalContext {
    Eigen::VectorXcd coords;
    bool complex_directions = false; // differentiating w.r.t. complex coords
    std::string point_text;
    const ChartSpec* chart = nullptr; // names coordinates in error messages
};

inline std::string point_to_text(const Eigen::VectorXcd& p) {
    std::string s = "(";
    for (int i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        if (p[i].imag() == 0.0) s += format_real(p[i].real());
        else s += format_const(p[i]);
    }
    return s + ")";
}

[[noreturn]] inline void domain_fail(const char* what, const ExprNode* n,
                                     const EvalContext& ctx) {
    std::string sub;
    print_node(n, ctx.chart, sub);
    throw DomainError(what, sub, ctx.point_text);
}

template <class S> S scalar_cast(std::complex<double> v);
template <> inline double scalar_cast<double>(std::complex<double> v) { return v.real(); }
template <> inline std::complex<double> scalar_cast<std::complex<double>>(std::complex<double> v) {
    return v;
}

/// Integer power with an explicit zero-coefficient guard so that u^{k-j}
/// is never formed when its chain-rule coefficient vanishes.
template <class S> S ipow(S base, int e) {
    if (e == 0) return S(1);
    bool inv = e < 0;
    unsigned long k = static_cast<unsigned long>(inv ? -static_cast<long>(e) : e);
    S acc = S(1), b = base;
    while (k) {
        if (k & 1UL) acc = acc * b;
        b = b * b;
        k >>= 1UL;
    }
    return inv ? S(1) / acc : acc;
}

template <class J>
J eval_rec(const ExprNode* n, const EvalContext& ctx) {
    using S = typename J::Scalar;
    constexpr bool cplx = is_complex_scalar<S>::value;
    const int dim = static_cast<int>(ctx.coords.size());

    switch (n->kind) {
    case NodeKind::Constant:
        if constexpr (!cplx) {
            if (n->value.imag() != 0.0)
                domain_fail("complex constant in real-valued evaluation", n, ctx);
        }
        return J::constant(scalar_cast<S>(n->value), dim);
    case NodeKind::Parameter:
        if constexpr (!cplx) {
            if (n->value.imag() != 0.0)
                domain_fail("complex parameter in real-valued evaluation", n, ctx);
        }
        return J::constant(scalar_cast<S>(n->value), dim);
    case NodeKind::Coordinate:
        return J::coordinate(scalar_cast<S>(ctx.coords[n->coord]), dim, n->coord);
    case NodeKind::Add:
        return eval_rec<J>(n->a.get(), ctx) + eval_rec<J>(n->b.get(), ctx);
    case NodeKind::Sub:
        return eval_rec<J>(n->a.get(), ctx) - eval_rec<J>(n->b.get(), ctx);
    case NodeKind::Neg:
        return -eval_rec<J>(n->a.get(), ctx);
    case NodeKind::Mul:
        return eval_rec<J>(n->a.get(), ctx) * eval_rec<J>(n->b.get(), ctx);
    case NodeKind::Div: {
        J a = eval_rec<J>(n->a.get(), ctx);
        J b = eval_rec<J>(n->b.get(), ctx);
        if (abs_of(b.v) == 0.0) domain_fail("division by zero", n, ctx);
        const S u = b.v;
        J binv;
        if constexpr (std::is_same_v<J, Jet2<S>>)
            binv = b.compose(S(1) / u, S(-1) / (u * u), S(2) / (u * u * u));
        else
            binv = b.compose(S(1) / u, S(-1) / (u * u), S(2) / (u * u * u),
                             S(-6) / (u * u * u * u));
        return a * binv;
    }
    case NodeKind::Pow: {
        J a = eval_rec<J>(n->a.get(), ctx);
        const int k = n->exponent;
        if (k < 0 && abs_of(a.v) == 0.0) domain_fail("zero base with negative exponent", n, ctx);
        const S u = a.v;
        const double c1 = static_cast<double>(k);
        const double c2 = static_cast<double>(k) * (k - 1);
        const double c3 = static_cast<double>(k) * (k - 1) * (k - 2);
        const S f0 = ipow(u, k);
        const S f1 = (c1 == 0.0) ? S(0) : S(c1) * ipow(u, k - 1);
        const S f2 = (c2 == 0.0) ? S(0) : S(c2) * ipow(u, k - 2);
        if constexpr (std::is_same_v<J, Jet2<S>>) {
            return a.compose(f0, f1, f2);
        } else {
            const S f3 = (c3 == 0.0) ? S(0) : S(c3) * ipow(u, k - 3);
            return a.compose(f0, f1, f2, f3);
        }
    }
    case NodeKind::Sin: {
        J a = eval_rec<J>(n->a.get(), ctx);
        using std::cos;
        using std::sin;
        const S s = sin(a.v), c = cos(a.v);
        if constexpr (std::is_same_v<J, Jet2<S>>) return a.compose(s, c, -s);
        else return a.compose(s, c, -s, -c);
    }
    case NodeKind::Cos: {
        J a = eval_rec<J>(n->a.get(), ctx);
        using std::cos;
        using std::sin;
        const S s = sin(a.v), c = cos(a.v);
        if constexpr (std::is_same_v<J, Jet2<S>>) return a.compose(c, -s, -c);
        else return a.compose(c, -s, -c, s);
    }
    case NodeKind::Exp: {
        J a = eval_rec<J>(n->a.get(), ctx);
        using std::exp;
        const S e = exp(a.v);
        if constexpr (std::is_same_v<J, Jet2<S>>) return a.compose(e, e, e);
        else return a.compose(e, e, e, e);
    }
    case NodeKind::Sqrt: {
        J a = eval_rec<J>(n->a.get(), ctx);
        if constexpr (cplx) {
            if (abs_of(a.v) == 0.0) domain_fail("sqrt at zero", n, ctx);
            if (a.v.imag() == 0.0 && a.v.real() < 0.0)
                throw NonAnalyticError("sqrt evaluated on its branch cut in '" +
                                       print_scalar(ScalarExpr(n->a)) + "' at " + ctx.point_text);
        } else {
            if (!(a.v > S(0))) domain_fail("sqrt of non-positive value", n, ctx);
        }
        using std::sqrt;
        const S s = sqrt(a.v);
        const S f1 = S(0.5) / s;
        const S f2 = S(-0.25) / (s * a.v);
        if constexpr (std::is_same_v<J, Jet2<S>>) return a.compose(s, f1, f2);
        else return a.compose(s, f1, f2, S(0.375) / (s * a.v * a.v));
    }
    case NodeKind::Log: {
        J a = eval_rec<J>(n->a.get(), ctx);
        if constexpr (cplx) {
            if (abs_of(a.v) == 0.0) domain_fail("log at zero", n, ctx);
            if (a.v.imag() == 0.0 && a.v.real() < 0.0)
                throw NonAnalyticError("log evaluated on its branch cut in '" +
                                       print_scalar(ScalarExpr(n->a)) + "' at " + ctx.point_text);
        } else {
            if (!(a.v > S(0))) domain_fail("log of non-positive value", n, ctx);
        }
        using std::log;
        const S u = a.v;
        if constexpr (std::is_same_v<J, Jet2<S>>)
            return a.compose(log(u), S(1) / u, S(-1) / (u * u));
        else
            return a.compose(log(u), S(1) / u, S(-1) / (u * u), S(2) / (u * u * u));
    }
    case NodeKind::Re:
    case NodeKind::Im: {
        if (ctx.complex_directions)
            throw NonAnalyticError("re/im is not holomorphic; cannot differentiate '" +
                                   print_scalar(ScalarExpr(n->a)) + "' w.r.t. complex coordinates");
        using CJ = typename complex_counterpart<J>::type;
        CJ inner = eval_rec<CJ>(n->a.get(), ctx);
        return part_taker<J>::take(inner, n->kind == NodeKind::Re);
    }
    }
    throw Error("corrupt expression node");
}

inline bool finite_scalar(double v) { return std::isfinite(v); }
inline bool finite_scalar(std::complex<double> v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <class S> bool jet_finite(const Jet2<S>& j) {
    if (!finite_scalar(j.v)) return false;
    for (int i = 0; i < j.g.size(); ++i)
        if (!finite_scalar(j.g[i])) return false;
    for (int i = 0; i < j.H.rows(); ++i)
        for (int k = 0; k < j.H.cols(); ++k)
            if (!finite_scalar(j.H(i, k))) return false;
    return true;
}

template <class S> bool jet_finite(const Jet3<S>& j) {
    if (!finite_scalar(j.v)) return false;
    for (int i = 0; i < j.g.size(); ++i)
        if (!finite_scalar(j.g[i])) return false;
    for (int i = 0; i < j.H.rows(); ++i)
        for (int k = 0; k < j.H.cols(); ++k)
            if (!finite_scalar(j.H(i, k))) return false;
    for (const auto& t : j.T)
        if (!finite_scalar(t)) return false;
    return true;
}

template <class J>
J eval_top(const ScalarExpr& e, const EvalContext& ctx) {
    if (!e.valid()) throw Error("evaluating an empty expression");
    J j = eval_rec<J>(e.get(), ctx);
    if (!jet_finite(j)) {
        std::string sub;
        print_node(e.get(), ctx.chart, sub);
        throw DomainError("non-finite result", sub, ctx.point_text);
    }
    return j;
}

} // namespace detail

/// Value, gradient and Hessian of an expression at a real chart point.
inline Jet2<double> eval_jet2(const ScalarExpr& e, const Eigen::VectorXd& point,
                              const ChartSpec* chart = nullptr) {
    detail::EvalContext ctx;
    ctx.coords = point.cast<std::complex<double>>();
    ctx.point_text = detail::point_to_text(ctx.coords);
    ctx.chart = chart;
    return detail::eval_top<Jet2<double>>(e, ctx);
}

/// Degree-3 variant (needed wherever a derivative of curvature is taken).
inline Jet3<double> eval_jet3(const ScalarExpr& e, const Eigen::VectorXd& point,
                              const ChartSpec* chart = nullptr) {
    detail::EvalContext ctx;
    ctx.coords = point.cast<std::complex<double>>();
    ctx.point_text = detail::point_to_text(ctx.coords);
    ctx.chart = chart;
    return detail::eval_top<Jet3<double>>(e, ctx);
}

/// First-order holomorphic jet: value and d/dz^a gradient at a complex point.
struct ComplexJet1 {
    std::complex<double> v;
    Eigen::VectorXcd g;
};

inline ComplexJet1 eval_complex_jet1(const ScalarExpr& e, const Eigen::VectorXcd& point,
                                     const ChartSpec* chart = nullptr) {
    detail::EvalContext ctx;
    ctx.coords = point;
    ctx.complex_directions = true;
    ctx.point_text = detail::point_to_text(point);
    ctx.chart = chart;
    auto j = detail::eval_top<Jet2<std::complex<double>>>(e, ctx);
    return {j.v, j.g};
}

/// Second-order holomorphic jet (value, dz gradient, dz dz Hessian).
inline Jet2<std::complex<double>> eval_complex_jet2(const ScalarExpr& e,
                                                    const Eigen::VectorXcd& point,
                                                    const ChartSpec* chart = nullptr) {
    detail::EvalContext ctx;
    ctx.coords = point;
    ctx.complex_directions = true;
    ctx.point_text = detail::point_to_text(point);
    ctx.chart = chart;
    return detail::eval_top<Jet2<std::complex<double>>>(e, ctx);
}

/// Complex-valued jet over a real chart (used beneath re/im nodes and for
/// fields with complex constants sampled at real points).
inline Jet2<std::complex<double>> eval_real_chart_cjet2(const ScalarExpr& e,
                                                        const Eigen::VectorXd& point,
                                                        const ChartSpec* chart = nullptr) {
    detail::EvalContext ctx;
    ctx.coords = point.cast<std::complex<double>>();
    ctx.point_text = detail::point_to_text(ctx.coords);
    ctx.chart = chart;
    return detail::eval_top<Jet2<std::complex<double>>>(e, ctx);
}

} // namespace twinmet
