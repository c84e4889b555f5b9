#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "twinmet/chart.hpp"
#include "twinmet/errors.hpp"

namespace twinmet {

enum class NodeKind {
    Constant,
    Coordinate,
    Parameter,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow, // integer exponent
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
    Re, // internal only: real part of a complex-valued subtree
    Im  // internal only: imaginary part
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// One immutable AST node. Parsed constants are real; complex constants occur
/// only in programmatically built trees (realified metrics and the like).
struct ExprNode {
    NodeKind kind;
    std::complex<double> value{0.0, 0.0}; // Constant / Parameter binding
    int coord = -1;                       // Coordinate
    std::string name;                     // Parameter
    int exponent = 0;                     // Pow
    ExprPtr a, b;
};

/// Value-semantics handle to an immutable scalar expression.
class ScalarExpr {
public:
    ScalarExpr() = default;
    explicit ScalarExpr(ExprPtr n) : node_(std::move(n)) {}

    static ScalarExpr constant(double v) { return wrap({NodeKind::Constant, {v, 0.0}}); }
    static ScalarExpr constant(std::complex<double> v) { return wrap({NodeKind::Constant, v}); }
    static ScalarExpr coordinate(int index) {
        ExprNode n{NodeKind::Coordinate};
        n.coord = index;
        return wrap(std::move(n));
    }
    static ScalarExpr parameter(std::string name, std::complex<double> value) {
        ExprNode n{NodeKind::Parameter};
        n.name = std::move(name);
        n.value = value;
        return wrap(std::move(n));
    }

    const ExprNode* get() const { return node_.get(); }
    const ExprPtr& ptr() const { return node_; }
    bool valid() const { return node_ != nullptr; }

private:
    static ScalarExpr wrap(ExprNode&& n) {
        return ScalarExpr(std::make_shared<const ExprNode>(std::move(n)));
    }
    ExprPtr node_;

    friend ScalarExpr make_unary(NodeKind, const ScalarExpr&);
    friend ScalarExpr make_binary(NodeKind, const ScalarExpr&, const ScalarExpr&);
    friend ScalarExpr pow(const ScalarExpr&, int);
};

inline ScalarExpr make_unary(NodeKind k, const ScalarExpr& a) {
    ExprNode n{k};
    n.a = a.ptr();
    return ScalarExpr(std::make_shared<const ExprNode>(std::move(n)));
}

inline ScalarExpr make_binary(NodeKind k, const ScalarExpr& a, const ScalarExpr& b) {
    ExprNode n{k};
    n.a = a.ptr();
    n.b = b.ptr();
    return ScalarExpr(std::make_shared<const ExprNode>(std::move(n)));
}

inline ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) { return make_binary(NodeKind::Add, a, b); }
inline ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) { return make_binary(NodeKind::Sub, a, b); }
inline ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) { return make_binary(NodeKind::Mul, a, b); }
inline ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) { return make_binary(NodeKind::Div, a, b); }
inline ScalarExpr operator-(const ScalarExpr& a) {
    // fold -constant so printed negative literals re-parse to an equal tree
    if (a.get() && a.get()->kind == NodeKind::Constant)
        return ScalarExpr::constant(-a.get()->value);
    return make_unary(NodeKind::Neg, a);
}

inline ScalarExpr pow(const ScalarExpr& a, int k) {
    ExprNode n{NodeKind::Pow};
    n.a = a.ptr();
    n.exponent = k;
    return ScalarExpr(std::make_shared<const ExprNode>(std::move(n)));
}
inline ScalarExpr sin(const ScalarExpr& a) { return make_unary(NodeKind::Sin, a); }
inline ScalarExpr cos(const ScalarExpr& a) { return make_unary(NodeKind::Cos, a); }
inline ScalarExpr exp(const ScalarExpr& a) { return make_unary(NodeKind::Exp, a); }
inline ScalarExpr sqrt(const ScalarExpr& a) { return make_unary(NodeKind::Sqrt, a); }
inline ScalarExpr log(const ScalarExpr& a) { return make_unary(NodeKind::Log, a); }
inline ScalarExpr re(const ScalarExpr& a) { return make_unary(NodeKind::Re, a); }
inline ScalarExpr im(const ScalarExpr& a) { return make_unary(NodeKind::Im, a); }

inline bool expr_equal(const ExprNode* x, const ExprNode* y) {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
    case NodeKind::Constant:
        return x->value.real() == y->value.real() && x->value.imag() == y->value.imag();
    case NodeKind::Coordinate:
        return x->coord == y->coord;
    case NodeKind::Parameter:
        return x->name == y->name && x->value == y->value;
    case NodeKind::Pow:
        return x->exponent == y->exponent && expr_equal(x->a.get(), y->a.get());
    default:
        return expr_equal(x->a.get(), y->a.get()) && expr_equal(x->b.get(), y->b.get());
    }
}

inline bool operator==(const ScalarExpr& a, const ScalarExpr& b) {
    return expr_equal(a.get(), b.get());
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_const(std::complex<double> v) {
    if (v.imag() == 0.0) return format_real(v.real());
    // complex constants never come from the parser; printed for diagnostics
    return "(" + format_real(v.real()) + "+" + format_real(v.imag()) + "i)";
}

// precedence: add/sub 1, mul/div 2, unary 3, pow 4, atom 5
inline int precedence(const ExprNode* n) {
    switch (n->kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    case NodeKind::Constant:
        return (n->value.imag() == 0.0 && n->value.real() < 0.0) ? 3 : 5;
    default: return 5;
    }
}

inline void print_node(const ExprNode* n, const ChartSpec* chart, std::string& out);

inline void print_child(const ExprNode* c, const ChartSpec* chart, int min_prec,
                        std::string& out) {
    const bool parens = precedence(c) < min_prec;
    if (parens) out += '(';
    print_node(c, chart, out);
    if (parens) out += ')';
}

inline void print_node(const ExprNode* n, const ChartSpec* chart, std::string& out) {
    switch (n->kind) {
    case NodeKind::Constant:
        out += format_const(n->value);
        break;
    case NodeKind::Coordinate:
        if (chart && n->coord >= 0 && n->coord < chart->dim())
            out += chart->coord_name(n->coord);
        else
            out += "#" + std::to_string(n->coord);
        break;
    case NodeKind::Parameter:
        out += n->name;
        break;
    case NodeKind::Add:
        print_child(n->a.get(), chart, 1, out);
        out += " + ";
        print_child(n->b.get(), chart, 2, out);
        break;
    case NodeKind::Sub:
        print_child(n->a.get(), chart, 1, out);
        out += " - ";
        print_child(n->b.get(), chart, 2, out);
        break;
    case NodeKind::Mul:
        print_child(n->a.get(), chart, 2, out);
        out += "*";
        print_child(n->b.get(), chart, 3, out);
        break;
    case NodeKind::Div:
        print_child(n->a.get(), chart, 2, out);
        out += "/";
        print_child(n->b.get(), chart, 3, out);
        break;
    case NodeKind::Neg:
        out += "-";
        print_child(n->a.get(), chart, 3, out);
        break;
    case NodeKind::Pow:
        print_child(n->a.get(), chart, 5, out);
        out += "^" + std::to_string(n->exponent);
        break;
    case NodeKind::Sin: out += "sin("; print_node(n->a.get(), chart, out); out += ')'; break;
    case NodeKind::Cos: out += "cos("; print_node(n->a.get(), chart, out); out += ')'; break;
    case NodeKind::Exp: out += "exp("; print_node(n->a.get(), chart, out); out += ')'; break;
    case NodeKind::Sqrt: out += "sqrt("; print_node(n->a.get(), chart, out); out += ')'; break;
    case NodeKind::Log: out += "log("; print_node(n->a.get(), chart, out); out += ')'; break;
    case NodeKind::Re: out += "re("; print_node(n->a.get(), chart, out); out += ')'; break;
    case NodeKind::Im: out += "im("; print_node(n->a.get(), chart, out); out += ')'; break;
    }
}

} // namespace detail

/// Render an expression in the text grammar (coordinates printed by name).
inline std::string print_scalar(const ScalarExpr& e, const ChartSpec& chart) {
    std::string out;
    detail::print_node(e.get(), &chart, out);
    return out;
}

inline std::string print_scalar(const ScalarExpr& e) {
    std::string out;
    detail::print_node(e.get(), nullptr, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
public:
    Parser(const std::string& text, const ChartSpec& chart,
           const std::map<std::string, double>& params)
        : text_(text), chart_(chart), params_(params) {}

    ScalarExpr run() {
        if (text_.find_first_not_of(" \t\r\n") == std::string::npos)
            throw ParseError("empty expression", 0);
        ScalarExpr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }
    bool accept(char c) {
        if (peek(c)) { ++pos_; return true; }
        return false;
    }

    ScalarExpr parse_expr() {
        ScalarExpr e = parse_term();
        for (;;) {
            if (accept('+')) e = e + parse_term();
            else if (accept('-')) e = e - parse_term();
            else return e;
        }
    }

    ScalarExpr parse_term() {
        ScalarExpr e = parse_unary();
        for (;;) {
            if (accept('*')) e = e * parse_unary();
            else if (accept('/')) e = e / parse_unary();
            else return e;
        }
    }

    ScalarExpr parse_unary() {
        if (accept('-')) return -parse_unary();
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    ScalarExpr parse_power() {
        ScalarExpr base = parse_atom();
        if (accept('^')) return pow(base, parse_int_exponent());
        return base;
    }

    int parse_int_exponent() {
        skip_ws();
        std::size_t start = pos_;
        bool neg = false;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            neg = text_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw ParseError("expected integer exponent", start);
        long v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > 1000) throw ParseError("exponent too large", start);
            ++pos_;
        }
        return static_cast<int>(neg ? -v : v);
    }

    ScalarExpr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ScalarExpr e = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    ScalarExpr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = mark; // 'e' was an identifier start, not an exponent
            }
        }
        const std::string tok = text_.substr(start, pos_ - start);
        try {
            return ScalarExpr::constant(std::stod(tok));
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + tok + "'", start);
        }
    }

    ScalarExpr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string id = text_.substr(start, pos_ - start);
        if (id == "sin" || id == "cos" || id == "exp" || id == "sqrt" || id == "log") {
            if (!accept('(')) throw ParseError("expected '(' after '" + id + "'", pos_);
            ScalarExpr arg = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            if (id == "sin") return sin(arg);
            if (id == "cos") return cos(arg);
            if (id == "exp") return exp(arg);
            if (id == "sqrt") return sqrt(arg);
            return log(arg);
        }
        if (auto ci = chart_.coord_index(id)) return ScalarExpr::coordinate(*ci);
        if (auto it = params_.find(id); it != params_.end())
            return ScalarExpr::parameter(id, it->second);
        throw UnknownSymbolError(id);
    }

    const std::string& text_;
    const ChartSpec& chart_;
    const std::map<std::string, double>& params_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parse the expression grammar over a chart's coordinates; parameter names
/// are bound to real values at parse time.
inline ScalarExpr parse_scalar(const std::string& text, const ChartSpec& chart,
                               const std::map<std::string, double>& params = {}) {
    return detail::Parser(text, chart, params).run();
}

// ---------------------------------------------------------------------------
// Structural transforms
// ---------------------------------------------------------------------------

namespace detail {

template <class Fn>
ExprPtr transform(const ExprPtr& n, const Fn& leaf) {
    if (!n) return nullptr;
    if (n->kind == NodeKind::Constant || n->kind == NodeKind::Coordinate ||
        n->kind == NodeKind::Parameter)
        return leaf(n);
    ExprNode out = *n;
    out.a = transform(n->a, leaf);
    out.b = transform(n->b, leaf);
    return std::make_shared<const ExprNode>(std::move(out));
}

} // namespace detail

/// Rewrite coordinate indices: coordinate i becomes coordinate index_map[i].
inline ScalarExpr remap_coordinates(const ScalarExpr& e, const std::vector<int>& index_map) {
    return ScalarExpr(detail::transform(e.ptr(), [&](const ExprPtr& n) -> ExprPtr {
        if (n->kind != NodeKind::Coordinate) return n;
        ExprNode out = *n;
        out.coord = index_map.at(static_cast<std::size_t>(n->coord));
        return std::make_shared<const ExprNode>(std::move(out));
    }));
}

/// Replace coordinate i by the expression subs[i].
inline ScalarExpr substitute_coordinates(const ScalarExpr& e,
                                         const std::vector<ScalarExpr>& subs) {
    return ScalarExpr(detail::transform(e.ptr(), [&](const ExprPtr& n) -> ExprPtr {
        if (n->kind != NodeKind::Coordinate) return n;
        return subs.at(static_cast<std::size_t>(n->coord)).ptr();
    }));
}

/// Conjugate every constant and parameter binding in the tree.
inline ScalarExpr conjugate_constants(const ScalarExpr& e) {
    return ScalarExpr(detail::transform(e.ptr(), [&](const ExprPtr& n) -> ExprPtr {
        if (n->kind == NodeKind::Constant || n->kind == NodeKind::Parameter) {
            ExprNode out = *n;
            out.value = std::conj(n->value);
            return std::make_shared<const ExprNode>(std::move(out));
        }
        return n;
    }));
}

} // namespace twinmet
