#pragma once

#include <stdexcept>
#include <string>

namespace twinmet {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Syntax error in the expression grammar; carries the byte offset.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t position)
        : Error(msg + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

/// A name in an expression is neither a chart coordinate nor a declared parameter.
class UnknownSymbolError : public Error {
public:
    explicit UnknownSymbolError(const std::string& symbol)
        : Error("unknown symbol '" + symbol + "'"), symbol(symbol) {}
    std::string symbol;
};

/// Evaluation left the domain of some subexpression (division by zero,
/// sqrt/log of an invalid operand, non-finite intermediate).
class DomainError : public Error {
public:
    DomainError(const std::string& what_failed, const std::string& subexpr,
                const std::string& point)
        : Error(what_failed + " in '" + subexpr + "' at point " + point),
          subexpr(subexpr), point(point) {}
    std::string subexpr;
    std::string point;
};

/// An operation with no complex-analytic meaning was requested in a
/// holomorphic evaluation context (re/im nodes, branch-cut crossings).
class NonAnalyticError : public Error {
public:
    using Error::Error;
};

/// A stated algebraic precondition failed; names the identity and its residual.
class PreconditionError : public Error {
public:
    PreconditionError(const std::string& identity, double residual)
        : Error("precondition violated: " + identity +
                " (residual " + std::to_string(residual) + ")"),
          identity(identity), residual(residual) {}
    std::string identity;
    double residual;
};

/// epsilon = 0: the almost-tangent case, detected and reported but never built.
class AlmostTangentError : public Error {
public:
    AlmostTangentError() : Error("epsilon = 0 leads to an almost-tangent structure; unsupported") {}
};

/// Negative epsilon requested in odd dimension.
class ParityError : public Error {
public:
    explicit ParityError(int n)
        : Error("epsilon < 0 requires even dimension, got n = " + std::to_string(n)) {}
};

class SingularError : public Error {
public:
    using Error::Error;
};

class DegenerateMetricError : public SingularError {
public:
    DegenerateMetricError(double det, const std::string& point)
        : SingularError("metric degenerate at " + point + " (det = " + std::to_string(det) + ")"),
          det(det) {}
    double det;
};

class ChartMismatchError : public Error {
public:
    ChartMismatchError(const std::string& a, const std::string& b)
        : Error("chart mismatch: '" + a + "' vs '" + b + "'") {}
};

/// f'(c) = 0 at the requested root.
class DegenerateRootError : public Error {
public:
    explicit DegenerateRootError(double c)
        : Error("degenerate root c = " + std::to_string(c) + ": f'(c) = 0") {}
};

/// An operation requiring a hypothesis (e.g. nabla K = 0) was invoked without it.
class HypothesisError : public Error {
public:
    using Error::Error;
};

class DefinitenessError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace twinmet
