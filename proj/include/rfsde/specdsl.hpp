#pragma once

// Scalar expression language for the drift b(x) and the tube boundaries
// l(t), u(t): parsing, evaluation, printing and symbolic differentiation.

#include "rfsde/errors.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rfsde::dsl {

enum class Op {
    literal,
    variable,
    neg,
    add,
    sub,
    mul,
    div,
    pow,
    sin,
    cos,
    tanh,
    exp,
    abs,
    sign,
    min,
    max,
    clamp,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable AST node. `value` is used by literals, `exponent` by pow.
struct Node {
    Op op = Op::literal;
    double value = 0.0;
    int exponent = 0;
    std::vector<NodePtr> args;
};

/// A parsed expression in one free variable. Cheap to copy; the tree is
/// shared and never mutated.
class Expr {
public:
    Expr(NodePtr root, std::string variable);

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }
    const std::string& variable() const { return variable_; }

    double operator()(double v) const;

private:
    NodePtr root_;
    std::string variable_;
};

class ParseError : public ConfigError {
public:
    ParseError(std::string message, std::size_t offset, std::vector<std::string> expected);

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifierError : public ParseError {
public:
    UnknownIdentifierError(std::string identifier, std::size_t offset);
    const std::string& identifier() const { return identifier_; }

private:
    std::string identifier_;
};

/// Raised by `eval` on division by zero; carries the printed subexpression.
class EvalError : public NumericalError {
public:
    EvalError(const std::string& message, std::string subexpression);
    const std::string& subexpression() const { return subexpression_; }

private:
    std::string subexpression_;
};

// Node constructors. Arithmetic helpers fold literal-only operands.
NodePtr make_literal(double value);
NodePtr make_variable();
NodePtr make_unary(Op op, NodePtr arg);
NodePtr make_binary(Op op, NodePtr lhs, NodePtr rhs);
NodePtr make_pow(NodePtr base, int exponent);
NodePtr make_call(Op op, std::vector<NodePtr> args);

/// Precedence (tightest first): `^`, unary minus, `*` `/`, `+` `-`; binary
/// operators associate to the left. `^` takes an integer literal exponent.
Expr parse(std::string_view source, std::string_view variable);

double eval(const Expr& e, double v);
double eval(const Node& node, double v, std::string_view variable = "x");

/// Derivative with respect to the free variable. `abs'` is `sign`, with
/// sign(0) = 0; min, max and clamp differentiate through sign as well.
Expr differentiate(const Expr& e);

/// Minimal-parenthesis rendering that parses back to an identical tree.
std::string to_string(const Expr& e);
std::string to_string(const Node& node, std::string_view variable);

bool structurally_equal(const Node& a, const Node& b);
inline bool operator==(const Expr& a, const Expr& b)
{
    return a.variable() == b.variable() && structurally_equal(a.root(), b.root());
}

std::string_view op_name(Op op);
std::size_t node_count(const Node& node);

/// True when the tree uses a primitive that is not continuously
/// differentiable everywhere (abs, sign, min, max, clamp).
bool uses_nonsmooth_primitive(const Node& node);

/// A user function: source text, its parse, and an optional asserted bound
/// L with |f(0)| + Lip(f) <= L.
class FunctionSpec {
public:
    FunctionSpec(std::string source, std::string variable,
                 std::optional<double> declared_lipschitz = std::nullopt);

    const std::string& source() const { return source_; }
    const std::string& variable() const { return expr_.variable(); }
    const Expr& expr() const { return expr_; }
    const Expr& derivative() const { return derivative_; }
    std::optional<double> declared_lipschitz() const { return declared_lipschitz_; }

    double operator()(double v) const { return eval(expr_, v); }

    /// Samples `samples` points of [lo, hi] and reports a warning for every
    /// violation of the declared bound. Empty when nothing was declared.
    std::vector<std::string> check_lipschitz(double lo, double hi,
                                             std::size_t samples = 2001) const;

private:
    std::string source_;
    Expr expr_;
    Expr derivative_;
    std::optional<double> declared_lipschitz_;
};

} // namespace rfsde::dsl
