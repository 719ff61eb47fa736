#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bmin::expr {

/// Raised by parse() on malformed input. position() is the byte offset into the text at
/// which the problem was detected.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position);
    std::size_t position() const noexcept { return pos_; }

private:
    std::size_t pos_;
};

/// Raised by evaluation on a domain violation (log of a non-positive value, division by
/// zero, fractional power of a negative base, ...). subexpression() prints the offending
/// subtree.
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& message, std::string subexpression);
    const std::string& subexpression() const noexcept { return subexpr_; }

private:
    std::string subexpr_;
};

enum class UnaryOp { Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class NodeKind { Constant, Variable, Unary, Binary };

/// Immutable scalar expression over a declared variable set.
///
/// Trees are shared via reference-counted nodes and never mutated after construction, so
/// an Expr may be copied cheaply and evaluated concurrently from multiple threads.
class Expr {
public:
    Expr() = default;

    bool empty() const { return root_ == nullptr; }
    NodeKind kind() const;

    /// Evaluates with values indexed like the declared variable list.
    double eval(std::span<const double> values) const;

    /// Evaluates with values bound by name. Every variable that occurs in the tree must
    /// be bound; unused declared variables may be omitted.
    double eval(const std::map<std::string, double>& bindings) const;

    /// Exact symbolic partial derivative. var must be in the declared set. The result is
    /// not simplified beyond evaluability.
    Expr derivative(const std::string& var) const;

    const std::vector<std::string>& variables() const;

    /// Canonical text form. Printing, re-parsing and printing again reproduces the same
    /// string, and the re-parsed tree evaluates identically.
    std::string str() const;

    struct Node;  // defined in expr.cpp; opaque to clients

private:
    friend Expr parse(std::string_view, std::vector<std::string>);
    friend Expr make_binary(BinaryOp, const Expr&, const Expr&);
    Expr(std::shared_ptr<const Node> root, std::shared_ptr<const std::vector<std::string>> vars);

    std::shared_ptr<const Node> root_;
    std::shared_ptr<const std::vector<std::string>> vars_;
};

/// Parses text over the declared variables.
///
/// Grammar: binary + - * / ^ with the usual precedence, ^ right-associative and binding
/// tighter than unary minus, which binds tighter than * and /. Functions sin, cos, tan,
/// exp, log, sqrt, abs require parenthesized arguments. No implicit multiplication.
/// Identifiers outside the declared set raise ParseError naming the offender.
Expr parse(std::string_view text, std::vector<std::string> variables);

Expr differentiate(const Expr& e, const std::string& var);
double eval(const Expr& e, const std::map<std::string, double>& bindings);
std::string to_string(const Expr& e);

/// Combines two expressions over the same declared variable set.
Expr make_binary(BinaryOp op, const Expr& a, const Expr& b);

}  // namespace bmin::expr
