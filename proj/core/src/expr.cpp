#include "bmin/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace bmin::expr {

struct Expr::Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;           // Constant
    int var = -1;                 // Variable: index into the declared list
    std::string name;             // Variable: declared spelling
    UnaryOp uop = UnaryOp::Neg;   // Unary
    BinaryOp bop = BinaryOp::Add; // Binary
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_constant(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
}

NodePtr make_variable(int index, std::string name) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Variable;
    n->var = index;
    n->name = std::move(name);
    return n;
}

NodePtr make_unary(UnaryOp op, NodePtr a) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Unary;
    n->uop = op;
    n->a = std::move(a);
    return n;
}

NodePtr make_binary_node(BinaryOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Binary;
    n->bop = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

// Printing precedence levels. Negative constants print with a leading '-', which the
// grammar treats as a unary minus, so they share its level.
constexpr int kPrecAddSub = 1;
constexpr int kPrecMulDiv = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr::Node& n) {
    switch (n.kind) {
        case NodeKind::Constant:
            return std::signbit(n.value) ? kPrecUnary : kPrecAtom;
        case NodeKind::Variable:
            return kPrecAtom;
        case NodeKind::Unary:
            return n.uop == UnaryOp::Neg ? kPrecUnary : kPrecAtom;
        case NodeKind::Binary:
            switch (n.bop) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return kPrecAddSub;
                case BinaryOp::Mul:
                case BinaryOp::Div: return kPrecMulDiv;
                case BinaryOp::Pow: return kPrecPow;
            }
    }
    return kPrecAtom;
}

const char* function_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Tan: return "tan";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs: return "abs";
    }
    return "?";
}

void print_node(const Expr::Node& n, std::string& out);

void print_child(const Expr::Node& child, int min_prec, std::string& out) {
    if (precedence(child) < min_prec) {
        out += '(';
        print_node(child, out);
        out += ')';
    } else {
        print_node(child, out);
    }
}

void print_node(const Expr::Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case NodeKind::Variable:
            out += n.name;
            return;
        case NodeKind::Unary:
            if (n.uop == UnaryOp::Neg) {
                out += '-';
                print_child(*n.a, kPrecUnary, out);
            } else {
                out += function_name(n.uop);
                out += '(';
                print_node(*n.a, out);
                out += ')';
            }
            return;
        case NodeKind::Binary: {
            const int p = precedence(n);
            char op = 0;
            switch (n.bop) {
                case BinaryOp::Add: op = '+'; break;
                case BinaryOp::Sub: op = '-'; break;
                case BinaryOp::Mul: op = '*'; break;
                case BinaryOp::Div: op = '/'; break;
                case BinaryOp::Pow: op = '^'; break;
            }
            if (n.bop == BinaryOp::Pow) {
                // Right-associative; the left operand must be an atom to survive a
                // round trip, the right operand may be anything unary binds.
                print_child(*n.a, kPrecAtom, out);
                out += op;
                print_child(*n.b, kPrecUnary, out);
            } else {
                print_child(*n.a, p, out);
                out += op;
                print_child(*n.b, p + 1, out);
            }
            return;
        }
    }
}

std::string node_str(const Expr::Node& n) {
    std::string s;
    print_node(n, s);
    return s;
}

double eval_node(const Expr::Node& n, std::span<const double> values) {
    double r = 0.0;
    switch (n.kind) {
        case NodeKind::Constant:
            return n.value;
        case NodeKind::Variable:
            if (n.var < 0 || static_cast<std::size_t>(n.var) >= values.size())
                throw EvalError("missing value for variable '" + n.name + "'", n.name);
            return values[static_cast<std::size_t>(n.var)];
        case NodeKind::Unary: {
            const double a = eval_node(*n.a, values);
            switch (n.uop) {
                case UnaryOp::Neg: r = -a; break;
                case UnaryOp::Sin: r = std::sin(a); break;
                case UnaryOp::Cos: r = std::cos(a); break;
                case UnaryOp::Tan: r = std::tan(a); break;
                case UnaryOp::Exp: r = std::exp(a); break;
                case UnaryOp::Log:
                    if (a <= 0.0) throw EvalError("log of non-positive value", node_str(n));
                    r = std::log(a);
                    break;
                case UnaryOp::Sqrt:
                    if (a < 0.0) throw EvalError("sqrt of negative value", node_str(n));
                    r = std::sqrt(a);
                    break;
                case UnaryOp::Abs: r = std::fabs(a); break;
            }
            break;
        }
        case NodeKind::Binary: {
            const double a = eval_node(*n.a, values);
            const double b = eval_node(*n.b, values);
            switch (n.bop) {
                case BinaryOp::Add: r = a + b; break;
                case BinaryOp::Sub: r = a - b; break;
                case BinaryOp::Mul: r = a * b; break;
                case BinaryOp::Div:
                    if (b == 0.0) throw EvalError("division by zero", node_str(n));
                    r = a / b;
                    break;
                case BinaryOp::Pow:
                    if (a < 0.0 && b != std::floor(b))
                        throw EvalError("fractional power of negative base", node_str(n));
                    if (a == 0.0 && b < 0.0)
                        throw EvalError("negative power of zero", node_str(n));
                    r = std::pow(a, b);
                    break;
            }
            break;
        }
    }
    if (!std::isfinite(r)) throw EvalError("non-finite value", node_str(n));
    return r;
}

NodePtr derivative_node(const NodePtr& n, int var) {
    switch (n->kind) {
        case NodeKind::Constant:
            return make_constant(0.0);
        case NodeKind::Variable:
            return make_constant(n->var == var ? 1.0 : 0.0);
        case NodeKind::Unary: {
            NodePtr da = derivative_node(n->a, var);
            switch (n->uop) {
                case UnaryOp::Neg:
                    return make_unary(UnaryOp::Neg, da);
                case UnaryOp::Sin:
                    return make_binary_node(BinaryOp::Mul, make_unary(UnaryOp::Cos, n->a), da);
                case UnaryOp::Cos:
                    return make_binary_node(
                        BinaryOp::Mul,
                        make_unary(UnaryOp::Neg, make_unary(UnaryOp::Sin, n->a)), da);
                case UnaryOp::Tan:
                    return make_binary_node(
                        BinaryOp::Div, da,
                        make_binary_node(BinaryOp::Pow, make_unary(UnaryOp::Cos, n->a),
                                         make_constant(2.0)));
                case UnaryOp::Exp:
                    return make_binary_node(BinaryOp::Mul, make_unary(UnaryOp::Exp, n->a), da);
                case UnaryOp::Log:
                    return make_binary_node(BinaryOp::Div, da, n->a);
                case UnaryOp::Sqrt:
                    return make_binary_node(
                        BinaryOp::Div, da,
                        make_binary_node(BinaryOp::Mul, make_constant(2.0),
                                         make_unary(UnaryOp::Sqrt, n->a)));
                case UnaryOp::Abs:
                    // u/|u| * u'; evaluation at u = 0 reports the domain error.
                    return make_binary_node(
                        BinaryOp::Mul,
                        make_binary_node(BinaryOp::Div, n->a, make_unary(UnaryOp::Abs, n->a)),
                        da);
            }
            break;
        }
        case NodeKind::Binary: {
            switch (n->bop) {
                case BinaryOp::Add:
                    return make_binary_node(BinaryOp::Add, derivative_node(n->a, var),
                                            derivative_node(n->b, var));
                case BinaryOp::Sub:
                    return make_binary_node(BinaryOp::Sub, derivative_node(n->a, var),
                                            derivative_node(n->b, var));
                case BinaryOp::Mul:
                    return make_binary_node(
                        BinaryOp::Add,
                        make_binary_node(BinaryOp::Mul, derivative_node(n->a, var), n->b),
                        make_binary_node(BinaryOp::Mul, n->a, derivative_node(n->b, var)));
                case BinaryOp::Div:
                    // (a'b - ab') / b^2
                    return make_binary_node(
                        BinaryOp::Div,
                        make_binary_node(
                            BinaryOp::Sub,
                            make_binary_node(BinaryOp::Mul, derivative_node(n->a, var), n->b),
                            make_binary_node(BinaryOp::Mul, n->a, derivative_node(n->b, var))),
                        make_binary_node(BinaryOp::Pow, n->b, make_constant(2.0)));
                case BinaryOp::Pow: {
                    if (n->b->kind == NodeKind::Constant) {
                        // c * a^(c-1) * a'
                        const double c = n->b->value;
                        return make_binary_node(
                            BinaryOp::Mul,
                            make_binary_node(
                                BinaryOp::Mul, make_constant(c),
                                make_binary_node(BinaryOp::Pow, n->a, make_constant(c - 1.0))),
                            derivative_node(n->a, var));
                    }
                    // a^b * (b' log a + b a'/a)
                    return make_binary_node(
                        BinaryOp::Mul, make_binary_node(BinaryOp::Pow, n->a, n->b),
                        make_binary_node(
                            BinaryOp::Add,
                            make_binary_node(BinaryOp::Mul, derivative_node(n->b, var),
                                             make_unary(UnaryOp::Log, n->a)),
                            make_binary_node(
                                BinaryOp::Mul, n->b,
                                make_binary_node(BinaryOp::Div, derivative_node(n->a, var),
                                                 n->a))));
                }
            }
            break;
        }
    }
    throw std::logic_error("derivative_node: unreachable");
}

void collect_vars(const Expr::Node& n, std::vector<bool>& used) {
    switch (n.kind) {
        case NodeKind::Constant: return;
        case NodeKind::Variable:
            if (n.var >= 0 && static_cast<std::size_t>(n.var) < used.size())
                used[static_cast<std::size_t>(n.var)] = true;
            return;
        case NodeKind::Unary:
            collect_vars(*n.a, used);
            return;
        case NodeKind::Binary:
            collect_vars(*n.a, used);
            collect_vars(*n.b, used);
            return;
    }
}

struct Parser {
    std::string_view text;
    std::size_t pos = 0;
    const std::vector<std::string>& vars;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            const char c = peek();
            if (c == '+' || c == '-') {
                ++pos;
                NodePtr rhs = parse_term();
                lhs = make_binary_node(c == '+' ? BinaryOp::Add : BinaryOp::Sub, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            const char c = peek();
            if (c == '*' || c == '/') {
                ++pos;
                NodePtr rhs = parse_unary();
                lhs = make_binary_node(c == '*' ? BinaryOp::Mul : BinaryOp::Div, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_unary(UnaryOp::Neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (consume('^')) return make_binary_node(BinaryOp::Pow, base, parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        const char c = peek();
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!consume(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        if (c == '\0') fail("unexpected end of expression");
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        skip_ws();
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
            ++pos;
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            std::size_t epos = pos + 1;
            if (epos < text.size() && (text[epos] == '+' || text[epos] == '-')) ++epos;
            if (epos < text.size() && std::isdigit(static_cast<unsigned char>(text[epos]))) {
                pos = epos;
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                    ++pos;
            }
        }
        const std::string token(text.substr(start, pos - start));
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') {
            pos = start;
            fail("malformed number '" + token + "'");
        }
        return make_constant(v);
    }

    NodePtr parse_identifier() {
        skip_ws();
        const std::size_t start = pos;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                     text[pos] == '_'))
            ++pos;
        const std::string name(text.substr(start, pos - start));

        static constexpr std::array<std::pair<std::string_view, UnaryOp>, 7> kFunctions{{
            {"sin", UnaryOp::Sin},
            {"cos", UnaryOp::Cos},
            {"tan", UnaryOp::Tan},
            {"exp", UnaryOp::Exp},
            {"log", UnaryOp::Log},
            {"sqrt", UnaryOp::Sqrt},
            {"abs", UnaryOp::Abs},
        }};
        for (const auto& [fname, op] : kFunctions) {
            if (name == fname) {
                if (!consume('(')) {
                    pos = start;
                    fail("function '" + name + "' requires a parenthesized argument");
                }
                NodePtr arg = parse_expr();
                if (!consume(')')) fail("expected ')' closing '" + name + "'");
                return make_unary(op, arg);
            }
        }
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i] == name) return make_variable(static_cast<int>(i), name);
        }
        pos = start;
        fail("unknown identifier '" + name + "'");
    }
};

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
      pos_(position) {}

EvalError::EvalError(const std::string& message, std::string subexpression)
    : std::runtime_error(message + " in '" + subexpression + "'"),
      subexpr_(std::move(subexpression)) {}

Expr::Expr(std::shared_ptr<const Node> root, std::shared_ptr<const std::vector<std::string>> vars)
    : root_(std::move(root)), vars_(std::move(vars)) {}

NodeKind Expr::kind() const {
    if (!root_) throw std::logic_error("kind() on empty Expr");
    return root_->kind;
}

double Expr::eval(std::span<const double> values) const {
    if (!root_) throw std::logic_error("eval() on empty Expr");
    return eval_node(*root_, values);
}

double Expr::eval(const std::map<std::string, double>& bindings) const {
    if (!root_) throw std::logic_error("eval() on empty Expr");
    std::vector<bool> used(vars_->size(), false);
    collect_vars(*root_, used);
    std::vector<double> values(vars_->size(), 0.0);
    for (std::size_t i = 0; i < vars_->size(); ++i) {
        const auto it = bindings.find((*vars_)[i]);
        if (it != bindings.end()) {
            values[i] = it->second;
        } else if (used[i]) {
            throw EvalError("unbound variable '" + (*vars_)[i] + "'", (*vars_)[i]);
        }
    }
    return eval_node(*root_, values);
}

Expr Expr::derivative(const std::string& var) const {
    if (!root_) throw std::logic_error("derivative() on empty Expr");
    int index = -1;
    for (std::size_t i = 0; i < vars_->size(); ++i) {
        if ((*vars_)[i] == var) {
            index = static_cast<int>(i);
            break;
        }
    }
    if (index < 0) throw std::invalid_argument("derivative: '" + var + "' is not a declared variable");
    return Expr(derivative_node(root_, index), vars_);
}

const std::vector<std::string>& Expr::variables() const {
    static const std::vector<std::string> kEmpty;
    return vars_ ? *vars_ : kEmpty;
}

std::string Expr::str() const {
    if (!root_) return "";
    return node_str(*root_);
}

Expr parse(std::string_view text, std::vector<std::string> variables) {
    auto vars = std::make_shared<const std::vector<std::string>>(std::move(variables));
    Parser p{text, 0, *vars};
    if (p.at_end()) p.fail("empty expression");
    NodePtr root = p.parse_expr();
    if (!p.at_end()) p.fail("unexpected trailing input");
    return Expr(std::move(root), std::move(vars));
}

Expr differentiate(const Expr& e, const std::string& var) { return e.derivative(var); }

double eval(const Expr& e, const std::map<std::string, double>& bindings) {
    return e.eval(bindings);
}

std::string to_string(const Expr& e) { return e.str(); }

Expr make_binary(BinaryOp op, const Expr& a, const Expr& b) {
    if (a.empty() || b.empty()) throw std::logic_error("make_binary on empty Expr");
    if (a.vars_ != b.vars_ && *a.vars_ != *b.vars_)
        throw std::invalid_argument("make_binary: operands declare different variable sets");
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Binary;
    n->bop = op;
    n->a = a.root_;
    n->b = b.root_;
    return Expr(std::move(n), a.vars_);
}

}  // namespace bmin::expr
