#include "rfsde/specdsl.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

namespace rfsde::dsl {

namespace {

struct FunctionInfo {
    std::string_view name;
    Op op;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"sin", Op::sin, 1},
    {"cos", Op::cos, 1},
    {"tanh", Op::tanh, 1},
    {"exp", Op::exp, 1},
    {"abs", Op::abs, 1},
    {"sign", Op::sign, 1},
    {"min", Op::min, 2},
    {"max", Op::max, 2},
    {"clamp", Op::clamp, 3},
}};

const FunctionInfo* find_function(std::string_view name)
{
    for (const auto& f : kFunctions)
        if (f.name == name) return &f;
    return nullptr;
}

const FunctionInfo* find_function(Op op)
{
    for (const auto& f : kFunctions)
        if (f.op == op) return &f;
    return nullptr;
}

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
    Tok kind = Tok::end;
    std::size_t offset = 0;
    std::string_view text;
    double number = 0.0;
};

std::string describe(const Token& t)
{
    switch (t.kind) {
    case Tok::end: return "end of input";
    case Tok::number: return "number '" + std::string(t.text) + "'";
    case Tok::ident: return "identifier '" + std::string(t.text) + "'";
    default: return "'" + std::string(t.text) + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        Token t;
        t.offset = pos_;
        if (pos_ >= src_.size()) return t;

        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_ + 1;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            t.kind = Tok::ident;
            t.text = src_.substr(pos_, end - pos_);
            pos_ = end;
            return t;
        }

        switch (c) {
        case '+': t.kind = Tok::plus; break;
        case '-': t.kind = Tok::minus; break;
        case '*': t.kind = Tok::star; break;
        case '/': t.kind = Tok::slash; break;
        case '^': t.kind = Tok::caret; break;
        case '(': t.kind = Tok::lparen; break;
        case ')': t.kind = Tok::rparen; break;
        case ',': t.kind = Tok::comma; break;
        default:
            throw ParseError("unexpected character '" + std::string(1, c) + "' at offset " +
                                 std::to_string(pos_),
                             pos_, {"number", "identifier", "(", "-"});
        }
        t.text = src_.substr(pos_, 1);
        ++pos_;
        return t;
    }

private:
    Token lex_number()
    {
        const std::size_t start = pos_;
        std::size_t end = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
                ++end;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            mantissa += digits();
        }
        if (mantissa == 0)
            throw ParseError("malformed number at offset " + std::to_string(start), start,
                             {"digit"});
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t exp_pos = end + 1;
            if (exp_pos < src_.size() && (src_[exp_pos] == '+' || src_[exp_pos] == '-')) ++exp_pos;
            if (exp_pos < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp_pos]))) {
                end = exp_pos;
                digits();
            }
        }
        Token t;
        t.kind = Tok::number;
        t.offset = start;
        t.text = src_.substr(start, end - start);
        const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
        if (res.ec != std::errc() || !std::isfinite(t.number))
            throw ParseError("number out of range at offset " + std::to_string(start), start,
                             {"finite number"});
        pos_ = end;
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Recursive-descent parser
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] INTEGER)*
//   primary := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

class Parser {
public:
    Parser(std::string_view src, std::string_view variable)
        : lexer_(src), variable_(variable)
    {
        advance();
    }

    NodePtr parse_all()
    {
        NodePtr e = expr();
        if (cur_.kind != Tok::end) fail({"operator", "end of input"});
        return e;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    [[noreturn]] void fail(std::vector<std::string> expected) const
    {
        throw ParseError("syntax error at offset " + std::to_string(cur_.offset) + ": found " +
                             describe(cur_) + ", expected one of {" + join(expected) + "}",
                         cur_.offset, std::move(expected));
    }

    void expect(Tok kind, std::string_view what)
    {
        if (cur_.kind != kind) fail({std::string(what)});
        advance();
    }

    NodePtr expr()
    {
        NodePtr lhs = term();
        while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
            const Op op = cur_.kind == Tok::plus ? Op::add : Op::sub;
            advance();
            lhs = raw_binary(op, std::move(lhs), term());
        }
        return lhs;
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
            const Op op = cur_.kind == Tok::star ? Op::mul : Op::div;
            advance();
            lhs = raw_binary(op, std::move(lhs), unary());
        }
        return lhs;
    }

    NodePtr unary()
    {
        if (cur_.kind == Tok::minus) {
            advance();
            NodePtr arg = unary();
            // A signed number is a negative literal, as printed.
            if (arg->op == Op::literal) return make_literal(-arg->value);
            auto n = std::make_shared<Node>();
            n->op = Op::neg;
            n->args = {std::move(arg)};
            return n;
        }
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        while (cur_.kind == Tok::caret) {
            advance();
            bool negative = false;
            if (cur_.kind == Tok::minus) {
                negative = true;
                advance();
            }
            if (cur_.kind != Tok::number) fail({"integer exponent"});
            const double v = cur_.number;
            if (v != std::floor(v) || v > 1e6 ||
                cur_.text.find_first_of(".eE") != std::string_view::npos)
                fail({"integer exponent"});
            advance();
            auto n = std::make_shared<Node>();
            n->op = Op::pow;
            n->exponent = static_cast<int>(negative ? -v : v);
            n->args = {std::move(base)};
            base = std::move(n);
        }
        return base;
    }

    NodePtr primary()
    {
        switch (cur_.kind) {
        case Tok::number: {
            auto n = std::make_shared<Node>();
            n->op = Op::literal;
            n->value = cur_.number;
            advance();
            return n;
        }
        case Tok::lparen: {
            advance();
            NodePtr e = expr();
            expect(Tok::rparen, ")");
            return e;
        }
        case Tok::ident: return identifier();
        default: fail({"number", "identifier", "(", "-"});
        }
    }

    NodePtr identifier()
    {
        const Token name = cur_;
        advance();
        if (name.text == variable_) {
            auto n = std::make_shared<Node>();
            n->op = Op::variable;
            return n;
        }
        const FunctionInfo* fn = find_function(name.text);
        if (!fn) throw UnknownIdentifierError(std::string(name.text), name.offset);

        expect(Tok::lparen, "(");
        auto n = std::make_shared<Node>();
        n->op = fn->op;
        n->args.push_back(expr());
        while (cur_.kind == Tok::comma) {
            advance();
            n->args.push_back(expr());
        }
        if (n->args.size() != fn->arity) {
            if (n->args.size() < fn->arity) fail({","});
            throw ParseError(std::string(fn->name) + " takes " + std::to_string(fn->arity) +
                                 " argument(s), got " + std::to_string(n->args.size()),
                             name.offset, {std::to_string(fn->arity) + " arguments"});
        }
        expect(Tok::rparen, ")");
        return n;
    }

    static NodePtr raw_binary(Op op, NodePtr lhs, NodePtr rhs)
    {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->args = {std::move(lhs), std::move(rhs)};
        return n;
    }

    Lexer lexer_;
    std::string_view variable_;
    Token cur_;
};

// ---------------------------------------------------------------------------
// Printing

int precedence(const Node& n)
{
    switch (n.op) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    case Op::literal: return std::signbit(n.value) ? 3 : 5;
    default: return 5;
    }
}

std::string format_number(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void print(const Node& n, std::string_view var, std::string& out);

void print_child(const Node& child, int min_prec, std::string_view var, std::string& out)
{
    const bool parens = precedence(child) < min_prec;
    if (parens) out += '(';
    print(child, var, out);
    if (parens) out += ')';
}

void print(const Node& n, std::string_view var, std::string& out)
{
    switch (n.op) {
    case Op::literal:
        if (std::signbit(n.value)) {
            out += '-';
            out += format_number(-n.value);
        } else {
            out += format_number(n.value);
        }
        return;
    case Op::variable: out += var; return;
    case Op::neg:
        out += '-';
        print_child(*n.args[0], 3, var, out);
        return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
        const int p = precedence(n);
        print_child(*n.args[0], p, var, out);
        switch (n.op) {
        case Op::add: out += " + "; break;
        case Op::sub: out += " - "; break;
        case Op::mul: out += " * "; break;
        default: out += " / "; break;
        }
        print_child(*n.args[1], p + 1, var, out);
        return;
    }
    case Op::pow:
        print_child(*n.args[0], 4, var, out);
        out += '^';
        out += std::to_string(n.exponent);
        return;
    default: {
        const FunctionInfo* fn = find_function(n.op);
        out += fn->name;
        out += '(';
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print(*n.args[i], var, out);
        }
        out += ')';
        return;
    }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double eval_node(const Node& n, double v, std::string_view var)
{
    auto arg = [&](std::size_t i) { return eval_node(*n.args[i], v, var); };
    switch (n.op) {
    case Op::literal: return n.value;
    case Op::variable: return v;
    case Op::neg: return -arg(0);
    case Op::add: return arg(0) + arg(1);
    case Op::sub: return arg(0) - arg(1);
    case Op::mul: return arg(0) * arg(1);
    case Op::div: {
        const double num = arg(0);
        const double den = arg(1);
        if (den == 0.0) {
            const std::string sub = to_string(n, var);
            throw EvalError("division by zero in '" + sub + "'", sub);
        }
        return num / den;
    }
    case Op::pow: {
        const double base = arg(0);
        if (n.exponent < 0 && base == 0.0) {
            const std::string sub = to_string(n, var);
            throw EvalError("division by zero in '" + sub + "'", sub);
        }
        double acc = 1.0;
        double b = n.exponent < 0 ? 1.0 / base : base;
        for (unsigned e = static_cast<unsigned>(std::abs(n.exponent)); e; e >>= 1) {
            if (e & 1u) acc *= b;
            b *= b;
        }
        return acc;
    }
    case Op::sin: return std::sin(arg(0));
    case Op::cos: return std::cos(arg(0));
    case Op::tanh: return std::tanh(arg(0));
    case Op::exp: return std::exp(arg(0));
    case Op::abs: return std::abs(arg(0));
    case Op::sign: return sign_of(arg(0));
    case Op::min: return std::min(arg(0), arg(1));
    case Op::max: return std::max(arg(0), arg(1));
    case Op::clamp: {
        const double x = arg(0);
        return std::min(std::max(x, arg(1)), arg(2));
    }
    }
    return 0.0;
}

bool is_literal(const NodePtr& n, double value)
{
    return n->op == Op::literal && n->value == value;
}

// ---------------------------------------------------------------------------
// Differentiation

NodePtr lit(double v) { return make_literal(v); }
NodePtr add(NodePtr a, NodePtr b) { return make_binary(Op::add, std::move(a), std::move(b)); }
NodePtr sub(NodePtr a, NodePtr b) { return make_binary(Op::sub, std::move(a), std::move(b)); }
NodePtr mul(NodePtr a, NodePtr b) { return make_binary(Op::mul, std::move(a), std::move(b)); }
NodePtr div(NodePtr a, NodePtr b) { return make_binary(Op::div, std::move(a), std::move(b)); }
NodePtr call(Op op, NodePtr a) { return make_call(op, {std::move(a)}); }

NodePtr derive(const NodePtr& n)
{
    const auto& a = n->args;
    switch (n->op) {
    case Op::literal: return lit(0.0);
    case Op::variable: return lit(1.0);
    case Op::neg: return make_unary(Op::neg, derive(a[0]));
    case Op::add: return add(derive(a[0]), derive(a[1]));
    case Op::sub: return sub(derive(a[0]), derive(a[1]));
    case Op::mul: return add(mul(derive(a[0]), a[1]), mul(a[0], derive(a[1])));
    case Op::div:
        return div(sub(mul(derive(a[0]), a[1]), mul(a[0], derive(a[1]))), make_pow(a[1], 2));
    case Op::pow:
        if (n->exponent == 0) return lit(0.0);
        return mul(mul(lit(n->exponent), make_pow(a[0], n->exponent - 1)), derive(a[0]));
    case Op::sin: return mul(call(Op::cos, a[0]), derive(a[0]));
    case Op::cos: return mul(make_unary(Op::neg, call(Op::sin, a[0])), derive(a[0]));
    case Op::tanh: return mul(sub(lit(1.0), make_pow(n, 2)), derive(a[0]));
    case Op::exp: return mul(n, derive(a[0]));
    case Op::abs: return mul(call(Op::sign, a[0]), derive(a[0]));
    case Op::sign: return lit(0.0);
    case Op::min:
    case Op::max: {
        // min(f, g) = (f + g - |f - g|) / 2, max(f, g) = (f + g + |f - g|) / 2
        const NodePtr df = derive(a[0]);
        const NodePtr dg = derive(a[1]);
        const NodePtr jump = mul(call(Op::sign, sub(a[0], a[1])), sub(df, dg));
        const NodePtr sum = add(df, dg);
        return div(n->op == Op::min ? sub(sum, jump) : add(sum, jump), lit(2.0));
    }
    case Op::clamp: {
        const NodePtr inner = make_call(Op::max, {a[0], a[1]});
        return derive(make_call(Op::min, {inner, a[2]}));
    }
    }
    return lit(0.0);
}

bool nonsmooth(const Node& n)
{
    switch (n.op) {
    case Op::abs:
    case Op::sign:
    case Op::min:
    case Op::max:
    case Op::clamp: return true;
    default: break;
    }
    return std::any_of(n.args.begin(), n.args.end(), [](const NodePtr& c) { return nonsmooth(*c); });
}

} // namespace

// ---------------------------------------------------------------------------

Expr::Expr(NodePtr root, std::string variable)
    : root_(std::move(root)), variable_(std::move(variable))
{
}

double Expr::operator()(double v) const { return eval_node(*root_, v, variable_); }

ParseError::ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
    : ConfigError(std::move(message)), offset_(offset), expected_(std::move(expected))
{
}

UnknownIdentifierError::UnknownIdentifierError(std::string identifier, std::size_t offset)
    : ParseError("unknown identifier '" + identifier + "' at offset " + std::to_string(offset),
                 offset, {"variable", "function name"}),
      identifier_(std::move(identifier))
{
}

EvalError::EvalError(const std::string& message, std::string subexpression)
    : NumericalError(message), subexpression_(std::move(subexpression))
{
}

NodePtr make_literal(double value)
{
    auto n = std::make_shared<Node>();
    n->op = Op::literal;
    n->value = value;
    return n;
}

NodePtr make_variable()
{
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    return n;
}

NodePtr make_unary(Op op, NodePtr arg)
{
    if (op == Op::neg && arg->op == Op::literal) return make_literal(-arg->value);
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = {std::move(arg)};
    return n;
}

NodePtr make_binary(Op op, NodePtr lhs, NodePtr rhs)
{
    if (lhs->op == Op::literal && rhs->op == Op::literal && !(op == Op::div && rhs->value == 0.0)) {
        Node tmp;
        tmp.op = op;
        tmp.args = {lhs, rhs};
        return make_literal(eval_node(tmp, 0.0, "x"));
    }
    switch (op) {
    case Op::add:
        if (is_literal(lhs, 0.0)) return rhs;
        if (is_literal(rhs, 0.0)) return lhs;
        break;
    case Op::sub:
        if (is_literal(rhs, 0.0)) return lhs;
        if (is_literal(lhs, 0.0)) return make_unary(Op::neg, std::move(rhs));
        break;
    case Op::mul:
        if (is_literal(lhs, 0.0) || is_literal(rhs, 0.0)) return make_literal(0.0);
        if (is_literal(lhs, 1.0)) return rhs;
        if (is_literal(rhs, 1.0)) return lhs;
        break;
    case Op::div:
        if (is_literal(rhs, 1.0)) return lhs;
        break;
    default: break;
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = {std::move(lhs), std::move(rhs)};
    return n;
}

NodePtr make_pow(NodePtr base, int exponent)
{
    if (exponent == 0) return make_literal(1.0);
    if (exponent == 1) return base;
    auto n = std::make_shared<Node>();
    n->op = Op::pow;
    n->exponent = exponent;
    n->args = {std::move(base)};
    if (n->args[0]->op == Op::literal && !(exponent < 0 && n->args[0]->value == 0.0))
        return make_literal(eval_node(*n, 0.0, "x"));
    return n;
}

NodePtr make_call(Op op, std::vector<NodePtr> args)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    if (std::all_of(n->args.begin(), n->args.end(),
                    [](const NodePtr& c) { return c->op == Op::literal; }))
        return make_literal(eval_node(*n, 0.0, "x"));
    return n;
}

Expr parse(std::string_view source, std::string_view variable)
{
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError("empty expression", 0, {"number", "identifier", "(", "-"});
    if (variable.empty() || find_function(variable))
        throw ConfigError("invalid variable name '" + std::string(variable) + "'");
    Parser p(source, variable);
    return Expr(p.parse_all(), std::string(variable));
}

double eval(const Expr& e, double v) { return e(v); }

double eval(const Node& node, double v, std::string_view variable)
{
    return eval_node(node, v, variable);
}

Expr differentiate(const Expr& e) { return Expr(derive(e.root_ptr()), e.variable()); }

std::string to_string(const Expr& e) { return to_string(e.root(), e.variable()); }

std::string to_string(const Node& node, std::string_view variable)
{
    std::string out;
    print(node, variable, out);
    return out;
}

bool structurally_equal(const Node& a, const Node& b)
{
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    if (a.op == Op::literal && !(a.value == b.value && std::signbit(a.value) == std::signbit(b.value)))
        return false;
    if (a.op == Op::pow && a.exponent != b.exponent) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

std::string_view op_name(Op op)
{
    switch (op) {
    case Op::literal: return "literal";
    case Op::variable: return "variable";
    case Op::neg: return "neg";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::pow: return "pow";
    default: return find_function(op)->name;
    }
}

std::size_t node_count(const Node& node)
{
    std::size_t n = 1;
    for (const auto& c : node.args) n += node_count(*c);
    return n;
}

bool uses_nonsmooth_primitive(const Node& node) { return nonsmooth(node); }

// ---------------------------------------------------------------------------

FunctionSpec::FunctionSpec(std::string source, std::string variable,
                           std::optional<double> declared_lipschitz)
    : source_(std::move(source)),
      expr_(parse(source_, variable)),
      derivative_(differentiate(expr_)),
      declared_lipschitz_(declared_lipschitz)
{
    if (declared_lipschitz_ && !(*declared_lipschitz_ > 0.0))
        throw ConfigError("declared Lipschitz bound must be positive");
}

std::vector<std::string> FunctionSpec::check_lipschitz(double lo, double hi,
                                                       std::size_t samples) const
{
    std::vector<std::string> warnings;
    if (!declared_lipschitz_) return warnings;
    const double bound = *declared_lipschitz_;
    samples = std::max<std::size_t>(samples, 2);

    double slope = 0.0;
    double prev = expr_(lo);
    for (std::size_t i = 1; i < samples; ++i) {
        const double a = lo + (hi - lo) * static_cast<double>(i - 1) / static_cast<double>(samples - 1);
        const double b = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double cur = expr_(b);
        if (b > a) slope = std::max(slope, std::abs(cur - prev) / (b - a));
        prev = cur;
    }
    const double at_zero = std::abs(expr_(0.0));
    if (at_zero + slope > bound * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "function '" << source_ << "': sampled |f(0)| + Lip = " << at_zero + slope
            << " on [" << lo << ", " << hi << "] exceeds declared bound " << bound;
        warnings.push_back(msg.str());
    }
    return warnings;
}

} // namespace rfsde::dsl
