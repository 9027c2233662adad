#pragma once

// Scalar expression language used for every tensor component: metric entries,
// affinor entries, embeddings and user frames.
//
// Grammar (whitespace insensitive, no implicit multiplication):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | var | func '(' expr ')' | '(' expr ')'
//   var     := <letter><index>               e.g. x1..xm or u1..un
//   func    := sin cos tan exp log sqrt sinh cosh
//
// Expressions are immutable once parsed and can be shared across threads.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace affinor {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::string message, std::vector<std::string> expected = {})
        : std::runtime_error(compose(offset, message, expected)), offset_(offset),
          message_(std::move(message)), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& message() const noexcept { return message_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string compose(std::size_t offset, const std::string& message,
                               const std::vector<std::string>& expected) {
        std::string out = "parse error at offset " + std::to_string(offset) + ": " + message;
        if (!expected.empty()) {
            out += " (expected one of:";
            for (const auto& e : expected) out += " " + e;
            out += ")";
        }
        return out;
    }

    std::size_t offset_;
    std::string message_;
    std::vector<std::string> expected_;
};

/// Raised when evaluation leaves the domain of an operator. `subexpression`
/// is the printed form of the offending node.
class DomainError : public std::runtime_error {
public:
    DomainError(std::string what, std::string subexpression)
        : std::runtime_error(what + " in '" + subexpression + "'"),
          subexpression_(std::move(subexpression)) {}

    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

/// Shortest decimal that parses back to the same double.
inline std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

enum class Func { sin, cos, tan, exp, log, sqrt, sinh, cosh };

inline constexpr std::array<std::pair<std::string_view, Func>, 8> kFunctions{{
    {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan},   {"exp", Func::exp},
    {"log", Func::log},   {"sqrt", Func::sqrt}, {"sinh", Func::sinh}, {"cosh", Func::cosh},
}};

inline std::string_view func_name(Func f) {
    for (const auto& [name, fn] : kFunctions)
        if (fn == f) return name;
    return "?";
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };

    Kind kind = Kind::number;
    double value = 0.0;     // number literal
    std::size_t index = 0;  // variable, zero based
    Func func = Func::sin;  // call
    NodePtr lhs;            // operand of unary/call, left operand of binary
    NodePtr rhs;
    // Set on pow nodes whose exponent contains no variables.
    bool constant_exponent = false;
    double exponent = 0.0;
};

namespace detail {

inline bool has_variables(const Node& n) {
    if (n.kind == Node::Kind::variable) return true;
    if (n.lhs && has_variables(*n.lhs)) return true;
    if (n.rhs && has_variables(*n.rhs)) return true;
    return false;
}

double eval_node(const Node& n, std::span<const double> point, char var);

inline NodePtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::number;
    n->value = v;
    return n;
}

inline NodePtr make_variable(std::size_t index) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::variable;
    n->index = index;
    return n;
}

inline NodePtr make_unary(Node::Kind kind, NodePtr operand, Func f = Func::sin) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->func = f;
    n->lhs = std::move(operand);
    return n;
}

inline NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    if (kind == Node::Kind::pow && !has_variables(*n->rhs)) {
        n->constant_exponent = true;
        n->exponent = eval_node(*n->rhs, {}, 'x');
    }
    return n;
}

inline void print_node(const Node& n, char var, std::string& out) {
    using K = Node::Kind;
    auto binary = [&](const char* op) {
        out += '(';
        print_node(*n.lhs, var, out);
        out += op;
        print_node(*n.rhs, var, out);
        out += ')';
    };
    switch (n.kind) {
    case K::number: out += format_real(n.value); break;
    case K::variable:
        out += var;
        out += std::to_string(n.index + 1);
        break;
    case K::negate:
        out += "(-";
        print_node(*n.lhs, var, out);
        out += ')';
        break;
    case K::add: binary(" + "); break;
    case K::sub: binary(" - "); break;
    case K::mul: binary(" * "); break;
    case K::div: binary(" / "); break;
    case K::pow: binary("^"); break;
    case K::call:
        out += func_name(n.func);
        out += '(';
        print_node(*n.lhs, var, out);
        out += ')';
        break;
    }
}

inline std::string print_node(const Node& n, char var) {
    std::string out;
    print_node(n, var, out);
    return out;
}

inline bool is_integer_exponent(double e) {
    return std::isfinite(e) && e == std::round(e) && std::abs(e) <= 1024.0;
}

template <class T, class Mul>
T integer_power(T base, long long n, Mul mul, T one) {
    T result = one;
    while (n > 0) {
        if (n & 1) result = mul(result, base);
        n >>= 1;
        if (n > 0) base = mul(base, base);
    }
    return result;
}

inline double eval_node(const Node& n, std::span<const double> point, char var) {
    using K = Node::Kind;
    auto fail = [&](const std::string& what) -> double {
        throw DomainError(what, print_node(n, var));
    };
    switch (n.kind) {
    case K::number: return n.value;
    case K::variable: return point[n.index];
    case K::negate: return -eval_node(*n.lhs, point, var);
    case K::add: return eval_node(*n.lhs, point, var) + eval_node(*n.rhs, point, var);
    case K::sub: return eval_node(*n.lhs, point, var) - eval_node(*n.rhs, point, var);
    case K::mul: return eval_node(*n.lhs, point, var) * eval_node(*n.rhs, point, var);
    case K::div: {
        double a = eval_node(*n.lhs, point, var);
        double b = eval_node(*n.rhs, point, var);
        if (b == 0.0) return fail("division by zero");
        return a / b;
    }
    case K::pow: {
        double a = eval_node(*n.lhs, point, var);
        double e = n.constant_exponent ? n.exponent : eval_node(*n.rhs, point, var);
        if (n.constant_exponent && is_integer_exponent(e)) {
            auto k = static_cast<long long>(std::abs(e));
            double r = integer_power(a, k, [](double x, double y) { return x * y; }, 1.0);
            if (e < 0) {
                if (r == 0.0) return fail("division by zero");
                r = 1.0 / r;
            }
            if (!std::isfinite(r)) return fail("non-finite power");
            return r;
        }
        if (!(a > 0.0)) return fail("non-integer exponent requires a positive base");
        return std::exp(e * std::log(a));
    }
    case K::call: {
        double a = eval_node(*n.lhs, point, var);
        double r = 0.0;
        switch (n.func) {
        case Func::sin: r = std::sin(a); break;
        case Func::cos: r = std::cos(a); break;
        case Func::tan:
            if (std::cos(a) == 0.0) return fail("tan pole");
            r = std::tan(a);
            break;
        case Func::exp: r = std::exp(a); break;
        case Func::log:
            if (!(a > 0.0)) return fail("log of nonpositive value");
            r = std::log(a);
            break;
        case Func::sqrt:
            if (a < 0.0) return fail("sqrt of negative value");
            r = std::sqrt(a);
            break;
        case Func::sinh: r = std::sinh(a); break;
        case Func::cosh: r = std::cosh(a); break;
        }
        if (!std::isfinite(r)) return fail("non-finite result");
        return r;
    }
    }
    return 0.0;
}

class Parser {
public:
    Parser(std::string_view src, std::size_t arity, char var) : src_(src), arity_(arity), var_(var) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "empty expression", operand_tokens());
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError(pos_, "unexpected '" + token_text() + "'",
                             {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
        return e;
    }

private:
    static std::vector<std::string> operand_tokens() {
        return {"number", "variable", "function", "'('", "'-'"};
    }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                      src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string token_text() const {
        if (pos_ >= src_.size()) return "end of input";
        std::size_t end = pos_;
        if (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '.') {
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '.'))
                ++end;
        } else {
            ++end;
        }
        return std::string(src_.substr(pos_, end - pos_));
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+'))
                lhs = make_binary(Node::Kind::add, lhs, parse_term());
            else if (accept('-'))
                lhs = make_binary(Node::Kind::sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = make_binary(Node::Kind::mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = make_binary(Node::Kind::div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_unary(Node::Kind::negate, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_binary(Node::Kind::pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input", operand_tokens());
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            expect_close();
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw ParseError(pos_, "unexpected '" + token_text() + "'", operand_tokens());
    }

    void expect_close() {
        if (!accept(')')) {
            skip_ws();
            throw ParseError(pos_, "unexpected '" + token_text() + "'", {"')'"});
        }
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        std::size_t end = pos_;
        while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.'))
            ++end;
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t k = end + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
                end = k;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + end, v);
        if (ec != std::errc{} || ptr != src_.data() + end)
            throw ParseError(start, "malformed number '" + std::string(src_.substr(start, end - start)) + "'");
        pos_ = end;
        return make_number(v);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        std::size_t end = pos_;
        while (end < src_.size() && std::isalnum(static_cast<unsigned char>(src_[end]))) ++end;
        const std::string_view ident = src_.substr(start, end - start);
        pos_ = end;

        for (const auto& [name, fn] : kFunctions) {
            if (ident == name) {
                if (!accept('(')) {
                    skip_ws();
                    throw ParseError(pos_, "unexpected '" + token_text() + "'", {"'('"});
                }
                NodePtr arg = parse_expr();
                expect_close();
                return make_unary(Node::Kind::call, arg, fn);
            }
        }

        if (ident.size() >= 2 && ident[0] == var_) {
            std::size_t index = 0;
            auto digits = ident.substr(1);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
            if (ec == std::errc{} && ptr == digits.data() + digits.size() && digits[0] != '0') {
                if (index > arity_)
                    throw ParseError(start, "variable " + std::string(ident) + " exceeds arity " +
                                                std::to_string(arity_));
                return make_variable(index - 1);
            }
        }
        throw ParseError(start, "unknown identifier '" + std::string(ident) + "'", operand_tokens());
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t arity_;
    char var_;
};

}  // namespace detail

/// A parsed scalar expression in `arity` variables named <var>1..<var>arity.
class Expression {
public:
    Expression() : Expression(detail::make_number(0.0), 0, 'x') {}

    Expression(NodePtr root, std::size_t arity, char var) : root_(std::move(root)), arity_(arity), var_(var) {}

    static Expression constant(double v, std::size_t arity = 0, char var = 'x') {
        return Expression(detail::make_number(v), arity, var);
    }

    const Node& root() const { return *root_; }
    std::size_t arity() const { return arity_; }
    char variable_letter() const { return var_; }

    bool is_constant() const { return !detail::has_variables(*root_); }

    std::string to_string() const { return detail::print_node(*root_, var_); }

private:
    NodePtr root_;
    std::size_t arity_;
    char var_;
};

inline Expression parse(std::string_view source, std::size_t arity, char var = 'x') {
    detail::Parser p(source, arity, var);
    return Expression(p.parse(), arity, var);
}

inline std::string print(const Expression& e) { return e.to_string(); }

inline double evaluate(const Expression& e, std::span<const double> point) {
    if (point.size() != e.arity())
        throw std::invalid_argument("point has " + std::to_string(point.size()) + " coordinates, expression arity is " +
                                    std::to_string(e.arity()));
    return detail::eval_node(e.root(), point, e.variable_letter());
}

inline double evaluate(const Expression& e, const Eigen::VectorXd& point) {
    return evaluate(e, std::span<const double>(point.data(), static_cast<std::size_t>(point.size())));
}

/// Value with gradient and (optionally) Hessian in `k` active directions.
/// The Hessian is stored as its packed upper triangle.
struct Jet2 {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::VectorXd hessian_packed;  // empty when order == 1
    int order = 1;

    Jet2() = default;
    Jet2(double v, Eigen::Index k, int ord)
        : value(v), gradient(Eigen::VectorXd::Zero(k)),
          hessian_packed(ord >= 2 ? Eigen::VectorXd::Zero(k * (k + 1) / 2) : Eigen::VectorXd()), order(ord) {}

    Eigen::Index dim() const { return gradient.size(); }

    static Eigen::Index packed_index(Eigen::Index k, Eigen::Index i, Eigen::Index j) {
        if (i > j) std::swap(i, j);
        return i * k - i * (i - 1) / 2 + (j - i);
    }

    double hessian(Eigen::Index i, Eigen::Index j) const {
        return order >= 2 ? hessian_packed[packed_index(dim(), i, j)] : 0.0;
    }

    Eigen::MatrixXd hessian_matrix() const {
        const auto k = dim();
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
        if (order < 2) return h;
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = i; j < k; ++j) h(i, j) = h(j, i) = hessian(i, j);
        return h;
    }
};

namespace detail {

inline void add_outer(Eigen::VectorXd& packed, double s, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const auto k = a.size();
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j, ++idx) packed[idx] += s * (a[i] * b[j] + a[j] * b[i]);
}

// f(a) given f, f', f'' at a.value.
inline Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
    Jet2 r = a;
    r.value = f0;
    r.gradient = f1 * a.gradient;
    if (a.order >= 2) {
        r.hessian_packed = f1 * a.hessian_packed;
        add_outer(r.hessian_packed, 0.5 * f2, a.gradient, a.gradient);
    }
    return r;
}

inline Jet2 jet_add(const Jet2& a, const Jet2& b, double sign) {
    Jet2 r = a;
    r.value = a.value + sign * b.value;
    r.gradient += sign * b.gradient;
    if (a.order >= 2) r.hessian_packed += sign * b.hessian_packed;
    return r;
}

inline Jet2 jet_mul(const Jet2& a, const Jet2& b) {
    Jet2 r = a;
    r.value = a.value * b.value;
    r.gradient = a.gradient * b.value + b.gradient * a.value;
    if (a.order >= 2) {
        r.hessian_packed = a.hessian_packed * b.value + b.hessian_packed * a.value;
        add_outer(r.hessian_packed, 1.0, a.gradient, b.gradient);
    }
    return r;
}

inline Jet2 eval_jet(const Node& n, std::span<const double> point, int order, char var) {
    using K = Node::Kind;
    const auto k = static_cast<Eigen::Index>(point.size());
    auto fail = [&](const std::string& what) -> Jet2 { throw DomainError(what, print_node(n, var)); };
    switch (n.kind) {
    case K::number: return Jet2(n.value, k, order);
    case K::variable: {
        Jet2 r(point[n.index], k, order);
        r.gradient[static_cast<Eigen::Index>(n.index)] = 1.0;
        return r;
    }
    case K::negate: {
        Jet2 r = eval_jet(*n.lhs, point, order, var);
        r.value = -r.value;
        r.gradient = -r.gradient;
        if (order >= 2) r.hessian_packed = -r.hessian_packed;
        return r;
    }
    case K::add: return jet_add(eval_jet(*n.lhs, point, order, var), eval_jet(*n.rhs, point, order, var), 1.0);
    case K::sub: return jet_add(eval_jet(*n.lhs, point, order, var), eval_jet(*n.rhs, point, order, var), -1.0);
    case K::mul: return jet_mul(eval_jet(*n.lhs, point, order, var), eval_jet(*n.rhs, point, order, var));
    case K::div: {
        Jet2 a = eval_jet(*n.lhs, point, order, var);
        Jet2 b = eval_jet(*n.rhs, point, order, var);
        if (b.value == 0.0) return fail("division by zero");
        const double v = b.value;
        return jet_mul(a, chain(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)));
    }
    case K::pow: {
        Jet2 a = eval_jet(*n.lhs, point, order, var);
        if (n.constant_exponent && is_integer_exponent(n.exponent)) {
            auto e = static_cast<long long>(std::abs(n.exponent));
            Jet2 r = integer_power(a, e, [](const Jet2& x, const Jet2& y) { return jet_mul(x, y); },
                                   Jet2(1.0, k, order));
            if (n.exponent < 0) {
                if (r.value == 0.0) return fail("division by zero");
                const double v = r.value;
                r = chain(r, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
            }
            if (!std::isfinite(r.value)) return fail("non-finite power");
            return r;
        }
        if (!(a.value > 0.0)) return fail("non-integer exponent requires a positive base");
        if (n.constant_exponent) {
            const double c = n.exponent;
            const double v = a.value;
            return chain(a, std::pow(v, c), c * std::pow(v, c - 1.0), c * (c - 1.0) * std::pow(v, c - 2.0));
        }
        // a^b = exp(b log a)
        Jet2 b = eval_jet(*n.rhs, point, order, var);
        Jet2 loga = chain(a, std::log(a.value), 1.0 / a.value, -1.0 / (a.value * a.value));
        Jet2 prod = jet_mul(b, loga);
        const double ev = std::exp(prod.value);
        return chain(prod, ev, ev, ev);
    }
    case K::call: {
        Jet2 a = eval_jet(*n.lhs, point, order, var);
        const double x = a.value;
        Jet2 r;
        switch (n.func) {
        case Func::sin: r = chain(a, std::sin(x), std::cos(x), -std::sin(x)); break;
        case Func::cos: r = chain(a, std::cos(x), -std::sin(x), -std::cos(x)); break;
        case Func::tan: {
            const double c = std::cos(x);
            if (c == 0.0) return fail("tan pole");
            const double t = std::tan(x);
            const double sec2 = 1.0 + t * t;
            r = chain(a, t, sec2, 2.0 * t * sec2);
            break;
        }
        case Func::exp: {
            const double e = std::exp(x);
            r = chain(a, e, e, e);
            break;
        }
        case Func::log:
            if (!(x > 0.0)) return fail("log of nonpositive value");
            r = chain(a, std::log(x), 1.0 / x, -1.0 / (x * x));
            break;
        case Func::sqrt: {
            if (x < 0.0) return fail("sqrt of negative value");
            if (x == 0.0) return fail("sqrt is not differentiable at 0");
            const double s = std::sqrt(x);
            r = chain(a, s, 0.5 / s, -0.25 / (s * x));
            break;
        }
        case Func::sinh: r = chain(a, std::sinh(x), std::cosh(x), std::sinh(x)); break;
        case Func::cosh: r = chain(a, std::cosh(x), std::sinh(x), std::cosh(x)); break;
        }
        if (!std::isfinite(r.value)) return fail("non-finite result");
        return r;
    }
    }
    return Jet2(0.0, k, order);
}

}  // namespace detail

/// Forward-mode value, gradient and (order 2) Hessian with respect to every
/// variable of `e`.
inline Jet2 evaluate_jet(const Expression& e, std::span<const double> point, int order) {
    if (order != 1 && order != 2) throw std::invalid_argument("jet order must be 1 or 2");
    if (point.size() != e.arity())
        throw std::invalid_argument("point has " + std::to_string(point.size()) + " coordinates, expression arity is " +
                                    std::to_string(e.arity()));
    return detail::eval_jet(e.root(), point, order, e.variable_letter());
}

inline Jet2 evaluate_jet(const Expression& e, const Eigen::VectorXd& point, int order) {
    return evaluate_jet(e, std::span<const double>(point.data(), static_cast<std::size_t>(point.size())), order);
}

}  // namespace affinor
