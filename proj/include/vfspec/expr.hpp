#pragma once

// Expression trees over named coordinates with plain and dual-number
// evaluation. The accepted grammar is fixed:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := atom ('^' factor)?
//   atom   := number | ident | ident '(' expr (',' expr)* ')'
//           | '(' expr ')' | '-' atom
//
// '^' is right-associative and, per the atom rule, a leading '-' binds
// tighter than '^': "-3^2" evaluates to 9. Coordinates are x, y, z for
// dimensions up to three and x1..xn in general; "pi" is a constant.
// Supported calls: sin, cos, tan, exp, log, sqrt, atan, atan2, abs, pow.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfspec/error.hpp"
#include "vfspec/util.hpp"

namespace vfspec {

/// First-order dual number: a value together with its partial derivatives
/// with respect to each coordinate. `abs_kink` records that abs() was
/// evaluated exactly at zero, where the reported derivative (zero) is a
/// convention rather than a limit.
struct DualValue {
    double value = 0.0;
    Vec partials;
    bool abs_kink = false;
};

namespace detail {

enum class Op { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Atan, Atan2, Abs };

struct FuncInfo {
    std::string_view name;
    Func func;
    std::size_t arity;
};

inline constexpr std::array<FuncInfo, 9> kFuncs{{
    {"sin", Func::Sin, 1},
    {"cos", Func::Cos, 1},
    {"tan", Func::Tan, 1},
    {"exp", Func::Exp, 1},
    {"log", Func::Log, 1},
    {"sqrt", Func::Sqrt, 1},
    {"atan", Func::Atan, 1},
    {"atan2", Func::Atan2, 2},
    {"abs", Func::Abs, 1},
}};

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    std::array<char, 40> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

}  // namespace detail

/// Immutable expression handle. Copies share subtrees.
class Expr {
public:
    Expr() = default;

    bool valid() const { return node_ != nullptr; }

    static Expr constant(double v) {
        Node n;
        n.op = detail::Op::Constant;
        n.value = v;
        return Expr(std::move(n));
    }

    /// Coordinate with 0-based `index`; `dim` selects the printed name
    /// (x, y, z below dimension four, x1..xn otherwise).
    static Expr variable(std::size_t index, std::size_t dim) {
        Node n;
        n.op = detail::Op::Variable;
        n.index = index;
        if (dim <= 3 && index < 3) {
            n.name = std::array<const char*, 3>{"x", "y", "z"}[index];
        } else {
            n.name = "x" + std::to_string(index + 1);
        }
        return Expr(std::move(n));
    }

    static Expr add(Expr a, Expr b) { return binary(detail::Op::Add, std::move(a), std::move(b)); }
    static Expr sub(Expr a, Expr b) { return binary(detail::Op::Sub, std::move(a), std::move(b)); }
    static Expr mul(Expr a, Expr b) { return binary(detail::Op::Mul, std::move(a), std::move(b)); }
    static Expr div(Expr a, Expr b) { return binary(detail::Op::Div, std::move(a), std::move(b)); }
    static Expr pow(Expr a, Expr b) { return binary(detail::Op::Pow, std::move(a), std::move(b)); }

    /// Folds negation of constants and double negation, so negative literals
    /// stay single Constant nodes.
    static Expr negate(Expr a) {
        if (a.node_->op == detail::Op::Constant) return constant(-a.node_->value);
        if (a.node_->op == detail::Op::Neg) return a.node_->args[0];
        Node n;
        n.op = detail::Op::Neg;
        n.args.push_back(std::move(a));
        return Expr(std::move(n));
    }

    static Expr call(detail::Func f, std::vector<Expr> args) {
        Node n;
        n.op = detail::Op::Call;
        n.func = f;
        n.args = std::move(args);
        return Expr(std::move(n));
    }

    double eval(std::span<const double> point) const {
        require_valid();
        return eval_node(*node_, point);
    }

    DualValue eval_dual(std::span<const double> point) const {
        require_valid();
        return eval_dual_node(*node_, point);
    }

    std::string print() const {
        require_valid();
        return print_node(*node_, 0);
    }

private:
    struct Node {
        detail::Op op{};
        double value = 0.0;        // Constant
        std::size_t index = 0;     // Variable
        std::string name;          // Variable
        detail::Func func{};       // Call
        std::vector<Expr> args;
    };

    explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

    static Expr binary(detail::Op op, Expr a, Expr b) {
        Node n;
        n.op = op;
        n.args.push_back(std::move(a));
        n.args.push_back(std::move(b));
        return Expr(std::move(n));
    }

    void require_valid() const {
        if (!node_) throw InvalidArgument("empty expression");
    }

    [[noreturn]] static void fail(const std::string& what, const Node& node) {
        throw EvalError(what, print_node(node, 0));
    }

    static double child(const Node& n, std::size_t i, std::span<const double> p) {
        return eval_node(*n.args[i].node_, p);
    }

    static double eval_node(const Node& n, std::span<const double> p) {
        using detail::Op;
        switch (n.op) {
            case Op::Constant: return n.value;
            case Op::Variable:
                if (n.index >= p.size()) fail("coordinate index out of range", n);
                return p[n.index];
            case Op::Add: return child(n, 0, p) + child(n, 1, p);
            case Op::Sub: return child(n, 0, p) - child(n, 1, p);
            case Op::Mul: return child(n, 0, p) * child(n, 1, p);
            case Op::Div: {
                const double u = child(n, 0, p), v = child(n, 1, p);
                if (v == 0.0) fail("division by zero", n);
                return u / v;
            }
            case Op::Pow: return eval_pow(n, child(n, 0, p), child(n, 1, p));
            case Op::Neg: return -child(n, 0, p);
            case Op::Call: return eval_call(n, p);
        }
        fail("corrupt expression node", n);
    }

    static double eval_pow(const Node& n, double base, double expo) {
        if (expo == std::rint(expo) && std::abs(expo) < 1e9) {
            if (base == 0.0 && expo <= 0.0) fail("zero raised to a non-positive power", n);
            return std::pow(base, expo);
        }
        if (base < 0.0) fail("negative base with non-integer exponent", n);
        if (base == 0.0 && expo <= 0.0) fail("zero raised to a non-positive power", n);
        return std::pow(base, expo);
    }

    static double eval_call(const Node& n, std::span<const double> p) {
        using detail::Func;
        const double u = child(n, 0, p);
        switch (n.func) {
            case Func::Sin: return std::sin(u);
            case Func::Cos: return std::cos(u);
            case Func::Tan: return std::tan(u);
            case Func::Exp: return std::exp(u);
            case Func::Log:
                if (u <= 0.0) fail("log of a non-positive value", n);
                return std::log(u);
            case Func::Sqrt:
                if (u < 0.0) fail("sqrt of a negative value", n);
                return std::sqrt(u);
            case Func::Atan: return std::atan(u);
            case Func::Abs: return std::abs(u);
            case Func::Atan2: {
                const double v = child(n, 1, p);
                if (u == 0.0 && v == 0.0) fail("atan2 at the origin", n);
                return std::atan2(u, v);
            }
        }
        fail("corrupt call node", n);
    }

    static DualValue dual_child(const Node& n, std::size_t i, std::span<const double> p) {
        return eval_dual_node(*n.args[i].node_, p);
    }

    /// result.value = f(a.value), result.partials = scale * a.partials.
    static DualValue chain(double value, double scale, DualValue a) {
        DualValue r;
        r.value = value;
        r.partials = std::move(a.partials);
        for (double& d : r.partials) d *= scale;
        r.abs_kink = a.abs_kink;
        return r;
    }

    static DualValue eval_dual_node(const Node& n, std::span<const double> p) {
        using detail::Op;
        const std::size_t dim = p.size();
        switch (n.op) {
            case Op::Constant: {
                DualValue r;
                r.value = n.value;
                r.partials.resize(dim);
                return r;
            }
            case Op::Variable: {
                if (n.index >= dim) fail("coordinate index out of range", n);
                DualValue r;
                r.value = p[n.index];
                r.partials.resize(dim);
                r.partials[n.index] = 1.0;
                return r;
            }
            case Op::Add:
            case Op::Sub: {
                DualValue a = dual_child(n, 0, p), b = dual_child(n, 1, p);
                const double s = n.op == Op::Add ? 1.0 : -1.0;
                a.value += s * b.value;
                for (std::size_t i = 0; i < dim; ++i) a.partials[i] += s * b.partials[i];
                a.abs_kink = a.abs_kink || b.abs_kink;
                return a;
            }
            case Op::Mul: {
                const DualValue a = dual_child(n, 0, p), b = dual_child(n, 1, p);
                DualValue r;
                r.value = a.value * b.value;
                r.partials.resize(dim);
                for (std::size_t i = 0; i < dim; ++i)
                    r.partials[i] = a.partials[i] * b.value + a.value * b.partials[i];
                r.abs_kink = a.abs_kink || b.abs_kink;
                return r;
            }
            case Op::Div: {
                const DualValue a = dual_child(n, 0, p), b = dual_child(n, 1, p);
                if (b.value == 0.0) fail("division by zero", n);
                DualValue r;
                r.value = a.value / b.value;
                r.partials.resize(dim);
                // (a' - (a/b) b') / b keeps intermediates near the result's
                // scale; a'/b - a b'/b^2 can overflow or underflow first.
                for (std::size_t i = 0; i < dim; ++i)
                    r.partials[i] = (a.partials[i] - r.value * b.partials[i]) / b.value;
                r.abs_kink = a.abs_kink || b.abs_kink;
                return r;
            }
            case Op::Pow: return dual_pow(n, dual_child(n, 0, p), dual_child(n, 1, p));
            case Op::Neg: {
                DualValue a = dual_child(n, 0, p);
                a.value = -a.value;
                for (double& d : a.partials) d = -d;
                return a;
            }
            case Op::Call: return dual_call(n, p);
        }
        fail("corrupt expression node", n);
    }

    static DualValue dual_pow(const Node& n, DualValue a, DualValue b) {
        const bool const_expo =
            std::all_of(b.partials.begin(), b.partials.end(), [](double d) { return d == 0.0; });
        DualValue r;
        r.partials.resize(a.partials.size());
        r.abs_kink = a.abs_kink || b.abs_kink;
        if (const_expo && b.value == std::rint(b.value) && std::abs(b.value) < 1e9) {
            const double k = b.value;
            if (a.value == 0.0) {
                if (k <= 0.0) fail("zero raised to a non-positive power", n);
                r.value = 0.0;
                const double slope = k == 1.0 ? 1.0 : 0.0;
                for (std::size_t i = 0; i < r.partials.size(); ++i)
                    r.partials[i] = slope * a.partials[i];
                return r;
            }
            r.value = std::pow(a.value, k);
            const double scale = k * std::pow(a.value, k - 1.0);
            for (std::size_t i = 0; i < r.partials.size(); ++i)
                r.partials[i] = scale * a.partials[i];
            return r;
        }
        if (a.value <= 0.0) fail("non-integer power requires a positive base", n);
        r.value = std::pow(a.value, b.value);
        const double lg = std::log(a.value);
        for (std::size_t i = 0; i < r.partials.size(); ++i)
            r.partials[i] = r.value * (b.partials[i] * lg + b.value * a.partials[i] / a.value);
        return r;
    }

    static DualValue dual_call(const Node& n, std::span<const double> p) {
        using detail::Func;
        DualValue a = dual_child(n, 0, p);
        switch (n.func) {
            case Func::Sin: return chain(std::sin(a.value), std::cos(a.value), std::move(a));
            case Func::Cos: return chain(std::cos(a.value), -std::sin(a.value), std::move(a));
            case Func::Tan: {
                const double c = std::cos(a.value);
                if (c == 0.0) fail("tangent singularity", n);
                return chain(std::tan(a.value), 1.0 / (c * c), std::move(a));
            }
            case Func::Exp: {
                const double e = std::exp(a.value);
                return chain(e, e, std::move(a));
            }
            case Func::Log:
                if (a.value <= 0.0) fail("log of a non-positive value", n);
                return chain(std::log(a.value), 1.0 / a.value, std::move(a));
            case Func::Sqrt: {
                if (a.value < 0.0) fail("sqrt of a negative value", n);
                if (a.value == 0.0) {
                    for (double d : a.partials)
                        if (d != 0.0) fail("sqrt is not differentiable at zero", n);
                    return chain(0.0, 0.0, std::move(a));
                }
                const double s = std::sqrt(a.value);
                return chain(s, 0.5 / s, std::move(a));
            }
            case Func::Atan:
                return chain(std::atan(a.value), 1.0 / (1.0 + a.value * a.value), std::move(a));
            case Func::Abs: {
                if (a.value == 0.0) {
                    DualValue r = chain(0.0, 0.0, std::move(a));
                    r.abs_kink = true;
                    return r;
                }
                const double s = a.value > 0.0 ? 1.0 : -1.0;
                return chain(std::abs(a.value), s, std::move(a));
            }
            case Func::Atan2: {
                const DualValue b = dual_child(n, 1, p);
                if (a.value == 0.0 && b.value == 0.0) fail("atan2 at the origin", n);
                DualValue r;
                r.value = std::atan2(a.value, b.value);
                r.partials.resize(a.partials.size());
                const double denom = a.value * a.value + b.value * b.value;
                for (std::size_t i = 0; i < r.partials.size(); ++i)
                    r.partials[i] = (a.partials[i] * b.value - a.value * b.partials[i]) / denom;
                r.abs_kink = a.abs_kink || b.abs_kink;
                return r;
            }
        }
        fail("corrupt call node", n);
    }

    // Printing. Each grammar position requires a minimum precedence from its
    // operand; weaker operands get parentheses. Levels: 1 add/sub, 2 mul/div,
    // 3 pow, 4 atoms (including unary minus, which the grammar treats as an
    // atom). Parenthesization is strict enough that reparsing the output
    // rebuilds the identical tree, not merely an equivalent one.
    static int precedence(const Node& n) {
        using detail::Op;
        switch (n.op) {
            case Op::Add:
            case Op::Sub: return 1;
            case Op::Mul:
            case Op::Div: return 2;
            case Op::Pow: return 3;
            default: return 4;
        }
    }

    static std::string print_child(const Node& parent, std::size_t i, int required) {
        const Node& c = *parent.args[i].node_;
        std::string s = print_node(c, required);
        if (precedence(c) < required) return "(" + s + ")";
        return s;
    }

    static std::string print_node(const Node& n, int) {
        using detail::Op;
        switch (n.op) {
            case Op::Constant: return detail::format_double(n.value);
            case Op::Variable: return n.name;
            case Op::Add: return print_child(n, 0, 1) + " + " + print_child(n, 1, 2);
            case Op::Sub: return print_child(n, 0, 1) + " - " + print_child(n, 1, 2);
            case Op::Mul: return print_child(n, 0, 2) + " * " + print_child(n, 1, 3);
            case Op::Div: return print_child(n, 0, 2) + " / " + print_child(n, 1, 3);
            case Op::Pow: return print_child(n, 0, 4) + "^" + print_child(n, 1, 3);
            case Op::Neg: return "-" + print_child(n, 0, 4);
            case Op::Call: {
                std::string s;
                for (const auto& info : detail::kFuncs)
                    if (info.func == n.func) s = std::string(info.name);
                s += "(";
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    if (i) s += ", ";
                    s += print_node(*n.args[i].node_, 0);
                }
                return s + ")";
            }
        }
        return "?";
    }

    std::shared_ptr<const Node> node_;

    friend class ExprParser;
};

/// Recursive-descent parser for the grammar at the top of this header.
class ExprParser {
public:
    ExprParser(std::string_view src, std::size_t dim) : src_(src), dim_(dim) {
        if (dim == 0) throw InvalidArgument("dimension must be at least one");
    }

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected trailing characters", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr e = parse_term();
        while (true) {
            if (consume('+')) e = Expr::add(std::move(e), parse_term());
            else if (consume('-')) e = Expr::sub(std::move(e), parse_term());
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (true) {
            if (consume('*')) e = Expr::mul(std::move(e), parse_factor());
            else if (consume('/')) e = Expr::div(std::move(e), parse_factor());
            else return e;
        }
    }

    Expr parse_factor() {
        Expr base = parse_atom();
        if (consume('^')) return Expr::pow(std::move(base), parse_factor());
        return base;
    }

    Expr parse_atom() {
        const char c = peek();
        if (c == '\0') throw ParseError("unexpected end of expression", pos_);
        if (c == '-') {
            ++pos_;
            return Expr::negate(parse_atom());
        }
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        double v = 0.0;
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr == first)
            throw ParseError("malformed number", pos_);
        pos_ = static_cast<std::size_t>(res.ptr - src_.data());
        return Expr::constant(v);
    }

    Expr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);

        if (peek() == '(') {
            for (const auto& info : detail::kFuncs) {
                if (name == info.name) return parse_call(info, start);
            }
            if (name == "pow") return parse_pow_call(start);
            throw ParseError("unknown function '" + std::string(name) + "'", start);
        }

        if (name == "pi") return Expr::constant(kPi);
        if (auto idx = coordinate_index(name)) return Expr::variable(*idx, dim_);
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }

    std::optional<std::size_t> coordinate_index(std::string_view name) const {
        if (dim_ <= 3) {
            if (name == "x") return 0;
            if (name == "y" && dim_ >= 2) return 1;
            if (name == "z" && dim_ >= 3) return 2;
        }
        if (name.size() >= 2 && name[0] == 'x') {
            std::size_t k = 0;
            auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (res.ec == std::errc{} && res.ptr == name.data() + name.size() && k >= 1 &&
                k <= dim_)
                return k - 1;
        }
        return std::nullopt;
    }

    std::vector<Expr> parse_args(std::size_t arity, std::size_t at) {
        if (!consume('(')) throw ParseError("expected '('", pos_);
        std::vector<Expr> args;
        args.push_back(parse_expr());
        while (consume(',')) args.push_back(parse_expr());
        if (!consume(')')) throw ParseError("expected ')'", pos_);
        if (args.size() != arity)
            throw ParseError("wrong number of arguments (expected " + std::to_string(arity) +
                                 ", got " + std::to_string(args.size()) + ")",
                             at);
        return args;
    }

    Expr parse_call(const detail::FuncInfo& info, std::size_t at) {
        return Expr::call(info.func, parse_args(info.arity, at));
    }

    /// pow(a, b) is sugar for a^b; both print as '^'.
    Expr parse_pow_call(std::size_t at) {
        std::vector<Expr> args = parse_args(2, at);
        return Expr::pow(std::move(args[0]), std::move(args[1]));
    }

    std::string_view src_;
    std::size_t dim_;
    std::size_t pos_ = 0;
};

/// Parses a scalar expression in `dim` coordinates.
inline Expr parse_scalar(std::string_view text, std::size_t dim) {
    return ExprParser(text, dim).parse();
}

}  // namespace vfspec
