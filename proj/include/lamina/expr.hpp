#pragma once

// Infix expression parser and evaluator for surface functions f(x, y).
//
// Grammar (LL, whitespace insensitive):
//
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)?          -- right associative
//   atom    := number | 'x' | 'y' | 'pi'
//            | func '(' sum (',' sum)? ')'
//            | '(' sum ')'
//
// Precedence follows standard mathematical notation: '^' binds tighter than
// unary minus, so -x^2 means -(x^2) and (-x)^2 needs the parentheses; the
// exponent itself may carry a sign, so 2^-3 parses as 2^(-3). '*' and '/'
// bind tighter than '+' and '-', all four associate to the left.
//
// Functions: sqrt, exp, sin, cos, abs (one argument), max, min (exactly two).

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lamina/geometry.hpp"

namespace lamina::expr {

struct SyntaxError : Error {
    std::size_t offset;
    SyntaxError(std::size_t off, const std::string& what_arg)
        : Error("syntax error at offset " + std::to_string(off) + ": " + what_arg),
          offset(off) {}
};

struct UnknownIdentifierError : Error {
    std::size_t offset;
    std::string name;
    UnknownIdentifierError(std::size_t off, std::string ident)
        : Error("unknown identifier '" + ident + "' at offset " + std::to_string(off) +
                " (allowed: x, y, pi, sqrt, exp, sin, cos, abs, max, min)"),
          offset(off),
          name(std::move(ident)) {}
};

struct ArityError : Error {
    std::size_t offset;
    std::string name;
    ArityError(std::size_t off, std::string func, std::size_t expected, std::size_t got)
        : Error("function '" + func + "' takes " + std::to_string(expected) +
                " argument(s), got " + std::to_string(got) + " (offset " +
                std::to_string(off) + ")"),
          offset(off),
          name(std::move(func)) {}
};

struct DomainError : Error {
    double x;
    double y;
    DomainError(double px, double py)
        : Error("expression is not finite at (" + std::to_string(px) + ", " +
                std::to_string(py) + ")"),
          x(px),
          y(py) {}
};

enum class Func { Sqrt, Exp, Sin, Cos, Abs, Max, Min };

// Immutable after parse; value semantics, safe to share across threads.
struct Expression {
    enum class Kind { Number, VarX, VarY, Pi, Add, Sub, Mul, Div, Pow, Neg, Call };

    Kind kind = Kind::Number;
    double number = 0.0;
    Func func = Func::Sqrt;
    std::vector<Expression> args;

    friend bool operator==(const Expression& a, const Expression& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
        case Kind::Number:
            // bit comparison so -0.0 and 0.0 stay distinct
            return a.number == b.number && std::signbit(a.number) == std::signbit(b.number);
        case Kind::Call:
            if (a.func != b.func) return false;
            break;
        default:
            break;
        }
        return a.args == b.args;
    }
};

namespace detail {

inline Expression make(Expression::Kind k, std::vector<Expression> args) {
    Expression e;
    e.kind = k;
    e.args = std::move(args);
    return e;
}

struct Parser {
    std::string_view src;
    std::size_t pos = 0;
    int depth = 0;

    // bounds parse, print, evaluate and destructor recursion alike
    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth > 200)
                throw SyntaxError(p.pos, "expression nested too deeply");
        }
        ~DepthGuard() { --p.depth; }
    };

    void skip_ws() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' ||
                                    src[pos] == '\n' || src[pos] == '\r'))
            ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    Expression parse_sum() {
        DepthGuard guard(*this);
        Expression left = parse_product();
        for (;;) {
            if (eat('+'))
                left = make(Expression::Kind::Add, two(std::move(left), parse_product()));
            else if (eat('-'))
                left = make(Expression::Kind::Sub, two(std::move(left), parse_product()));
            else
                return left;
        }
    }

    Expression parse_product() {
        Expression left = parse_unary();
        for (;;) {
            if (eat('*'))
                left = make(Expression::Kind::Mul, two(std::move(left), parse_unary()));
            else if (eat('/'))
                left = make(Expression::Kind::Div, two(std::move(left), parse_unary()));
            else
                return left;
        }
    }

    Expression parse_unary() {
        DepthGuard guard(*this);
        if (eat('-')) {
            std::vector<Expression> args;
            args.push_back(parse_unary());
            return make(Expression::Kind::Neg, std::move(args));
        }
        return parse_power();
    }

    Expression parse_power() {
        Expression base = parse_atom();
        if (eat('^'))
            return make(Expression::Kind::Pow, two(std::move(base), parse_unary()));
        return base;
    }

    Expression parse_atom() {
        skip_ws();
        if (pos >= src.size()) throw SyntaxError(pos, "expected a value");
        const char c = src[pos];
        if (c == '(') {
            ++pos;
            Expression inner = parse_sum();
            if (!eat(')')) throw SyntaxError(pos, "expected ')'");
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_')
            return parse_identifier();
        throw SyntaxError(pos, std::string("unexpected character '") + c + "'");
    }

    Expression parse_number() {
        const std::size_t start = pos;
        while (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') ++pos;
        if (pos < src.size() && src[pos] == '.') {
            ++pos;
            while (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') ++pos;
        }
        if (pos == start || (pos == start + 1 && src[start] == '.'))
            throw SyntaxError(start, "malformed number");
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            std::size_t exp_pos = pos + 1;
            if (exp_pos < src.size() && (src[exp_pos] == '+' || src[exp_pos] == '-')) ++exp_pos;
            std::size_t digits = exp_pos;
            while (digits < src.size() && src[digits] >= '0' && src[digits] <= '9') ++digits;
            if (digits > exp_pos) pos = digits;  // otherwise the 'e' is not an exponent
        }
        double value = 0.0;
        const auto result = std::from_chars(src.data() + start, src.data() + pos, value);
        if (result.ec != std::errc{}) throw SyntaxError(start, "malformed number");
        Expression e;
        e.kind = Expression::Kind::Number;
        e.number = value;
        return e;
    }

    Expression parse_identifier() {
        const std::size_t start = pos;
        while (pos < src.size() &&
               ((src[pos] >= 'a' && src[pos] <= 'z') || (src[pos] >= 'A' && src[pos] <= 'Z') ||
                (src[pos] >= '0' && src[pos] <= '9') || src[pos] == '_'))
            ++pos;
        const std::string_view name = src.substr(start, pos - start);
        if (name == "x") return make(Expression::Kind::VarX, {});
        if (name == "y") return make(Expression::Kind::VarY, {});
        if (name == "pi") return make(Expression::Kind::Pi, {});

        Func func;
        std::size_t arity = 1;
        if (name == "sqrt") func = Func::Sqrt;
        else if (name == "exp") func = Func::Exp;
        else if (name == "sin") func = Func::Sin;
        else if (name == "cos") func = Func::Cos;
        else if (name == "abs") func = Func::Abs;
        else if (name == "max") { func = Func::Max; arity = 2; }
        else if (name == "min") { func = Func::Min; arity = 2; }
        else throw UnknownIdentifierError(start, std::string(name));

        if (!eat('(')) throw SyntaxError(pos, "expected '(' after '" + std::string(name) + "'");
        std::vector<Expression> args;
        args.push_back(parse_sum());
        while (eat(',')) args.push_back(parse_sum());
        if (!eat(')')) throw SyntaxError(pos, "expected ')'");
        if (args.size() != arity)
            throw ArityError(start, std::string(name), arity, args.size());

        Expression e;
        e.kind = Expression::Kind::Call;
        e.func = func;
        e.args = std::move(args);
        return e;
    }

    static std::vector<Expression> two(Expression a, Expression b) {
        std::vector<Expression> v;
        v.reserve(2);
        v.push_back(std::move(a));
        v.push_back(std::move(b));
        return v;
    }
};

inline int precedence(const Expression& e) {
    switch (e.kind) {
    case Expression::Kind::Add:
    case Expression::Kind::Sub: return 1;
    case Expression::Kind::Mul:
    case Expression::Kind::Div: return 2;
    case Expression::Kind::Neg: return 3;
    case Expression::Kind::Pow: return 4;
    default: return 5;
    }
}

inline void print_number(std::string& out, double v) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, result.ptr);
}

inline void print(std::string& out, const Expression& e, int min_prec) {
    const bool parens = precedence(e) < min_prec;
    if (parens) out += '(';
    switch (e.kind) {
    case Expression::Kind::Number: print_number(out, e.number); break;
    case Expression::Kind::VarX: out += 'x'; break;
    case Expression::Kind::VarY: out += 'y'; break;
    case Expression::Kind::Pi: out += "pi"; break;
    case Expression::Kind::Add:
        print(out, e.args[0], 1); out += " + "; print(out, e.args[1], 2);
        break;
    case Expression::Kind::Sub:
        print(out, e.args[0], 1); out += " - "; print(out, e.args[1], 2);
        break;
    case Expression::Kind::Mul:
        print(out, e.args[0], 2); out += '*'; print(out, e.args[1], 3);
        break;
    case Expression::Kind::Div:
        print(out, e.args[0], 2); out += '/'; print(out, e.args[1], 3);
        break;
    case Expression::Kind::Neg:
        out += '-'; print(out, e.args[0], 3);
        break;
    case Expression::Kind::Pow:
        print(out, e.args[0], 5); out += '^'; print(out, e.args[1], 3);
        break;
    case Expression::Kind::Call: {
        switch (e.func) {
        case Func::Sqrt: out += "sqrt"; break;
        case Func::Exp: out += "exp"; break;
        case Func::Sin: out += "sin"; break;
        case Func::Cos: out += "cos"; break;
        case Func::Abs: out += "abs"; break;
        case Func::Max: out += "max"; break;
        case Func::Min: out += "min"; break;
        }
        out += '(';
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i) out += ", ";
            print(out, e.args[i], 1);
        }
        out += ')';
        break;
    }
    }
    if (parens) out += ')';
}

}  // namespace detail

inline Expression parse(std::string_view source) {
    detail::Parser p{source};
    Expression e = p.parse_sum();
    p.skip_ws();
    if (p.pos != source.size())
        throw SyntaxError(p.pos, "unexpected trailing input");
    return e;
}

// Minimal-parenthesis rendering; parse(to_string(e)) == e structurally.
inline std::string to_string(const Expression& e) {
    std::string out;
    detail::print(out, e, 0);
    return out;
}

// IEEE double semantics: sqrt of a negative or 0/0 yields NaN, x/0 yields
// an infinity; non-finite results are the caller's flag, never a crash.
inline double evaluate(const Expression& e, double x, double y) {
    switch (e.kind) {
    case Expression::Kind::Number: return e.number;
    case Expression::Kind::VarX: return x;
    case Expression::Kind::VarY: return y;
    case Expression::Kind::Pi: return 3.14159265358979323846;
    case Expression::Kind::Add: return evaluate(e.args[0], x, y) + evaluate(e.args[1], x, y);
    case Expression::Kind::Sub: return evaluate(e.args[0], x, y) - evaluate(e.args[1], x, y);
    case Expression::Kind::Mul: return evaluate(e.args[0], x, y) * evaluate(e.args[1], x, y);
    case Expression::Kind::Div: return evaluate(e.args[0], x, y) / evaluate(e.args[1], x, y);
    case Expression::Kind::Pow:
        return std::pow(evaluate(e.args[0], x, y), evaluate(e.args[1], x, y));
    case Expression::Kind::Neg: return -evaluate(e.args[0], x, y);
    case Expression::Kind::Call: {
        const double a = evaluate(e.args[0], x, y);
        switch (e.func) {
        case Func::Sqrt: return std::sqrt(a);
        case Func::Exp: return std::exp(a);
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Abs: return std::fabs(a);
        case Func::Max:
        case Func::Min: {
            const double b = evaluate(e.args[1], x, y);
            if (std::isnan(a) || std::isnan(b))
                return std::numeric_limits<double>::quiet_NaN();
            return e.func == Func::Max ? std::max(a, b) : std::min(a, b);
        }
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Strict mode: a non-finite value is an error instead of a flag.
inline double evaluate_strict(const Expression& e, double x, double y) {
    const double v = evaluate(e, x, y);
    if (!std::isfinite(v)) throw DomainError(x, y);
    return v;
}

}  // namespace lamina::expr
