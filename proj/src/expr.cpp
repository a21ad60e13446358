#include "parmono/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "parmono/error.hpp"

namespace parmono {

struct Expr::Node {
    Kind kind = Kind::Const;
    cplx value{};
    int index = 0;
    Expr a;
    Expr b;
};

namespace {

const cplx kImag{0.0, 1.0};

// Repeated squaring; folded constants and evaluated powers agree bitwise.
cplx ipow(cplx base, int n) {
    cplx result{1.0};
    for (int e = n; e > 0; e >>= 1) {
        if (e & 1) result *= base;
        base *= base;
    }
    return result;
}

}  // namespace

Expr::Expr() : node_(nullptr) {}

Expr Expr::constant(cplx value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::param(int index) {
    if (index < 1) throw Error(ErrorCode::ParamOutOfRange, "parameter index must be >= 1");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Param;
    n->index = index;
    return Expr(std::move(n));
}

Expr Expr::unary(Kind kind, const Expr& arg) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = arg;
    return Expr(std::move(n));
}

Expr Expr::binary(Kind kind, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr::Kind Expr::kind() const noexcept { return node_ ? node_->kind : Kind::Const; }
cplx Expr::value() const noexcept { return node_ ? node_->value : cplx{}; }
int Expr::index() const noexcept { return node_ ? node_->index : 0; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

bool Expr::is_zero() const noexcept { return is_const() && value() == cplx{}; }
bool Expr::is_one() const noexcept { return is_const() && value() == cplx{1.0}; }

// Constant folding only; no algebraic rewriting beyond the identities
// 0+e, e*1, e*0 and e^1.

Expr operator-(const Expr& a) {
    if (a.is_const()) return Expr::constant(cplx{} - a.value());
    return Expr::unary(Expr::Kind::Neg, a);
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return Expr::constant(a.value() + b.value());
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    return Expr::binary(Expr::Kind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return Expr::constant(a.value() - b.value());
    if (b.is_zero()) return a;
    if (a.is_zero()) return -b;
    return Expr::binary(Expr::Kind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return Expr::constant(a.value() * b.value());
    if (a.is_zero() || b.is_zero()) return Expr();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    return Expr::binary(Expr::Kind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const() && b.value() != cplx{}) return Expr::constant(a.value() / b.value());
    if (b.is_one()) return a;
    if (a.is_zero() && !b.is_zero()) return Expr();
    return Expr::binary(Expr::Kind::Div, a, b);
}

Expr Expr::pow(const Expr& base, int exponent) {
    if (exponent < 0) throw Error(ErrorCode::SyntaxError, "negative integer exponent");
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return base;
    if (base.is_const()) return constant(ipow(base.value(), exponent));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->a = base;
    n->index = exponent;
    return Expr(std::move(n));
}

Expr Expr::exp(const Expr& arg) {
    if (arg.is_const()) return constant(std::exp(arg.value()));
    return unary(Kind::Exp, arg);
}
Expr Expr::log(const Expr& arg) {
    if (arg.is_const() && arg.value() != cplx{}) return constant(std::log(arg.value()));
    return unary(Kind::Log, arg);
}
Expr Expr::sqrt(const Expr& arg) {
    if (arg.is_const()) return constant(std::sqrt(arg.value()));
    return unary(Kind::Sqrt, arg);
}
Expr Expr::sin(const Expr& arg) {
    if (arg.is_const()) return constant(std::sin(arg.value()));
    return unary(Kind::Sin, arg);
}
Expr Expr::cos(const Expr& arg) {
    if (arg.is_const()) return constant(std::cos(arg.value()));
    return unary(Kind::Cos, arg);
}

int Expr::max_param() const {
    switch (kind()) {
        case Kind::Const: return 0;
        case Kind::Param: return index();
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div: return std::max(lhs().max_param(), rhs().max_param());
        default: return lhs().max_param();
    }
}

cplx Expr::eval(std::span<const cplx> t) const {
    switch (kind()) {
        case Kind::Const: return value();
        case Kind::Param:
            if (static_cast<std::size_t>(index()) > t.size())
                throw Error(ErrorCode::ParamOutOfRange,
                            "t" + std::to_string(index()) + " with " + std::to_string(t.size()) + " parameters");
            return t[index() - 1];
        case Kind::Neg: return cplx{} - lhs().eval(t);
        case Kind::Add: return lhs().eval(t) + rhs().eval(t);
        case Kind::Sub: return lhs().eval(t) - rhs().eval(t);
        case Kind::Mul: return lhs().eval(t) * rhs().eval(t);
        case Kind::Div: {
            const cplx den = rhs().eval(t);
            if (den == cplx{}) throw Error(ErrorCode::EvalSingular, "division by zero");
            return lhs().eval(t) / den;
        }
        case Kind::Pow: return ipow(lhs().eval(t), index());
        case Kind::Exp: return std::exp(lhs().eval(t));
        case Kind::Log: {
            const cplx a = lhs().eval(t);
            if (a == cplx{}) throw Error(ErrorCode::EvalSingular, "log of zero");
            return std::log(a);
        }
        case Kind::Sqrt: return std::sqrt(lhs().eval(t));
        case Kind::Sin: return std::sin(lhs().eval(t));
        case Kind::Cos: return std::cos(lhs().eval(t));
    }
    return {};
}

Expr Expr::diff(int j) const {
    if (j < 1) throw Error(ErrorCode::ParamOutOfRange, "derivative index must be >= 1");
    switch (kind()) {
        case Kind::Const: return Expr();
        case Kind::Param: return index() == j ? constant(1.0) : Expr();
        case Kind::Neg: return -lhs().diff(j);
        case Kind::Add: return lhs().diff(j) + rhs().diff(j);
        case Kind::Sub: return lhs().diff(j) - rhs().diff(j);
        case Kind::Mul: return lhs().diff(j) * rhs() + lhs() * rhs().diff(j);
        case Kind::Div: {
            const Expr da = lhs().diff(j);
            const Expr db = rhs().diff(j);
            return da / rhs() - lhs() * db / pow(rhs(), 2);
        }
        case Kind::Pow: {
            const int n = index();
            return constant(static_cast<double>(n)) * pow(lhs(), n - 1) * lhs().diff(j);
        }
        case Kind::Exp: return *this * lhs().diff(j);
        case Kind::Log: return lhs().diff(j) / lhs();
        case Kind::Sqrt: return lhs().diff(j) / (constant(2.0) * *this);
        case Kind::Sin: return cos(lhs()) * lhs().diff(j);
        case Kind::Cos: return -(sin(lhs()) * lhs().diff(j));
    }
    return Expr();
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s == "inf" || s == "-inf" || s == "nan" || s == "-nan")
        throw Error(ErrorCode::InvalidInput, "non-finite constant cannot be printed");
    return s;
}

std::string format_complex(cplx v) {
    if (v.imag() == 0.0) return "(" + format_double(v.real()) + ")";
    if (v.real() == 0.0) return "(" + format_double(v.imag()) + "*i)";
    return "(" + format_double(v.real()) + " + " + format_double(v.imag()) + "*i)";
}

const char* func_name(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Exp: return "exp";
        case Expr::Kind::Log: return "log";
        case Expr::Kind::Sqrt: return "sqrt";
        case Expr::Kind::Sin: return "sin";
        case Expr::Kind::Cos: return "cos";
        default: return "";
    }
}

}  // namespace

std::string Expr::to_string() const {
    switch (kind()) {
        case Kind::Const: return format_complex(value());
        case Kind::Param: return "t" + std::to_string(index());
        case Kind::Neg: return "(-" + lhs().to_string() + ")";
        case Kind::Add: return "(" + lhs().to_string() + " + " + rhs().to_string() + ")";
        case Kind::Sub: return "(" + lhs().to_string() + " - " + rhs().to_string() + ")";
        case Kind::Mul: return "(" + lhs().to_string() + " * " + rhs().to_string() + ")";
        case Kind::Div: return "(" + lhs().to_string() + " / " + rhs().to_string() + ")";
        case Kind::Pow: return "(" + lhs().to_string() + "^" + std::to_string(index()) + ")";
        default: return std::string(func_name(kind())) + "(" + lhs().to_string() + ")";
    }
}

// ---------------------------------------------------------------------------
// Recursive-descent parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::string_view src, int num_params) : src_(src), num_params_(num_params) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("'+', '-', '*', '/', '^' or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& expected) const {
        std::string found = pos_ < src_.size() ? std::string("'") + src_[pos_] + "'" : "end of input";
        throw Error(ErrorCode::SyntaxError,
                    "at position " + std::to_string(pos_) + ": expected " + expected + ", found " + found);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) lhs = lhs + term();
            else if (accept('-')) lhs = lhs - term();
            else return lhs;
        }
    }

    Expr term() {
        Expr lhs = factor();
        for (;;) {
            if (accept('*')) lhs = lhs * factor();
            else if (accept('/')) lhs = lhs / factor();
            else return lhs;
        }
    }

    Expr factor() {
        Expr base = unary();
        if (accept('^')) {
            skip_ws();
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (start == pos_) fail("non-negative integer exponent");
            int n = 0;
            auto [p, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, n);
            if (ec != std::errc{}) fail("integer exponent in range");
            return Expr::pow(base, n);
        }
        return base;
    }

    Expr unary() {
        if (accept('-')) return -atom();
        return atom();
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= src_.size()) fail("number, identifier or '('");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!accept(')')) fail("')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("number, identifier or '('");
    }

    Expr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
            return n;
        };
        std::size_t nd = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            nd += digits();
        }
        if (nd == 0) fail("digits");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // not an exponent; leave 'e' for the caller
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc{} || p != src_.data() + pos_) {
            pos_ = start;
            fail("number");
        }
        return Expr::constant(v);
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);

        if (id == "i") return Expr::constant(kImag);
        if (id == "pi") return Expr::constant(std::numbers::pi);
        if (id.size() > 1 && id[0] == 't' &&
            id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
            int k = 0;
            std::from_chars(id.data() + 1, id.data() + id.size(), k);
            if (k < 1 || k > num_params_)
                throw Error(ErrorCode::ParamOutOfRange, "parameter " + std::string(id) + " outside t1..t" +
                                                            std::to_string(num_params_));
            return Expr::param(k);
        }
        Expr (*fn)(const Expr&) = nullptr;
        if (id == "exp") fn = &Expr::exp;
        else if (id == "log") fn = &Expr::log;
        else if (id == "sqrt") fn = &Expr::sqrt;
        else if (id == "sin") fn = &Expr::sin;
        else if (id == "cos") fn = &Expr::cos;
        if (!fn)
            throw Error(ErrorCode::UnknownIdentifier,
                        "'" + std::string(id) + "' at position " + std::to_string(start));
        if (!accept('(')) fail("'(' after function name");
        Expr arg = expr();
        if (!accept(')')) fail("')'");
        return fn(arg);
    }

    std::string_view src_;
    int num_params_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view src, int num_params) {
    return Parser(src, num_params).parse();
}

}  // namespace parmono
