#pragma once

// Closed expression language over complex constants and parameters t1..tr.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' int)?
//   unary  := '-'? atom
//   atom   := number | 'i' | 'pi' | param | func '(' expr ')' | '(' expr ')'
//   param  := 't' int
//   func   := exp | log | sqrt | sin | cos
//
// log and sqrt use the principal branch (argument in (-pi, pi]). The cut is
// the non-positive real axis of the argument; differentiation is only
// meaningful away from it.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parmono {

using cplx = std::complex<double>;

/// A point t = (t1, ..., tr) in parameter space.
class ParameterPoint {
public:
    ParameterPoint() = default;
    explicit ParameterPoint(std::vector<cplx> coords) : coords_(std::move(coords)) {}
    ParameterPoint(std::initializer_list<cplx> coords) : coords_(coords) {}

    [[nodiscard]] std::size_t size() const noexcept { return coords_.size(); }
    [[nodiscard]] cplx operator[](std::size_t i) const { return coords_[i]; }
    [[nodiscard]] cplx& operator[](std::size_t i) { return coords_[i]; }
    [[nodiscard]] std::span<const cplx> coords() const noexcept { return coords_; }

    bool operator==(const ParameterPoint&) const = default;

private:
    std::vector<cplx> coords_;
};

/// Immutable expression tree. Cheap to copy (shared nodes).
class Expr {
public:
    enum class Kind { Const, Param, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Sin, Cos };

    /// Zero constant.
    Expr();

    static Expr constant(cplx value);
    /// Parameter t_index, 1-based.
    static Expr param(int index);
    static Expr pow(const Expr& base, int exponent);
    static Expr exp(const Expr& arg);
    static Expr log(const Expr& arg);
    static Expr sqrt(const Expr& arg);
    static Expr sin(const Expr& arg);
    static Expr cos(const Expr& arg);

    [[nodiscard]] Kind kind() const noexcept;
    [[nodiscard]] cplx value() const noexcept;      // Const only
    [[nodiscard]] int index() const noexcept;       // Param index or Pow exponent
    [[nodiscard]] const Expr& lhs() const;          // first child
    [[nodiscard]] const Expr& rhs() const;          // second child (binary ops)

    [[nodiscard]] bool is_const() const noexcept { return kind() == Kind::Const; }
    [[nodiscard]] bool is_zero() const noexcept;
    [[nodiscard]] bool is_one() const noexcept;

    /// Largest parameter index referenced (0 if none).
    [[nodiscard]] int max_param() const;

    /// Throws Error(EVAL_SINGULAR) on division by zero or log of zero.
    [[nodiscard]] cplx eval(std::span<const cplx> t) const;
    [[nodiscard]] cplx eval(const ParameterPoint& t) const { return eval(t.coords()); }

    /// Exact derivative with respect to t_j (1-based).
    [[nodiscard]] Expr diff(int j) const;

    /// Fully parenthesised source text; parse(to_string()) evaluates identically.
    [[nodiscard]] std::string to_string() const;

    friend Expr operator-(const Expr& a);
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static Expr unary(Kind kind, const Expr& arg);
    static Expr binary(Kind kind, const Expr& a, const Expr& b);

    std::shared_ptr<const Node> node_;
};

/// Parses src against the grammar above. Errors: SYNTAX_ERROR,
/// UNKNOWN_IDENTIFIER, PARAM_OUT_OF_RANGE (index outside 1..num_params).
[[nodiscard]] Expr parse_expr(std::string_view src, int num_params);

/// Free-function spellings of the module operations.
[[nodiscard]] inline cplx eval_expr(const Expr& e, const ParameterPoint& t) { return e.eval(t); }
[[nodiscard]] inline Expr diff_expr(const Expr& e, int j) { return e.diff(j); }

}  // namespace parmono
