#pragma once

// Parameterized linear systems dY/dx = A(x,t) Y with A rational in x, kept in
// partial-fraction form:
//
//   A(x,t) = sum_i sum_{k=1..m_i} L_{i,k}(t) / (x - alpha_i(t))^k + sum_p P_p(t) x^p
//
// Coefficients are Expr entries; RationalMatrix is the numeric snapshot at a
// fixed parameter point, which is what the integrators evaluate.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "parmono/expr.hpp"
#include "parmono/linalg.hpp"

namespace parmono {

struct Tolerances {
    double pole_guard_radius = 1e-12;
    double drop_tol = 1e-13;
    double collision_tol = 1e-12;
};

/// Square matrix of expressions, row-major.
class ExprMatrix {
public:
    ExprMatrix() = default;
    explicit ExprMatrix(int n) : n_(n), entries_(static_cast<std::size_t>(n) * n) {}

    static ExprMatrix identity(int n);
    static ExprMatrix from_constant(const CMatrix& m);

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] Expr& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i) * n_ + j]; }
    [[nodiscard]] const Expr& operator()(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * n_ + j];
    }

    [[nodiscard]] CMatrix eval(const ParameterPoint& t) const;
    [[nodiscard]] ExprMatrix diff(int j) const;
    /// True when every entry folded to the constant zero.
    [[nodiscard]] bool is_structurally_zero() const;
    [[nodiscard]] int max_param() const;

    friend ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b);
    friend ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b);
    friend ExprMatrix operator*(const Expr& s, const ExprMatrix& m);

private:
    int n_ = 0;
    std::vector<Expr> entries_;
};

struct PoleLocus {
    Expr location;
    /// laurent[k-1] multiplies (x - location)^{-k}.
    std::vector<ExprMatrix> laurent;

    [[nodiscard]] int order() const noexcept { return static_cast<int>(laurent.size()); }
};

struct NumericPole {
    cplx location;
    std::vector<CMatrix> laurent;  // ascending order as in PoleLocus
};

/// A(x) at a fixed parameter point.
class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(int dim, std::vector<NumericPole> poles, std::vector<CMatrix> poly);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<NumericPole>& poles() const noexcept { return poles_; }
    [[nodiscard]] const std::vector<CMatrix>& poly() const noexcept { return poly_; }

    /// Throws NEAR_POLE when |x - alpha| < guard for some pole.
    [[nodiscard]] CMatrix eval(cplx x, double guard = Tolerances{}.pole_guard_radius) const;
    /// Same as eval, writing into out without reallocating.
    void eval_into(cplx x, CMatrix& out, double guard = Tolerances{}.pole_guard_radius) const;

    /// Distance from x to the nearest pole, skipping index `skip` (or +inf).
    [[nodiscard]] double distance_to_poles(cplx x, std::optional<std::size_t> skip = std::nullopt) const;

private:
    int dim_ = 0;
    std::vector<NumericPole> poles_;
    std::vector<CMatrix> poly_;
};

struct ParamRationalMatrix {
    int dim = 0;
    int num_params = 0;
    std::vector<PoleLocus> poles;
    std::vector<ExprMatrix> poly;  // poly[p] multiplies x^p

    ParamRationalMatrix() = default;
    ParamRationalMatrix(int n, int r) : dim(n), num_params(r) {}

    [[nodiscard]] int poly_degree() const noexcept { return static_cast<int>(poly.size()) - 1; }
    [[nodiscard]] int max_pole_order() const noexcept;

    /// Checks shapes and parameter indices; throws DIMENSION_MISMATCH /
    /// PARAM_OUT_OF_RANGE.
    void validate() const;

    /// Numeric snapshot; throws POLE_COLLISION if two locations coincide.
    [[nodiscard]] RationalMatrix at(const ParameterPoint& t, const Tolerances& tol = {}) const;

    /// eval_matrix: A(x, t).
    [[nodiscard]] CMatrix eval(cplx x, const ParameterPoint& t, const Tolerances& tol = {}) const;
};

/// Exact d/dt_j. A moving pole of order m gains an order m+1 term.
[[nodiscard]] ParamRationalMatrix dt_matrix(const ParamRationalMatrix& a, int j);

/// Exact d/dx of the rational representation.
[[nodiscard]] ParamRationalMatrix dx_matrix(const ParamRationalMatrix& a);

/// Drops Laurent/polynomial entries that vanish at 20 sampled parameter
/// points, then trailing zero orders and empty loci.
void prune_identically_zero(ParamRationalMatrix& a, std::uint64_t seed = 0xA11CE);

struct PoleOrder {
    cplx location;
    int order = 0;  // 0 means every coefficient vanishes at this t (locus dropped)
    [[nodiscard]] bool simple() const noexcept { return order == 1; }
};

[[nodiscard]] std::vector<PoleOrder> pole_orders(const ParamRationalMatrix& a, const ParameterPoint& t,
                                                 const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Seeded sampling of (x, t) away from poles
// ---------------------------------------------------------------------------

struct SampleDomain {
    std::vector<cplx> t_center;  // empty means the origin
    double t_radius = 0.5;
    cplx x_center{};
    double x_radius = 2.0;
    double pole_margin = 0.25;
};

struct Sample {
    cplx x;
    ParameterPoint t;
};

/// Draws t_count parameter points with x_per_t regular x values each. A draw
/// is rejected when any system fails to evaluate there or x is within
/// pole_margin of a pole; after 10x oversampling throws SAMPLING_EXHAUSTED.
[[nodiscard]] std::vector<Sample> draw_samples(std::span<const ParamRationalMatrix* const> systems,
                                               int num_params, std::size_t t_count, std::size_t x_per_t,
                                               std::uint64_t seed, const SampleDomain& domain = {});

/// Max infinity-norm difference of A and B at s = 2(max order * poles +
/// degree) + 8 seeded points (seed 0xA11CE). A probabilistic identity test.
[[nodiscard]] double sampled_difference(const ParamRationalMatrix& a, const ParamRationalMatrix& b,
                                        const SampleDomain& domain = {});

// ---------------------------------------------------------------------------
// Gauge transformations  B = P' P^{-1} + P A P^{-1}
// ---------------------------------------------------------------------------

class GaugeTransform {
public:
    /// Throws SINGULAR_GAUGE when det P vanishes at every sampled point.
    explicit GaugeTransform(ParamRationalMatrix p);

    [[nodiscard]] const ParamRationalMatrix& matrix() const noexcept { return p_; }
    [[nodiscard]] const ParamRationalMatrix& derivative() const noexcept { return dp_; }

private:
    ParamRationalMatrix p_;
    ParamRationalMatrix dp_;
};

class GaugeReport {
public:
    GaugeReport(ParamRationalMatrix a, GaugeTransform p, std::vector<Sample> samples);

    /// P'(x,t) P^{-1} + P A P^{-1}; throws SINGULAR_GAUGE if P(x,t) is singular.
    [[nodiscard]] CMatrix transformed(cplx x, const ParameterPoint& t) const;

    /// Max over the stored samples of ||B_cand - transformed||_inf.
    [[nodiscard]] double residual(const ParamRationalMatrix& candidate) const;

    [[nodiscard]] const std::vector<Sample>& samples() const noexcept { return samples_; }

private:
    ParamRationalMatrix a_;
    GaugeTransform p_;
    std::vector<Sample> samples_;
};

[[nodiscard]] GaugeReport apply_gauge(const ParamRationalMatrix& a, const GaugeTransform& p,
                                      std::size_t x_samples, std::size_t t_samples, std::uint64_t seed,
                                      const SampleDomain& domain = {});

}  // namespace parmono
