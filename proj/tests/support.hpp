#pragma once

// Test-side oracles and fixtures. Nothing here calls into the differentiation,
// Frobenius or monodromy code it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "parmono/expr.hpp"
#include "parmono/linalg.hpp"
#include "parmono/system.hpp"

namespace testsupport {

using parmono::cplx;
using parmono::Expr;

inline std::string fixture(const std::string& name) { return std::string(PARMONO_FIXTURES_DIR) + "/" + name; }

inline cplx random_disk(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(radius * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
}

/// Random expression tree of depth <= depth over t1..tr.
inline Expr random_expr(std::mt19937_64& rng, int depth, int r) {
    std::uniform_int_distribution<int> pick(0, depth <= 1 ? 1 : 12);
    std::uniform_int_distribution<int> param(1, r);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const int k = pick(rng);
    switch (k) {
        case 0: return Expr::constant({coef(rng), coef(rng)});
        case 1: return Expr::param(param(rng));
        case 2: return -random_expr(rng, depth - 1, r);
        case 3: return random_expr(rng, depth - 1, r) + random_expr(rng, depth - 1, r);
        case 4: return random_expr(rng, depth - 1, r) - random_expr(rng, depth - 1, r);
        case 5: return random_expr(rng, depth - 1, r) * random_expr(rng, depth - 1, r);
        case 6: return random_expr(rng, depth - 1, r) / random_expr(rng, depth - 1, r);
        case 7: return Expr::pow(random_expr(rng, depth - 1, r), std::uniform_int_distribution<int>(0, 3)(rng));
        case 8: return Expr::exp(random_expr(rng, depth - 1, r));
        case 9: return Expr::log(random_expr(rng, depth - 1, r));
        case 10: return Expr::sqrt(random_expr(rng, depth - 1, r));
        case 11: return Expr::sin(random_expr(rng, depth - 1, r));
        default: return Expr::cos(random_expr(rng, depth - 1, r));
    }
}

/// True when every log/sqrt argument is away from the branch cut, every
/// divisor away from zero, and all intermediate values moderate at t.
inline bool well_conditioned(const Expr& e, std::span<const cplx> t) {
    using K = Expr::Kind;
    bool ok = true;
    std::function<cplx(const Expr&)> walk = [&](const Expr& n) -> cplx {
        if (!ok) return 0.0;
        cplx v{};
        switch (n.kind()) {
            case K::Const: return n.value();
            case K::Param: return t[static_cast<std::size_t>(n.index() - 1)];
            case K::Neg: v = -walk(n.lhs()); break;
            case K::Add: v = walk(n.lhs()) + walk(n.rhs()); break;
            case K::Sub: v = walk(n.lhs()) - walk(n.rhs()); break;
            case K::Mul: v = walk(n.lhs()) * walk(n.rhs()); break;
            case K::Div: {
                const cplx a = walk(n.lhs()), b = walk(n.rhs());
                if (std::abs(b) < 1e-2) ok = false;
                v = ok ? a / b : 0.0;
                break;
            }
            case K::Pow: v = std::pow(walk(n.lhs()), n.index()); break;
            case K::Exp: {
                const cplx a = walk(n.lhs());
                if (std::abs(a.real()) > 20.0) ok = false;
                v = ok ? std::exp(a) : 0.0;
                break;
            }
            case K::Log:
            case K::Sqrt: {
                const cplx a = walk(n.lhs());
                if (std::abs(a) < 1e-2 || (a.real() < 0.0 && std::abs(a.imag()) < 1e-2)) ok = false;
                v = ok ? (n.kind() == K::Log ? std::log(a) : std::sqrt(a)) : 0.0;
                break;
            }
            case K::Sin: v = std::sin(walk(n.lhs())); break;
            case K::Cos: v = std::cos(walk(n.lhs())); break;
        }
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > 1e4) ok = false;
        return v;
    };
    (void)walk(e);
    return ok;
}

/// Centered difference of e in t_j along direction `dir` (1 or i).
inline cplx centered_difference(const Expr& e, std::vector<cplx> t, int j, double h, cplx dir) {
    auto& tj = t[static_cast<std::size_t>(j - 1)];
    const cplx t0 = tj;
    tj = t0 + h * dir;
    const cplx fp = e.eval(t);
    tj = t0 - h * dir;
    const cplx fm = e.eval(t);
    return (fp - fm) / (2.0 * h * dir);
}

/// Richardson-extrapolated centered difference of a scalar function.
inline cplx richardson_derivative(const std::function<cplx(cplx)>& f, cplx t, double h = 1e-3) {
    auto d = [&](double hh) { return (f(t + hh) - f(t - hh)) / (2.0 * hh); };
    return (4.0 * d(h / 2) - d(h)) / 3.0;
}

/// exp(m) by scaling and squaring of a plain Taylor series (independent of
/// the Pade-based library routine).
inline parmono::CMatrix expm_taylor(const parmono::CMatrix& m) {
    int s = 0;
    double nrm = parmono::inf_norm(m);
    while (nrm > 0.25) {
        nrm /= 2.0;
        ++s;
    }
    const parmono::CMatrix a = m / std::pow(2.0, s);
    parmono::CMatrix term = parmono::CMatrix::Identity(m.rows(), m.cols());
    parmono::CMatrix sum = term;
    for (int k = 1; k < 30; ++k) {
        term = (term * a / static_cast<double>(k)).eval();
        sum += term;
    }
    for (int k = 0; k < s; ++k) sum = (sum * sum).eval();
    return sum;
}

/// Classical RK4 for Y' = A(x(s)) x'(s) Y with x(s) = z0 + s (z1 - z0).
inline parmono::CMatrix rk4_segment(const std::function<parmono::CMatrix(cplx)>& a, cplx z0, cplx z1,
                                    parmono::CMatrix y, int steps) {
    const cplx dz = (z1 - z0) / static_cast<double>(steps);
    for (int k = 0; k < steps; ++k) {
        const cplx x = z0 + static_cast<double>(k) * dz;
        const parmono::CMatrix k1 = a(x) * y * dz;
        const parmono::CMatrix k2 = a(x + 0.5 * dz) * (y + 0.5 * k1) * dz;
        const parmono::CMatrix k3 = a(x + 0.5 * dz) * (y + 0.5 * k2) * dz;
        const parmono::CMatrix k4 = a(x + dz) * (y + k3) * dz;
        y += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return y;
}

/// RK4 along the arc center + rho e^{i theta}, theta from th0 to th1.
inline parmono::CMatrix rk4_arc(const std::function<parmono::CMatrix(cplx)>& a, cplx center, double rho,
                                double th0, double th1, parmono::CMatrix y, int steps) {
    const double h = (th1 - th0) / steps;
    auto f = [&](double th, const parmono::CMatrix& v) -> parmono::CMatrix {
        const cplx x = center + std::polar(rho, th);
        return a(x) * v * (cplx(0.0, 1.0) * (x - center));
    };
    for (int k = 0; k < steps; ++k) {
        const double th = th0 + k * h;
        const parmono::CMatrix k1 = f(th, y) * h;
        const parmono::CMatrix k2 = f(th + 0.5 * h, y + 0.5 * k1) * h;
        const parmono::CMatrix k3 = f(th + 0.5 * h, y + 0.5 * k2) * h;
        const parmono::CMatrix k4 = f(th + h, y + k3) * h;
        y += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return y;
}

/// Constant-coefficient Fuchsian system sum R_i / (x - alpha_i) with random
/// residues of entry size <= scale.
inline parmono::ParamRationalMatrix random_fuchsian(std::mt19937_64& rng, int n, const std::vector<cplx>& poles,
                                                    double scale, int num_params = 0) {
    parmono::ParamRationalMatrix a(n, num_params);
    for (cplx p : poles) {
        parmono::CMatrix r(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(i, j) = random_disk(rng, scale);
        a.poles.push_back(parmono::PoleLocus{Expr::constant(p), {parmono::ExprMatrix::from_constant(r)}});
    }
    return a;
}

/// True when no two eigenvalues of r differ by a nonzero integer up to n_max,
/// with margin `gap`.
inline bool comfortably_nonresonant(const parmono::CMatrix& r, int n_max, double gap) {
    const Eigen::ComplexEigenSolver<parmono::CMatrix> es(r);
    const auto& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
            if (i == j) continue;
            const cplx d = ev(i) - ev(j);
            for (int k = 1; k <= n_max; ++k)
                if (std::abs(d - static_cast<double>(k)) < gap) return false;
        }
    return true;
}

/// Min over pairings of the max distance between two eigenvalue lists.
inline double spectrum_distance(const parmono::CVector& a, const parmono::CVector& b) {
    std::vector<int> perm(static_cast<std::size_t>(a.size()));
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<int>(k);
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (std::size_t k = 0; k < perm.size(); ++k)
            worst = std::max(worst, std::abs(a(static_cast<Eigen::Index>(k)) - b(perm[k])));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline parmono::CVector eigenvalues(const parmono::CMatrix& m) {
    return Eigen::ComplexEigenSolver<parmono::CMatrix>(m, false).eigenvalues();
}

/// ||d_x A_t - d_t A_x - [A_x, A_t]||_inf at (x, t) with Richardson-extrapolated
/// centered differences (one parameter).
inline double zero_curvature_fd(const parmono::ParamRationalMatrix& ax, const parmono::ParamRationalMatrix& at,
                                cplx x, cplx t, double h = 1e-3) {
    using parmono::CMatrix;
    using parmono::ParameterPoint;
    auto d = [&](const std::function<CMatrix(cplx)>& f, cplx z) {
        auto c = [&](double hh) -> CMatrix { return (f(z + hh) - f(z - hh)) / (2.0 * hh); };
        return CMatrix((4.0 * c(h / 2) - c(h)) / 3.0);
    };
    const CMatrix dt_ax = d([&](cplx tt) { return ax.eval(x, ParameterPoint{tt}); }, t);
    const CMatrix dx_at = d([&](cplx xx) { return at.eval(xx, ParameterPoint{t}); }, x);
    const CMatrix a0 = ax.eval(x, ParameterPoint{t});
    const CMatrix a1 = at.eval(x, ParameterPoint{t});
    return parmono::inf_norm(dx_at - dt_ax - (a0 * a1 - a1 * a0));
}

}  // namespace testsupport
