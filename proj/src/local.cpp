#include "parmono/local.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "parmono/monodromy.hpp"

namespace parmono {

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

// Taylor coefficients A_0..A_{count-1} of A minus the target pole term, about alpha.
std::vector<CMatrix> regular_taylor(const RationalMatrix& at, std::size_t target, int count) {
    const int n = at.dim();
    const cplx alpha = at.poles()[target].location;
    std::vector<CMatrix> c(static_cast<std::size_t>(count), CMatrix::Zero(n, n));
    for (std::size_t j = 0; j < at.poles().size(); ++j) {
        if (j == target) continue;
        const auto& p = at.poles()[j];
        const cplx d = alpha - p.location;  // (x - beta) = u + d
        for (std::size_t k1 = 0; k1 < p.laurent.size(); ++k1) {
            const int k = static_cast<int>(k1) + 1;
            cplx dk = std::pow(d, -k);
            for (int m = 0; m < count; ++m) {
                const double sign = (m % 2 == 0) ? 1.0 : -1.0;
                c[static_cast<std::size_t>(m)] += (sign * binom(k + m - 1, m) * dk) * p.laurent[k1];
                dk /= d;
            }
        }
    }
    const auto& poly = at.poly();
    for (int pdeg = 0; pdeg < static_cast<int>(poly.size()); ++pdeg) {
        // x^p = (u + alpha)^p
        for (int m = 0; m <= pdeg && m < count; ++m)
            c[static_cast<std::size_t>(m)] += (binom(pdeg, m) * std::pow(alpha, pdeg - m)) * poly[pdeg];
    }
    return c;
}

CMatrix solve_sylvester_shift(const CMatrix& r, int k, const CMatrix& rhs) {
    // X (R + kI) - R X = S  <=>  ((R + kI)^T (x) I - I (x) R) vec X = vec S
    const Eigen::Index n = r.rows();
    const CMatrix rk = r + static_cast<double>(k) * CMatrix::Identity(n, n);
    CMatrix big = CMatrix::Zero(n * n, n * n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            big.block(a * n, b * n, n, n).diagonal().array() += rk(b, a);
            if (a == b) big.block(a * n, b * n, n, n) -= r;
        }
    const CVector v = Eigen::Map<const CVector>(rhs.data(), n * n);
    const CVector x = big.fullPivLu().solve(v);
    return Eigen::Map<const CMatrix>(x.data(), n, n);
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys, double* rms) {
    const auto m = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
    }
    const double den = m * sxx - sx * sx;
    const double slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    const double icpt = (sy - slope * sx) / m;
    if (rms) {
        double acc = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double e = ys[k] - (slope * xs[k] + icpt);
            acc += e * e;
        }
        *rms = std::sqrt(acc / m);
    }
    return slope;
}

}  // namespace

CMatrix LocalSolution::series_value(cplx u) const {
    CMatrix h = series.back();
    for (int k = order() - 1; k >= 0; --k) h = (h * u).eval() + series[static_cast<std::size_t>(k)];
    return h;
}

CMatrix LocalSolution::series_derivative(cplx u) const {
    const Eigen::Index n = exponent.rows();
    if (order() < 1) return CMatrix::Zero(n, n);
    CMatrix h = static_cast<double>(order()) * series.back();
    for (int k = order() - 1; k >= 1; --k) h = (h * u).eval() + static_cast<double>(k) * series[static_cast<std::size_t>(k)];
    return h;
}

LocalSolution frobenius_solution(const ParamRationalMatrix& a, std::size_t pole_index, const ParameterPoint& t,
                                 const LocalOptions& opt) {
    if (opt.order < 0) throw Error(ErrorCode::InvalidInput, "truncation order must be non-negative");
    const RationalMatrix at = a.at(t, opt.tol);
    if (pole_index >= at.poles().size())
        throw Error(ErrorCode::InvalidInput, "pole index " + std::to_string(pole_index) + " out of range");
    const auto orders = pole_orders(a, t, opt.tol);
    if (orders[pole_index].order != 1)
        throw Error(ErrorCode::NotSimple, "pole " + std::to_string(pole_index) + " has order " +
                                              std::to_string(orders[pole_index].order) + " at this t");

    const int n = at.dim();
    LocalSolution sol;
    sol.pole_index = pole_index;
    sol.t = t;
    sol.location = at.poles()[pole_index].location;
    sol.exponent = at.poles()[pole_index].laurent[0];
    const double other = at.distance_to_poles(sol.location, pole_index);
    sol.radius_estimate = std::isfinite(other) ? 0.5 * other : 1.0;

    const auto ev = eigenvalues(sol.exponent);
    for (std::size_t p = 0; p < ev.size(); ++p)
        for (std::size_t q = 0; q < ev.size(); ++q) {
            if (p == q) continue;
            const cplx gap = ev[p] - ev[q];
            const double k = std::round(gap.real());
            if (std::abs(gap - cplx(k, 0.0)) >= opt.resonance_tol) continue;
            if (k == 0.0) {
                sol.eigenvalue_collision = true;
            } else if (k >= 1.0 && k <= opt.order) {
                throw Error(ErrorCode::ResonantSpectrum, "residue eigenvalues differ by the integer " +
                                                             std::to_string(static_cast<int>(k)));
            }
        }

    const auto taylor = regular_taylor(at, pole_index, std::max(opt.order, 1));
    sol.series.reserve(static_cast<std::size_t>(opt.order) + 1);
    sol.series.push_back(CMatrix::Identity(n, n));
    for (int k = 1; k <= opt.order; ++k) {
        CMatrix rhs = CMatrix::Zero(n, n);
        for (int j = 0; j < k; ++j)
            rhs += taylor[static_cast<std::size_t>(k - 1 - j)] * sol.series[static_cast<std::size_t>(j)];
        sol.series.push_back(solve_sylvester_shift(sol.exponent, k, rhs));
    }
    return sol;
}

CMatrix local_monodromy_from_exponent(const LocalSolution& sol) {
    return expm(cplx(0.0, 2.0 * std::numbers::pi) * sol.exponent);
}

double series_residual(const RationalMatrix& at, const LocalSolution& sol, double rho) {
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
        const cplx u = std::polar(rho, 2.0 * std::numbers::pi * (k + 0.5) / 8.0);
        const CMatrix h = sol.series_value(u);
        const CMatrix e = sol.series_derivative(u) + h * sol.exponent / u - at.eval(sol.location + u) * h;
        worst = std::max(worst, inf_norm(e));
    }
    return worst;
}

ResidualSlope residual_slope(const ParamRationalMatrix& a, const LocalSolution& sol) {
    const RationalMatrix at = a.at(sol.t);
    const double rnorm = inf_norm(sol.exponent);
    ResidualSlope out;
    double rho = 1.6 * sol.radius_estimate;
    std::vector<double> lx, ly;
    for (int k = 0; k < 40; ++k, rho *= 0.85) {
        const double res = series_residual(at, sol, rho);
        out.radii.push_back(rho);
        out.residuals.push_back(res);
        const cplx u(rho, 0.0);
        const double noise = 1e-13 * (rnorm / rho + inf_norm(at.eval(sol.location + u))) *
                             std::max(1.0, inf_norm(sol.series_value(u)));
        if (res <= noise) break;
        lx.push_back(std::log(rho));
        ly.push_back(std::log(res));
    }
    out.slope = std::numeric_limits<double>::quiet_NaN();
    if (lx.size() >= 2) {
        const std::size_t use = std::min<std::size_t>(3, lx.size());
        const std::vector<double> xs(lx.end() - static_cast<long>(use), lx.end());
        const std::vector<double> ys(ly.end() - static_cast<long>(use), ly.end());
        out.slope = fit_slope(xs, ys, nullptr);
        out.points_used = use;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

GrowthReport probe(const RationalMatrix& at, cplx center, double r0, double angle, std::size_t samples,
                   const GrowthOptions& opt) {
    if (samples < 2) throw Error(ErrorCode::InvalidInput, "growth probe needs at least 2 samples");
    const std::size_t total = 2 * samples;
    const double r1 = r0 * opt.shrink;
    const cplx dir = std::polar(1.0, angle);
    GrowthReport rep;
    const int n = at.dim();
    CMatrix y = CMatrix::Identity(n, n);
    double log_scale = 0.0;  // Y = exp(log_scale) * y, ||y|| = 1 after each segment
    double prev = r0;
    for (std::size_t k = 0; k < total; ++k) {
        const double rho = r0 * std::pow(r1 / r0, static_cast<double>(k) / static_cast<double>(total - 1));
        // Sub-segments keep |Y| well above atol between renormalisations.
        constexpr int kSub = 8;
        for (int m = 0; k > 0 && m < kSub; ++m) {
            const double ra = prev * std::pow(rho / prev, static_cast<double>(m) / kSub);
            const double rb = m + 1 == kSub ? rho : prev * std::pow(rho / prev, static_cast<double>(m + 1) / kSub);
            const Path seg{PathPiece::segment(center + ra * dir, center + rb * dir)};
            try {
                y = integrate_along(at, seg, y, opt.integrator, opt.tol).y;
            } catch (const Error& e) {
                throw Error(ErrorCode::IntegrationFailure, std::string(to_string(e.code())) + ": " + e.detail());
            }
            const double nrm = inf_norm(y);
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                throw Error(ErrorCode::IntegrationFailure, "solution norm degenerate");
            log_scale += std::log(nrm);
            y /= nrm;
        }
        prev = rho;
        if (k + samples >= total) {
            rep.log_radius.push_back(std::log(rho));
            rep.log_norm.push_back(log_scale);
        }
    }
    rep.slope = fit_slope(rep.log_radius, rep.log_norm, &rep.fit_rms);
    rep.moderate = std::isfinite(rep.slope) && rep.slope >= -opt.sigma_max && rep.fit_rms <= opt.fit_tol;
    return rep;
}

}  // namespace

GrowthReport growth_probe(const ParamRationalMatrix& a, std::size_t pole_index, const ParameterPoint& t,
                          double ray_angle, std::size_t samples, const GrowthOptions& opt) {
    const RationalMatrix at = a.at(t, opt.tol);
    if (pole_index >= at.poles().size())
        throw Error(ErrorCode::InvalidInput, "pole index " + std::to_string(pole_index) + " out of range");
    const cplx alpha = at.poles()[pole_index].location;
    double r0 = opt.start_radius;
    if (r0 <= 0.0) {
        const double other = at.distance_to_poles(alpha, pole_index);
        r0 = std::isfinite(other) ? 0.5 * other : 1.0;
    }
    return probe(at, alpha, r0, ray_angle, samples, opt);
}

GrowthReport growth_probe_at(const ParamRationalMatrix& a, cplx center, const ParameterPoint& t, double ray_angle,
                             std::size_t samples, const GrowthOptions& opt) {
    const RationalMatrix at = a.at(t, opt.tol);
    double r0 = opt.start_radius;
    if (r0 <= 0.0) {
        const double d = at.distance_to_poles(center);
        r0 = std::isfinite(d) ? 0.5 * d : 1.0;
    }
    return probe(at, center, r0, ray_angle, samples, opt);
}

}  // namespace parmono
