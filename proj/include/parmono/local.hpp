#pragma once

// Local fundamental solutions Y = H(u) u^R, u = x - alpha, at a simple pole
// with residue R, and a numerical moderate-growth probe.

#include <cstddef>
#include <vector>

#include "parmono/integrator.hpp"
#include "parmono/system.hpp"

namespace parmono {

struct LocalOptions {
    int order = 20;
    double resonance_tol = 1e-9;
    Tolerances tol{};
};

struct LocalSolution {
    std::size_t pole_index = 0;
    ParameterPoint t;
    cplx location{};
    CMatrix exponent;             // R = A_{-1}(t)
    std::vector<CMatrix> series;  // H_0 = I, H_1, ..., H_N
    double radius_estimate = 1.0;
    bool eigenvalue_collision = false;

    [[nodiscard]] int order() const noexcept { return static_cast<int>(series.size()) - 1; }
    [[nodiscard]] CMatrix series_value(cplx u) const;
    [[nodiscard]] CMatrix series_derivative(cplx u) const;
};

/// Throws NOT_SIMPLE, RESONANT_SPECTRUM.
[[nodiscard]] LocalSolution frobenius_solution(const ParamRationalMatrix& a, std::size_t pole_index,
                                               const ParameterPoint& t, const LocalOptions& opt = {});

/// exp(2 pi i R).
[[nodiscard]] CMatrix local_monodromy_from_exponent(const LocalSolution& sol);

/// max over 8 points on |u| = rho of ||H'(u) + H(u) R / u - A(alpha + u) H(u)||_inf,
/// the ODE residual of the truncated series with u^R factored out.
[[nodiscard]] double series_residual(const RationalMatrix& at, const LocalSolution& sol, double rho);

struct ResidualSlope {
    std::vector<double> radii;
    std::vector<double> residuals;
    double slope = 0.0;  // NaN when fewer than two radii are above the noise floor
    std::size_t points_used = 0;
};

/// Slope of log residual against log radius on geometrically shrinking
/// radii, fitted over the smallest radii still above roundoff.
[[nodiscard]] ResidualSlope residual_slope(const ParamRationalMatrix& a, const LocalSolution& sol);

struct GrowthOptions {
    double sigma_max = 50.0;
    double fit_tol = 0.25;       // rms of the log-log fit, natural log units
    double start_radius = 0.0;   // 0: radius estimate of the pole (1 without other poles)
    double shrink = 1e-2;        // end radius = start * shrink
    IntegratorOptions integrator{};
    Tolerances tol{};
};

struct GrowthReport {
    double slope = 0.0;
    double fit_rms = 0.0;
    bool moderate = false;
    std::vector<double> log_radius;
    std::vector<double> log_norm;

    [[nodiscard]] const char* classification() const noexcept {
        return moderate ? "moderate" : "suspected_irregular";
    }
};

/// Integrates from alpha + r0 e^{i angle} toward alpha along the ray and fits
/// log ||Y|| against log |x - alpha| over the last `samples` points. Moderate
/// iff slope >= -sigma_max and the fit rms is below fit_tol.
/// Throws INTEGRATION_FAILURE.
[[nodiscard]] GrowthReport growth_probe(const ParamRationalMatrix& a, std::size_t pole_index,
                                        const ParameterPoint& t, double ray_angle, std::size_t samples,
                                        const GrowthOptions& opt = {});

/// Same probe toward an arbitrary point (e.g. for systems without poles).
[[nodiscard]] GrowthReport growth_probe_at(const ParamRationalMatrix& a, cplx center, const ParameterPoint& t,
                                           double ray_angle, std::size_t samples, const GrowthOptions& opt = {});

}  // namespace parmono
