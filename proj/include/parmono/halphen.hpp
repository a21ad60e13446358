#pragma once

// Darboux-Halphen flows and the monodromy evolution law of their Lax pair
//
//   dY/dx = ( mu I / prod (x - x_i) + sum lambda_i C / (x - x_i) ) Y,
//
// along x_i' = Q_i(x) = x_i^2 + a (x1 - x2)^2 + b (x2 - x3)^2 + c (x3 - x1)^2.
// The monodromy around x_i evolves as M_i(t) = c_i(t) M_i(t0) with
// c_i(t) = exp(-2 pi i mu int_{t0}^{t} beta_i dt).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "parmono/integrator.hpp"
#include "parmono/monodromy.hpp"
#include "parmono/system.hpp"

namespace parmono {

enum class HalphenVariant { DHV, HII_flow, HI };

[[nodiscard]] const char* to_string(HalphenVariant v) noexcept;
/// Throws INVALID_INPUT for unknown names.
[[nodiscard]] HalphenVariant parse_variant(const std::string& name);

struct HalphenConfig {
    HalphenVariant variant = HalphenVariant::HII_flow;
    cplx mu{1.0, 0.0};
    std::array<cplx, 3> lambdas{};
    CMatrix C = CMatrix::Zero(2, 2);
    std::array<cplx, 3> abc{};
    cplx t0{};
    cplx t_end{};
    /// x (HII_flow), (w1, w2, w3, theta, phi) (DHV) or (w1, w2, w3) (HI).
    std::vector<cplx> initial;
    int checkpoints = 4;

    /// Checks sum lambda = 0, tr C = 0, state size and distinct x. Throws
    /// INVALID_INPUT, COLLISION.
    void validate() const;
};

struct HalphenState {
    HalphenVariant variant = HalphenVariant::HII_flow;
    cplx t{};
    std::vector<cplx> vars;
};

[[nodiscard]] std::size_t state_size(HalphenVariant v) noexcept;

/// d vars / dt.
[[nodiscard]] std::vector<cplx> flow_rhs(const HalphenState& state, const HalphenConfig& cfg);

struct TrajectoryPoint {
    double s = 0.0;  // t = t0 + s (t_end - t0)
    cplx t{};
    std::vector<cplx> vars;
    double err_estimate = 0.0;  // accumulated since t0
};

struct Trajectory {
    HalphenConfig config;
    cplx t_end{};
    std::vector<TrajectoryPoint> points;       // every accepted step, starting at t0
    std::vector<TrajectoryPoint> checkpoints;  // s = k / K, k = 0..K
    bool frozen = false;                       // state held constant (negative control)

    /// State at s by re-stepping from the preceding accepted point.
    [[nodiscard]] std::vector<cplx> state_at(double s) const;
};

/// Integrates the flow along the straight t-segment t0 -> t_end, restarting
/// at each checkpoint s = k / K. Throws COLLISION (HII_flow, min |x_i - x_j|
/// < 1e-8 max(1, max |x_i|)), STEP_UNDERFLOW, NONFINITE.
[[nodiscard]] Trajectory integrate_flow(const HalphenConfig& cfg, cplx t_end, const IntegratorOptions& opt = {});

/// Constant-state trajectory with the same checkpoints.
[[nodiscard]] Trajectory frozen_trajectory(const HalphenConfig& cfg, cplx t_end);

/// Numeric Lax matrix at fixed x in partial-fraction form: residue at x_i is
/// lambda_i C + b_i I with b_i = mu / prod_{j != i} (x_i - x_j). Throws COLLISION.
[[nodiscard]] ParamRationalMatrix lax_matrix(const HalphenConfig& cfg, const std::array<cplx, 3>& x);

/// Same with parameter-dependent pole locations x_i(t).
[[nodiscard]] ParamRationalMatrix lax_matrix(const HalphenConfig& cfg, const std::array<Expr, 3>& x, int num_params);

/// b_i = mu / prod_{j != i} (x_i - x_j).
[[nodiscard]] std::array<cplx, 3> lax_residue_scalars(cplx mu, const std::array<cplx, 3>& x);

/// beta_i = (2 x_i + x_j + x_k) / ((x_i - x_j)(x_i - x_k)). Throws COLLISION.
[[nodiscard]] std::array<cplx, 3> beta_coefficients(const std::array<cplx, 3>& x);

/// d b_i / dt along x' = Q(x), by the chain rule.
[[nodiscard]] std::array<cplx, 3> residue_scalar_rates(const HalphenConfig& cfg, const std::array<cplx, 3>& x);

/// c_i(t) = exp(-2 pi i mu int beta_i dt), integral by 5-point Gauss-Legendre
/// on every accepted step, accumulated without branch reduction.
[[nodiscard]] cplx scalar_factor(const Trajectory& traj, int i, cplx t);

struct EvolutionCheckpoint {
    cplx t{};
    std::array<cplx, 3> x{};
    std::array<cplx, 3> b{};
    std::array<cplx, 3> beta{};
    std::array<cplx, 3> c{};             // from the beta quadrature
    std::array<cplx, 3> c_residue{};     // exp(2 pi i (b_i(t) - b_i(t0)))
    std::array<double, 3> residual{};    // ||M_i(t) - c_i M_i(t0)|| / ||M_i(t0)||
    std::array<CMatrix, 3> monodromy;
    double beta_sum = 0.0;               // |sum beta_i|
    double beta_moment = 0.0;            // |sum beta_i x_i - 1|
};

struct EvolutionReport {
    cplx base{};
    std::vector<EvolutionCheckpoint> checkpoints;
    double max_residual = 0.0;
    double max_rate_residual = 0.0;        // max |db_i/dt + mu beta_i| along the trajectory
    double max_rate_residual_rel = 0.0;    // same divided by (1 + |mu beta_i|)
    double max_beta_sum = 0.0;
    double max_beta_moment = 0.0;
    double max_c_crosscheck = 0.0;         // max |c_i - c_residue_i|
    double max_err_estimate = 0.0;         // monodromy integration estimates
};

/// Requires an HII_flow trajectory. Without a base point one admissible at
/// every checkpoint is searched for.
[[nodiscard]] EvolutionReport verify_evolution_law(const Trajectory& traj, std::optional<cplx> base = std::nullopt,
                                                   const MonodromyOptions& opt = {});

}  // namespace parmono
