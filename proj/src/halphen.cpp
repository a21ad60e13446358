#include "parmono/halphen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace parmono {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 5-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 5> kGaussNode = {0.04691007703066800, 0.23076534494715845, 0.5,
                                              0.76923465505284155, 0.95308992296933200};
constexpr std::array<double, 5> kGaussWeight = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                                0.23931433524968324, 0.11846344252809454};

std::array<cplx, 3> as_triple(const std::vector<cplx>& v) { return {v[0], v[1], v[2]}; }

double collision_gap(const std::array<cplx, 3>& x) {
    return std::min({std::abs(x[0] - x[1]), std::abs(x[1] - x[2]), std::abs(x[2] - x[0])});
}

void check_collision(const std::array<cplx, 3>& x) {
    const double scale = std::max({1.0, std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
    if (collision_gap(x) < 1e-8 * scale) throw Error(ErrorCode::Collision, "pole coordinates x_i collide");
}

CMatrix to_column(const std::vector<cplx>& v) {
    CMatrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t k = 0; k < v.size(); ++k) m(static_cast<Eigen::Index>(k), 0) = v[k];
    return m;
}

std::vector<cplx> from_column(const CMatrix& m) { return {m.data(), m.data() + m.size()}; }

// d vars / ds along t = t0 + s (t_end - t0).
struct FlowRhs {
    const HalphenConfig* cfg;
    cplx t0, dt;
    bool frozen = false;

    CMatrix operator()(double s, const CMatrix& y) const {
        if (frozen) return CMatrix::Zero(y.rows(), 1);
        const HalphenState st{cfg->variant, t0 + s * dt, from_column(y)};
        return to_column(flow_rhs(st, *cfg)) * dt;
    }
};

}  // namespace

const char* to_string(HalphenVariant v) noexcept {
    switch (v) {
        case HalphenVariant::DHV: return "DHV";
        case HalphenVariant::HII_flow: return "HII_flow";
        case HalphenVariant::HI: return "HI";
    }
    return "HII_flow";
}

HalphenVariant parse_variant(const std::string& name) {
    if (name == "DHV") return HalphenVariant::DHV;
    if (name == "HII_flow") return HalphenVariant::HII_flow;
    if (name == "HI") return HalphenVariant::HI;
    throw Error(ErrorCode::InvalidInput, "unknown variant '" + name + "'");
}

std::size_t state_size(HalphenVariant v) noexcept { return v == HalphenVariant::DHV ? 5 : 3; }

void HalphenConfig::validate() const {
    if (initial.size() != state_size(variant))
        throw Error(ErrorCode::InvalidInput, std::string("initial state for ") + to_string(variant) + " needs " +
                                                 std::to_string(state_size(variant)) + " values");
    if (C.rows() != 2 || C.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "C must be 2x2");
    if (std::abs(lambdas[0] + lambdas[1] + lambdas[2]) > 1e-14)
        throw Error(ErrorCode::InvalidInput, "lambdas must sum to zero");
    if (std::abs(C.trace()) > 1e-14) throw Error(ErrorCode::InvalidInput, "C must be traceless");
    if (checkpoints < 1) throw Error(ErrorCode::InvalidInput, "checkpoints must be at least 1");
    if (variant == HalphenVariant::HII_flow) check_collision(as_triple(initial));
}

std::vector<cplx> flow_rhs(const HalphenState& state, const HalphenConfig& cfg) {
    const auto& v = state.vars;
    switch (state.variant) {
        case HalphenVariant::DHV: {
            const cplx w1 = v[0], w2 = v[1], w3 = v[2], th = v[3], ph = v[4];
            return {w2 * w3 - w1 * (w2 + w3) + ph * ph,
                    w3 * w1 - w2 * (w3 + w1) + th * th,
                    w1 * w2 - w3 * (w1 + w2) - th * ph,
                    w1 * (th - ph) - w3 * (th + ph),
                    -w2 * (th - ph) - w3 * (th + ph)};
        }
        case HalphenVariant::HII_flow: {
            const cplx d12 = v[0] - v[1], d23 = v[1] - v[2], d31 = v[2] - v[0];
            const cplx q = cfg.abc[0] * d12 * d12 + cfg.abc[1] * d23 * d23 + cfg.abc[2] * d31 * d31;
            return {v[0] * v[0] + q, v[1] * v[1] + q, v[2] * v[2] + q};
        }
        case HalphenVariant::HI: {
            const cplx w1 = v[0], w2 = v[1], w3 = v[2];
            return {0.5 * (w1 * w2 + w3 * w1 - w2 * w3),
                    0.5 * (w2 * w3 + w1 * w2 - w3 * w1),
                    0.5 * (w3 * w1 + w2 * w3 - w1 * w2)};
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

std::vector<cplx> Trajectory::state_at(double s) const {
    auto it = std::upper_bound(points.begin(), points.end(), s,
                               [](double v, const TrajectoryPoint& p) { return v < p.s; });
    if (it != points.begin()) --it;
    if (it->s == s || frozen) return it->vars;
    const FlowRhs f{&config, config.t0, t_end - config.t0, frozen};
    return from_column(dop853_substep(f, it->s, to_column(it->vars), s - it->s));
}

Trajectory integrate_flow(const HalphenConfig& cfg, cplx t_end, const IntegratorOptions& opt) {
    cfg.validate();
    Trajectory tr;
    tr.config = cfg;
    tr.t_end = t_end;
    const FlowRhs f{&cfg, cfg.t0, t_end - cfg.t0};
    const bool hii = cfg.variant == HalphenVariant::HII_flow;

    TrajectoryPoint start{0.0, cfg.t0, cfg.initial, 0.0};
    tr.points.push_back(start);
    tr.checkpoints.push_back(start);
    CMatrix y = to_column(cfg.initial);
    double err = 0.0;
    if (t_end == cfg.t0) {
        for (int k = 1; k <= cfg.checkpoints; ++k) tr.checkpoints.push_back(start);
        return tr;
    }
    for (int k = 1; k <= cfg.checkpoints; ++k) {
        const double s0 = static_cast<double>(k - 1) / cfg.checkpoints;
        const double s1 = static_cast<double>(k) / cfg.checkpoints;
        auto observe = [&](double s, const CMatrix& yy, double local) {
            err += local;
            std::vector<cplx> vars = from_column(yy);
            if (hii) check_collision(as_triple(vars));
            tr.points.push_back({s, cfg.t0 + s * (t_end - cfg.t0), std::move(vars), err});
        };
        y = integrate_dop853(f, s0, s1, y, opt, observe).y;
        tr.checkpoints.push_back(tr.points.back());
    }
    return tr;
}

Trajectory frozen_trajectory(const HalphenConfig& cfg, cplx t_end) {
    cfg.validate();
    Trajectory tr;
    tr.config = cfg;
    tr.t_end = t_end;
    tr.frozen = true;
    for (int k = 0; k <= cfg.checkpoints; ++k) {
        const double s = static_cast<double>(k) / cfg.checkpoints;
        TrajectoryPoint p{s, cfg.t0 + s * (t_end - cfg.t0), cfg.initial, 0.0};
        tr.points.push_back(p);
        tr.checkpoints.push_back(p);
    }
    return tr;
}

// ---------------------------------------------------------------------------

std::array<cplx, 3> lax_residue_scalars(cplx mu, const std::array<cplx, 3>& x) {
    check_collision(x);
    std::array<cplx, 3> b{};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        b[i] = mu / ((x[i] - x[j]) * (x[i] - x[k]));
    }
    return b;
}

ParamRationalMatrix lax_matrix(const HalphenConfig& cfg, const std::array<Expr, 3>& x, int num_params) {
    ParamRationalMatrix a(2, num_params);
    const Expr mu = Expr::constant(cfg.mu);
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const Expr b = mu / ((x[i] - x[j]) * (x[i] - x[k]));
        ExprMatrix res(2);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                res(r, c) = Expr::constant(cfg.lambdas[i] * cfg.C(r, c));
                if (r == c) res(r, c) = res(r, c) + b;
            }
        a.poles.push_back(PoleLocus{x[i], {std::move(res)}});
    }
    return a;
}

ParamRationalMatrix lax_matrix(const HalphenConfig& cfg, const std::array<cplx, 3>& x) {
    const auto b = lax_residue_scalars(cfg.mu, x);
    ParamRationalMatrix a(2, 0);
    for (int i = 0; i < 3; ++i) {
        ExprMatrix res(2);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                res(r, c) = Expr::constant(cfg.lambdas[i] * cfg.C(r, c) + (r == c ? b[i] : cplx{}));
        a.poles.push_back(PoleLocus{Expr::constant(x[i]), {std::move(res)}});
    }
    return a;
}

std::array<cplx, 3> beta_coefficients(const std::array<cplx, 3>& x) {
    check_collision(x);
    std::array<cplx, 3> beta{};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        beta[i] = (2.0 * x[i] + x[j] + x[k]) / ((x[i] - x[j]) * (x[i] - x[k]));
    }
    return beta;
}

std::array<cplx, 3> residue_scalar_rates(const HalphenConfig& cfg, const std::array<cplx, 3>& x) {
    const auto b = lax_residue_scalars(cfg.mu, x);
    const auto q = flow_rhs(HalphenState{HalphenVariant::HII_flow, {}, {x[0], x[1], x[2]}}, cfg);
    std::array<cplx, 3> rate{};
    for (int i = 0; i < 3; ++i) {
        cplx acc{};
        for (int j = 0; j < 3; ++j)
            if (j != i) acc += (q[i] - q[j]) / (x[i] - x[j]);
        rate[i] = -b[i] * acc;
    }
    return rate;
}

cplx scalar_factor(const Trajectory& traj, int i, cplx t) {
    if (i < 0 || i > 2) throw Error(ErrorCode::InvalidInput, "scalar factor index must be 0..2");
    if (traj.config.variant != HalphenVariant::HII_flow)
        throw Error(ErrorCode::InvalidInput, "scalar factors need an HII_flow trajectory");
    const cplx dt = traj.t_end - traj.config.t0;
    if (dt == cplx{} || t == traj.config.t0) return 1.0;
    const double s_target = ((t - traj.config.t0) / dt).real();
    const FlowRhs f{&traj.config, traj.config.t0, dt, traj.frozen};

    auto beta_at = [&](double a, const CMatrix& ya, double h) {
        const CMatrix y = traj.frozen ? ya : dop853_substep(f, a, ya, h);
        return beta_coefficients(as_triple(from_column(y)))[static_cast<std::size_t>(i)];
    };
    auto piece = [&](double a, const CMatrix& ya, double len) {
        cplx acc{};
        for (std::size_t m = 0; m < kGaussNode.size(); ++m) acc += kGaussWeight[m] * beta_at(a, ya, len * kGaussNode[m]);
        return acc * len;
    };

    cplx integral{};
    for (std::size_t k = 0; k + 1 < traj.points.size() && traj.points[k].s < s_target; ++k) {
        const TrajectoryPoint& p = traj.points[k];
        const double end = std::min(traj.points[k + 1].s, s_target);
        integral += piece(p.s, to_column(p.vars), end - p.s);
    }
    return std::exp(cplx(0.0, -kTwoPi) * traj.config.mu * dt * integral);
}

// ---------------------------------------------------------------------------

namespace {

bool admissible_base(const Trajectory& traj, cplx base, const MonodromyOptions& opt) {
    try {
        for (const auto& cp : traj.checkpoints) {
            const RationalMatrix at = lax_matrix(traj.config, as_triple(cp.vars)).at({});
            for (int i = 0; i < 3; ++i) (void)build_loop(at, LoopSpec{base, i, std::nullopt}, opt);
        }
    } catch (const Error&) {
        return false;
    }
    return true;
}

cplx find_base(const Trajectory& traj, const MonodromyOptions& opt) {
    cplx centroid{};
    std::size_t count = 0;
    for (const auto& cp : traj.checkpoints)
        for (int i = 0; i < 3; ++i, ++count) centroid += cp.vars[static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(count);
    double spread = 0.0;
    for (const auto& cp : traj.checkpoints)
        for (int i = 0; i < 3; ++i) spread = std::max(spread, std::abs(cp.vars[static_cast<std::size_t>(i)] - centroid));
    spread = std::max(spread, 1e-3);
    for (double factor : {0.6, 1.5, 2.5, 4.0})
        for (int k = 0; k < 16; ++k) {
            const cplx base = centroid + std::polar(factor * spread, kTwoPi * (k + 0.3) / 16.0);
            if (admissible_base(traj, base, opt)) return base;
        }
    throw Error(ErrorCode::NearPole, "no base point is admissible at every checkpoint");
}

}  // namespace

EvolutionReport verify_evolution_law(const Trajectory& traj, std::optional<cplx> base, const MonodromyOptions& opt) {
    if (traj.config.variant != HalphenVariant::HII_flow)
        throw Error(ErrorCode::InvalidInput, "the evolution law is stated for the HII_flow variant");
    const HalphenConfig& cfg = traj.config;
    EvolutionReport rep;
    rep.base = base ? *base : find_base(traj, opt);

    for (const auto& p : traj.points) {
        const auto x = as_triple(p.vars);
        const auto rate = residue_scalar_rates(cfg, x);
        const auto beta = beta_coefficients(x);
        for (int i = 0; i < 3; ++i) {
            const double r = std::abs(rate[i] + cfg.mu * beta[i]);
            rep.max_rate_residual = std::max(rep.max_rate_residual, r);
            rep.max_rate_residual_rel = std::max(rep.max_rate_residual_rel, r / (1.0 + std::abs(cfg.mu * beta[i])));
        }
    }

    std::array<cplx, 3> b0{};
    std::array<CMatrix, 3> m0;
    for (std::size_t k = 0; k < traj.checkpoints.size(); ++k) {
        const TrajectoryPoint& cp = traj.checkpoints[k];
        EvolutionCheckpoint ec;
        ec.t = cp.t;
        ec.x = as_triple(cp.vars);
        ec.b = lax_residue_scalars(cfg.mu, ec.x);
        ec.beta = beta_coefficients(ec.x);
        if (k == 0) b0 = ec.b;
        cplx bsum{}, bmom{};
        for (int i = 0; i < 3; ++i) {
            bsum += ec.beta[i];
            bmom += ec.beta[i] * ec.x[i];
        }
        ec.beta_sum = std::abs(bsum);
        ec.beta_moment = std::abs(bmom - 1.0);
        rep.max_beta_sum = std::max(rep.max_beta_sum, ec.beta_sum);
        rep.max_beta_moment = std::max(rep.max_beta_moment, ec.beta_moment);

        const RationalMatrix at = lax_matrix(cfg, ec.x).at({});
        for (int i = 0; i < 3; ++i) {
            const MonodromyRecord rec = monodromy_matrix(at, LoopSpec{rep.base, i, std::nullopt}, opt);
            rep.max_err_estimate = std::max(rep.max_err_estimate, rec.err_estimate);
            ec.monodromy[i] = rec.matrix;
            if (k == 0) m0[i] = rec.matrix;
            ec.c[i] = scalar_factor(traj, i, cp.t);
            ec.c_residue[i] = std::exp(cplx(0.0, kTwoPi) * (ec.b[i] - b0[i]));
            rep.max_c_crosscheck = std::max(rep.max_c_crosscheck, std::abs(ec.c[i] - ec.c_residue[i]));
            ec.residual[i] = inf_norm(rec.matrix - ec.c[i] * m0[i]) / inf_norm(m0[i]);
            rep.max_residual = std::max(rep.max_residual, ec.residual[i]);
        }
        rep.checkpoints.push_back(std::move(ec));
    }
    return rep;
}

}  // namespace parmono
