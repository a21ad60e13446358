#include <doctest.h>

#include <numbers>
#include <random>

#include "parmono/classify.hpp"
#include "parmono/halphen.hpp"
#include "parmono/json_io.hpp"
#include "support.hpp"

using namespace parmono;
using testsupport::fixture;

namespace {

const cplx kTwoPiI(0.0, 2.0 * std::numbers::pi);

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidInput;
}

HalphenConfig config_for(HalphenVariant v, std::vector<cplx> initial) {
    HalphenConfig cfg = load_halphen_config(fixture("halphen_standard.json"));
    cfg.variant = v;
    cfg.initial = std::move(initial);
    return cfg;
}

/// beta_i by solving the 3x3 system sum beta_i / (x - x_i) = (x + sum x_j) / prod (x - x_j)
/// at three sample x.
std::array<cplx, 3> beta_oracle(const std::array<cplx, 3>& xs) {
    const cplx sx = xs[0] + xs[1] + xs[2];
    CMatrix m(3, 3);
    CVector rhs(3);
    const cplx samples[] = {cplx(3.1, 0.7), cplx(-2.3, 1.9), cplx(0.4, -2.8)};
    for (int r = 0; r < 3; ++r) {
        const cplx x = samples[r];
        cplx prod = 1.0;
        for (int i = 0; i < 3; ++i) {
            m(r, i) = 1.0 / (x - xs[static_cast<std::size_t>(i)]);
            prod *= x - xs[static_cast<std::size_t>(i)];
        }
        rhs(r) = (x + sx) / prod;
    }
    const CVector b = m.fullPivLu().solve(rhs);
    return {b(0), b(1), b(2)};
}

}  // namespace

TEST_SUITE("halphen") {
    TEST_CASE("flow right-hand sides") {
        const cplx w(0.7, 0.2);
        HalphenConfig cfg = config_for(HalphenVariant::DHV, {w, w, w, 0.0, 0.0});
        auto d = flow_rhs(HalphenState{HalphenVariant::DHV, 0.0, cfg.initial}, cfg);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(d[static_cast<std::size_t>(i)] + w * w) < 1e-15);
        CHECK(std::abs(d[3]) + std::abs(d[4]) == 0.0);

        cfg = config_for(HalphenVariant::HII_flow, {1.0, 2.0, 3.0});
        d = flow_rhs(HalphenState{HalphenVariant::HII_flow, 0.0, cfg.initial}, cfg);
        CHECK(d[0] == cplx(1.0));
        CHECK(d[1] == cplx(4.0));
        CHECK(d[2] == cplx(9.0));

        cfg.abc = {1.0, 2.0, 3.0};
        d = flow_rhs(HalphenState{HalphenVariant::HII_flow, 0.0, cfg.initial}, cfg);
        // common correction a(x1-x2)^2 + b(x2-x3)^2 + c(x3-x1)^2 = 1 + 2 + 12 = 15
        CHECK(d[0] == cplx(16.0));
        CHECK(d[1] == cplx(19.0));
        CHECK(d[2] == cplx(24.0));

        cfg = config_for(HalphenVariant::HI, {w, w, w});
        d = flow_rhs(HalphenState{HalphenVariant::HI, 0.0, cfg.initial}, cfg);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(d[static_cast<std::size_t>(i)] - w * w / 2.0) < 1e-15);

        // HI pairwise sums: w1' + w2' = w1 w2
        cfg = config_for(HalphenVariant::HI, {0.3, cplx(-0.2, 0.5), 1.1});
        d = flow_rhs(HalphenState{HalphenVariant::HI, 0.0, cfg.initial}, cfg);
        const auto& v = cfg.initial;
        CHECK(std::abs(d[0] + d[1] - v[0] * v[1]) < 1e-15);
        CHECK(std::abs(d[1] + d[2] - v[1] * v[2]) < 1e-15);
        CHECK(std::abs(d[2] + d[0] - v[2] * v[0]) < 1e-15);
    }

    TEST_CASE("flow integration against Riccati closed forms") {
        const auto dhv = load_halphen_config(fixture("halphen_dhv_symmetric.json"));
        const Trajectory tr = integrate_flow(dhv, dhv.t_end);
        REQUIRE(tr.checkpoints.size() == 5);
        for (const auto& p : tr.checkpoints) {
            const cplx expect = 0.5 / (1.0 + 0.5 * p.t);
            for (int i = 0; i < 3; ++i) CHECK(std::abs(p.vars[static_cast<std::size_t>(i)] - expect) < 1e-9);
            CHECK(std::abs(p.vars[3] - p.vars[4]) < 1e-9);
        }

        const HalphenConfig hi = config_for(HalphenVariant::HI, {1.0, 1.0, 1.0});
        const Trajectory th = integrate_flow(hi, 1.0);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(th.checkpoints.back().vars[static_cast<std::size_t>(i)] - 2.0) < 1e-9);

        const auto std_cfg = load_halphen_config(fixture("halphen_standard.json"));
        const Trajectory tx = integrate_flow(std_cfg, std_cfg.t_end);
        for (const auto& p : tx.checkpoints)
            for (int i = 0; i < 3; ++i) {
                const cplx x0 = std_cfg.initial[static_cast<std::size_t>(i)];
                CHECK(std::abs(p.vars[static_cast<std::size_t>(i)] - x0 / (1.0 - x0 * p.t)) < 1e-10);
            }
        CHECK(std::abs(tx.checkpoints.back().t - std_cfg.t_end) == 0.0);
        CHECK(tx.checkpoints.back().err_estimate >= tx.checkpoints.front().err_estimate);
        // dense state_at agrees with the closed form between checkpoints
        const auto mid = tx.state_at(0.37);
        const cplx t = 0.37 * std_cfg.t_end;
        CHECK(std::abs(mid[1] - 1.0 / (1.0 - t)) < 1e-10);
    }

    TEST_CASE("theta = phi is preserved for general omegas") {
        HalphenConfig cfg = config_for(HalphenVariant::DHV, {0.3, cplx(0.5, 0.1), 0.8, 0.2, 0.2});
        const Trajectory tr = integrate_flow(cfg, 0.5);
        for (const auto& p : tr.points) CHECK(std::abs(p.vars[3] - p.vars[4]) < 1e-9);
    }

    TEST_CASE("collisions") {
        CHECK(code_of([] { (void)load_halphen_config(fixture("halphen_collision.json")).validate(); }) ==
              ErrorCode::Collision);
        const auto cfg = load_halphen_config(fixture("halphen_standard.json"));
        // x3 = 2 / (1 - 2t) blows up at t = 1/2.
        HalphenConfig bad = config_for(HalphenVariant::HII_flow, {0.0, 1.0, 2.0});
        const ErrorCode c = code_of([&] { (void)integrate_flow(bad, 0.6); });
        CHECK((c == ErrorCode::Collision || c == ErrorCode::StepUnderflow || c == ErrorCode::NonFinite));
        CHECK(code_of([&] { (void)lax_matrix(cfg, std::array<cplx, 3>{0.0, 0.0, 1.0}); }) == ErrorCode::Collision);
        CHECK(code_of([&] { (void)beta_coefficients({1.0, 1.0, 2.0}); }) == ErrorCode::Collision);
    }

    TEST_CASE("lax matrix residues") {
        const auto cfg = load_halphen_config(fixture("halphen_standard.json"));
        const std::array<cplx, 3> x{0.0, 1.0, -1.0};
        const auto b = lax_residue_scalars(cfg.mu, x);
        CHECK(std::abs(b[0] + 1.0) < 1e-15);
        CHECK(std::abs(b[1] - 0.5) < 1e-15);
        CHECK(std::abs(b[2] - 0.5) < 1e-15);
        const ParamRationalMatrix a = lax_matrix(cfg, x);
        const FuchsianSplit s = fuchsian_split(a);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(std::abs(s.b[i].eval(ParameterPoint{}) - b[i]) < 1e-15);
            CHECK(inf_norm(s.traceless[i].eval(ParameterPoint{}) - cfg.lambdas[i] * cfg.C) < 1e-15);
        }
        // The partial-fraction form equals mu I / prod (x - x_i) + sum lambda_i C / (x - x_i).
        const cplx z(0.3, 0.8);
        CMatrix direct = cfg.mu / ((z - x[0]) * (z - x[1]) * (z - x[2])) * CMatrix::Identity(2, 2);
        for (std::size_t i = 0; i < 3; ++i) direct += cfg.lambdas[i] * cfg.C / (z - x[i]);
        CHECK(inf_norm(a.eval(z, ParameterPoint{}) - direct) < 1e-14);

        HalphenConfig zero_mu = cfg;
        zero_mu.mu = 0.0;
        const FuchsianSplit s0 = fuchsian_split(lax_matrix(zero_mu, x));
        for (const auto& bi : s0.b) CHECK(std::abs(bi.eval(ParameterPoint{})) == 0.0);
    }

    TEST_CASE("beta coefficients") {
        // Worked value at x = (0, 1, -1): beta = (0, 1/2, -1/2).
        const auto b = beta_coefficients({0.0, 1.0, -1.0});
        const auto o = beta_oracle({0.0, 1.0, -1.0});
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(b[i] - o[i]) < 1e-13);
        CHECK(std::abs(b[0]) < 1e-15);
        CHECK(std::abs(b[1] - 0.5) < 1e-15);
        CHECK(std::abs(b[2] + 0.5) < 1e-15);

        std::mt19937_64 rng(0xBE7A);
        for (int k = 0; k < 10; ++k) {
            const std::array<cplx, 3> xs{testsupport::random_disk(rng, 2.0), testsupport::random_disk(rng, 2.0),
                                         testsupport::random_disk(rng, 2.0)};
            const auto bb = beta_coefficients(xs);
            const auto oo = beta_oracle(xs);
            for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(bb[i] - oo[i]) < 1e-9 * (1.0 + std::abs(oo[i])));
            CHECK(std::abs(bb[0] + bb[1] + bb[2]) < 1e-10);
            CHECK(std::abs(bb[0] * xs[0] + bb[1] * xs[1] + bb[2] * xs[2] - 1.0) < 1e-10);

            const cplx s(1.7, -0.4);
            const auto scaled = beta_coefficients({s * xs[0], s * xs[1], s * xs[2]});
            for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(scaled[i] - bb[i] / s) < 1e-10 * (1.0 + std::abs(bb[i])));

            const cplx z = testsupport::random_disk(rng, 3.0);
            const cplx lhs = (z + xs[0] + xs[1] + xs[2]) / ((z - xs[0]) * (z - xs[1]) * (z - xs[2]));
            const cplx rhs = bb[0] / (z - xs[0]) + bb[1] / (z - xs[1]) + bb[2] / (z - xs[2]);
            CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
        }
    }

    TEST_CASE("scalar factor") {
        const auto cfg = load_halphen_config(fixture("halphen_standard.json"));
        const Trajectory tr = integrate_flow(cfg, cfg.t_end);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(scalar_factor(tr, i, cfg.t0) - 1.0) == 0.0);

        HalphenConfig zero_mu = cfg;
        zero_mu.mu = 0.0;
        const Trajectory tz = integrate_flow(zero_mu, cfg.t_end);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(scalar_factor(tz, i, cfg.t_end) - 1.0) == 0.0);

        // Cross-check against exp(2 pi i (b_i(t) - b_i(t0))) on the closed-form trajectory.
        for (const auto& p : tr.checkpoints) {
            std::array<cplx, 3> x0{}, xt{};
            for (std::size_t i = 0; i < 3; ++i) {
                x0[i] = cfg.initial[i];
                xt[i] = x0[i] / (1.0 - x0[i] * p.t);
            }
            const auto b0 = lax_residue_scalars(cfg.mu, x0);
            const auto bt = lax_residue_scalars(cfg.mu, xt);
            for (int i = 0; i < 3; ++i) {
                const cplx expect = std::exp(kTwoPiI * (bt[static_cast<std::size_t>(i)] - b0[static_cast<std::size_t>(i)]));
                CHECK(std::abs(scalar_factor(tr, i, p.t) - expect) < 1e-8);
            }
        }
    }

    TEST_CASE("residue scalar rates follow -mu beta") {
        std::mt19937_64 rng(0x4A7E);
        HalphenConfig cfg = load_halphen_config(fixture("halphen_standard.json"));
        for (int k = 0; k < 10; ++k) {
            cfg.abc = {testsupport::random_disk(rng, 1.0), testsupport::random_disk(rng, 1.0),
                       testsupport::random_disk(rng, 1.0)};
            cfg.mu = testsupport::random_disk(rng, 2.0);
            const std::array<cplx, 3> x{testsupport::random_disk(rng, 2.0), testsupport::random_disk(rng, 2.0),
                                        testsupport::random_disk(rng, 2.0)};
            const auto rate = residue_scalar_rates(cfg, x);
            const auto beta = beta_coefficients(x);
            // finite-difference oracle along the flow direction
            HalphenState st{HalphenVariant::HII_flow, 0.0, {x[0], x[1], x[2]}};
            const auto q = flow_rhs(st, cfg);
            const double h = 1e-4;
            auto b_at = [&](double s) {
                return lax_residue_scalars(cfg.mu, {x[0] + s * q[0], x[1] + s * q[1], x[2] + s * q[2]});
            };
            const auto bp = b_at(h), bm = b_at(-h), bp2 = b_at(h / 2), bm2 = b_at(-h / 2);
            for (std::size_t i = 0; i < 3; ++i) {
                const cplx fd = (4.0 * (bp2[i] - bm2[i]) / h - (bp[i] - bm[i]) / (2.0 * h)) / 3.0;
                CHECK(std::abs(rate[i] - fd) < 1e-6 * (1.0 + std::abs(fd)));
                CHECK(std::abs(rate[i] + cfg.mu * beta[i]) < 1e-8 * (1.0 + std::abs(cfg.mu * beta[i])));
            }
        }
    }

    TEST_CASE("closed-form monodromy oracle for the standard Lax matrix") {
        const auto cfg = load_halphen_config(fixture("halphen_standard.json"));
        const std::array<cplx, 3> x{0.0, 1.0, cplx(0.0, 1.0)};
        const ParamRationalMatrix a = lax_matrix(cfg, x);
        const auto b = lax_residue_scalars(cfg.mu, x);
        for (int i = 0; i < 3; ++i) {
            const MonodromyRecord m = monodromy_matrix(a, LoopSpec{cplx(0.6, -0.4), i, std::nullopt}, ParameterPoint{});
            const auto ii = static_cast<std::size_t>(i);
            CMatrix expect = CMatrix::Zero(2, 2);
            expect(0, 0) = std::exp(kTwoPiI * (b[ii] + cfg.lambdas[ii]));
            expect(1, 1) = std::exp(kTwoPiI * (b[ii] - cfg.lambdas[ii]));
            CHECK(inf_norm(m.matrix - expect) < 1e-8 * std::max(1.0, inf_norm(expect)));
        }
    }

    TEST_CASE("evolution law on the standard configuration") {
        const auto cfg = load_halphen_config(fixture("halphen_standard.json"));
        const Trajectory tr = integrate_flow(cfg, cfg.t_end);
        const EvolutionReport rep = verify_evolution_law(tr);
        CHECK(rep.checkpoints.size() == 5);
        CHECK(rep.max_residual < 1e-6);
        CHECK(rep.max_rate_residual_rel < 1e-8);
        CHECK(rep.max_beta_sum < 1e-10);
        CHECK(rep.max_beta_moment < 1e-10);
        CHECK(rep.max_c_crosscheck < 1e-8);

        const EvolutionReport fixed = verify_evolution_law(tr, cplx(0.6, -0.4));
        CHECK(fixed.base == cplx(0.6, -0.4));
        CHECK(fixed.max_residual < 1e-6);
    }

    TEST_CASE("evolution law: scalar system and frozen negative control") {
        HalphenConfig cfg = load_halphen_config(fixture("halphen_standard.json"));
        cfg.lambdas = {0.0, 0.0, 0.0};
        const EvolutionReport scalar = verify_evolution_law(integrate_flow(cfg, cfg.t_end));
        CHECK(scalar.max_residual < 1e-8);

        const auto std_cfg = load_halphen_config(fixture("halphen_standard.json"));
        const EvolutionReport frozen = verify_evolution_law(frozen_trajectory(std_cfg, std_cfg.t_end));
        CHECK(frozen.max_residual > 1e-2);
    }

    TEST_CASE("evolution law requires the HII flow") {
        const auto dhv = load_halphen_config(fixture("halphen_dhv_symmetric.json"));
        CHECK(code_of([&] { (void)verify_evolution_law(integrate_flow(dhv, 0.1)); }) == ErrorCode::InvalidInput);
        CHECK(code_of([] { (void)parse_variant("DH-VI"); }) == ErrorCode::InvalidInput);
        CHECK(parse_variant("HI") == HalphenVariant::HI);
    }
}
