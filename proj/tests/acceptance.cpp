#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "parmono/classify.hpp"
#include "parmono/commands.hpp"
#include "parmono/halphen.hpp"
#include "parmono/json_io.hpp"
#include "parmono/local.hpp"
#include "parmono/monodromy.hpp"
#include "support.hpp"

using namespace parmono;
using testsupport::fixture;

namespace {

const cplx kTwoPiI(0.0, 2.0 * std::numbers::pi);

// Pinned tolerances.
constexpr double kEx11Tol = 1e-8;
constexpr double kEx11Seconds = 5.0;
constexpr double kEx32Tol = 1e-8;
constexpr double kEx32Seconds = 2.0;
constexpr double kGaugeTol = 1e-10;
constexpr double kIntegrableTol = 1e-12;
constexpr double kNonabelianTol = 1e-12;
constexpr double kZcDecision = 1e-9;
constexpr double kFdDecision = 1e-6;
constexpr double kIsoTol = 1e-7;
constexpr double kSplitTol = 1e-12;
constexpr double kTracelessTol = 1e-14;
constexpr double kDriftTol = 1e-6;
constexpr double kEvolutionTol = 1e-6;
constexpr double kRateTol = 1e-8;
constexpr double kBetaTol = 1e-10;
constexpr double kHalphenSeconds = 60.0;
constexpr double kEigenTol = 1e-6;
constexpr int kSeriesOrder = 20;
constexpr double kDerivTol = 1e-6;
constexpr double kPropertyTol = 1e-6;

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Check criterion1() {
    Check v;
    const auto start = std::chrono::steady_clock::now();
    const auto a = load_system(fixture("scalar_power.json"));
    const TGrid grid = load_grid(fixture("grid_unit_9.json"), 1);
    const auto recs = monodromy_grid(a, {LoopSpec{0.5, 0, std::nullopt}}, grid);
    const double secs = seconds_since(start);
    double worst = 0.0;
    for (const auto& r : recs) worst = std::max(worst, std::abs(r.matrix(0, 0) - std::exp(kTwoPiI * r.t[0])));
    v.require(recs.size() == 9, "9 grid points");
    v.require(worst < kEx11Tol, "max error");
    v.require(secs < kEx11Seconds, "runtime");
    v.detail << "max|m0 - e^(2 pi i t)| = " << worst << " over " << recs.size() << " points, " << secs << " s";
    return v;
}

Check criterion2() {
    Check v;
    const auto start = std::chrono::steady_clock::now();
    const auto a = load_system(fixture("jordan_log.json"));
    const MonodromyRecord m = monodromy_matrix(a, LoopSpec{1.0, 0, std::nullopt}, ParameterPoint{});
    const double secs = seconds_since(start);
    CMatrix expect = CMatrix::Identity(2, 2);
    expect(0, 1) = kTwoPiI;
    const double err = (m.matrix - expect).cwiseAbs().maxCoeff();
    v.require(err < kEx32Tol, "entrywise error");
    v.require(secs < kEx32Seconds, "runtime");
    v.detail << "max entry error = " << err << ", " << secs << " s";
    return v;
}

Check criterion3() {
    Check v;
    const auto a = load_system(fixture("gauge_A.json"));
    const auto b = load_system(fixture("gauge_B.json"));
    const GaugeTransform p(load_system(fixture("gauge_P.json")));
    const GaugeReport rep = apply_gauge(a, p, 10, 10, 42);
    const double res = rep.residual(b);
    v.require(rep.samples().size() == 100, "100 samples");
    v.require(res < kGaugeTol, "gauge residual");
    bool orders = true;
    for (double t : {0.1, 0.25, 0.4}) {
        orders = orders && pole_orders(a, ParameterPoint{t})[0].order == 2;
        orders = orders && pole_orders(b, ParameterPoint{t})[0].order == 1;
    }
    v.require(orders, "pole orders 2 and 1");
    v.detail << "residual = " << res << " over " << rep.samples().size() << " samples, orders A=2 B=1";
    return v;
}

Check criterion4() {
    Check v;
    const auto c = load_integrable(fixture("constant_c.json"));
    const auto na = load_integrable(fixture("nonabelian.json"));
    const double rc = zero_curvature_residual(c, 0, 1, 50, 0xA11CE);
    const double rn = zero_curvature_residual(na, 0, 1, 50, 0xA11CE);
    v.require(rc < kIntegrableTol, "integrable residual");
    v.require(std::abs(rn - 1.0) < kNonabelianTol, "nonabelian residual");

    std::mt19937_64 rng(0x2C4);
    int correct = 0;
    for (int k = 0; k < 20; ++k) {
        IntegrableSystemSpec s = c;
        const bool keep = k % 2 == 0;
        if (keep) {
            // scalar residue g on A_x, -g on A_t, plus f(t) I on A_t
            const cplx g = testsupport::random_disk(rng, 0.8);
            const cplx w = testsupport::random_disk(rng, 1.0);
            s.a_x.poles[0].laurent[0] = s.a_x.poles[0].laurent[0] + Expr::constant(g) * ExprMatrix::identity(2);
            s.a_t[0].poles[0].laurent[0] = s.a_t[0].poles[0].laurent[0] - Expr::constant(g) * ExprMatrix::identity(2);
            s.a_t[0].poly.push_back(Expr::exp(Expr::constant(w) * Expr::param(1)) * ExprMatrix::identity(2));
        } else {
            CMatrix q(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) q(i, j) = testsupport::random_disk(rng, 0.5);
            q(0, 1) += 0.5;
            if (k % 4 == 1) {
                s.a_t[0].poly.push_back(Expr::param(1) * ExprMatrix::from_constant(q));
            } else {
                s.a_x.poles[0].laurent[0] = s.a_x.poles[0].laurent[0] + ExprMatrix::from_constant(q);
            }
        }
        const bool claimed = zero_curvature_residual(s, 0, 1, 50, 0xA11CE + static_cast<std::uint64_t>(k)) < kZcDecision;
        double fd = 0.0;
        for (int p = 0; p < 5; ++p) {
            const cplx x = cplx(2.0, 0.0) + testsupport::random_disk(rng, 0.5);
            const cplx t = testsupport::random_disk(rng, 0.2);
            fd = std::max(fd, testsupport::zero_curvature_fd(s.a_x, s.a_t[0], x, t));
        }
        const bool oracle = fd < kFdDecision;
        if (claimed == oracle && oracle == keep) ++correct;
    }
    v.require(correct == 20, "perturbation classification");
    v.detail << "integrable = " << rc << ", |nonabelian - 1| = " << std::abs(rn - 1.0) << ", perturbations " << correct
             << "/20";
    return v;
}

Check criterion5() {
    Check v;
    const auto c = load_integrable(fixture("constant_c.json"));
    const double zc = zero_curvature_residual(c, 0, 1, 50, 0xA11CE);
    const auto recs = monodromy_grid(c.a_x, {LoopSpec{2.0, 0, std::nullopt}}, load_grid(fixture("grid_short_5.json"), 1));
    const ClassificationReport rep = classify_monodromy(recs);
    v.require(recs.size() == 5, "5-point grid");
    v.require(zc < kIntegrableTol, "zero curvature");
    v.require(rep.verdict == parmono::Verdict::Isomonodromic, "isomonodromic verdict");
    v.require(rep.loops[0].iso_residual < kIsoTol, "iso residual");
    v.detail << "zero curvature = " << zc << ", iso residual = " << rep.loops[0].iso_residual << ", verdict "
             << to_string(rep.verdict);
    return v;
}

Check criterion6() {
    Check v;
    const auto dh = load_system(fixture("dh_lax.json"));
    const FuchsianSplit s = fuchsian_split(dh);
    const double mu = 1.0;
    const double lambda[] = {1.0, -0.5, -0.5};
    CMatrix cmat = CMatrix::Zero(2, 2);
    cmat(0, 0) = 1.0;
    cmat(1, 1) = -1.0;
    double b_err = 0.0, b_tl = 0.0;
    std::mt19937_64 rng(6);
    for (int k = 0; k < 20; ++k) {
        const ParameterPoint t{testsupport::random_disk(rng, 0.3)};
        std::array<cplx, 3> x;
        for (std::size_t i = 0; i < 3; ++i) x[i] = s.locations[i].eval(t);
        for (std::size_t i = 0; i < 3; ++i) {
            cplx prod = 1.0;
            for (std::size_t j = 0; j < 3; ++j)
                if (j != i) prod *= x[i] - x[j];
            const cplx expect = mu / prod;
            b_err = std::max(b_err, std::abs(s.b[i].eval(t) - expect) / std::max(1.0, std::abs(expect)));
            b_tl = std::max(b_tl, inf_norm(s.traceless[i].eval(t) - lambda[i] * cmat));
        }
    }
    const TGrid g = load_grid(fixture("grid_dh_5.json"), 1);
    std::vector<LoopSpec> loops;
    for (int i = 0; i < 3; ++i) loops.push_back(LoopSpec{cplx(0.6, -0.4), i, std::nullopt});
    const ProjectiveSplitReport rep = projective_split_check(dh, loops, g);
    const ClassificationReport full = classify_monodromy(monodromy_grid(dh, loops, g));
    v.require(b_err < kSplitTol, "b_i");
    v.require(b_tl < kTracelessTol, "B_i = lambda_i C");
    v.require(full.verdict == parmono::Verdict::ProjectivelyIsomonodromic, "classify verdict");
    v.require(rep.reconstruction_drift < kDriftTol, "drift");
    v.detail << "b error = " << b_err << ", B error = " << b_tl << ", drift = " << rep.reconstruction_drift
             << ", verdict " << to_string(full.verdict);
    return v;
}

Check criterion7() {
    Check v;
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = load_halphen_config(fixture("halphen_standard.json"));
    const Trajectory tr = integrate_flow(cfg, cfg.t_end);
    const EvolutionReport rep = verify_evolution_law(tr);
    const double secs = seconds_since(start);
    v.require(cfg.checkpoints == 4 && rep.checkpoints.size() == 5, "4 checkpoints after t0");
    v.require(rep.max_residual < kEvolutionTol, "evolution residual");
    v.require(rep.max_rate_residual < kRateTol, "db/dt + mu beta");
    v.require(rep.max_beta_sum < kBetaTol, "sum beta");
    v.require(rep.max_beta_moment < kBetaTol, "sum beta x - 1");
    v.require(secs < kHalphenSeconds, "runtime");
    v.detail << "evolution = " << rep.max_residual << ", rate = " << rep.max_rate_residual
             << ", |sum beta| = " << rep.max_beta_sum << ", |sum beta x - 1| = " << rep.max_beta_moment << ", "
             << secs << " s";
    return v;
}

Check criterion8() {
    Check v;
    std::mt19937_64 rng(0xF80B);
    const std::vector<cplx> poles{0.0, cplx(1.5, 0.3), cplx(-1.0, 1.2)};
    double worst_eig = 0.0;
    double min_slope = std::numeric_limits<double>::infinity();
    int done = 0;
    while (done < 10) {
        const int n = 2 + done % 2;
        const ParamRationalMatrix a = testsupport::random_fuchsian(rng, n, poles, 0.35);
        const CMatrix r = a.poles[0].laurent[0].eval(ParameterPoint{});
        if (!testsupport::comfortably_nonresonant(r, kSeriesOrder, 1e-3)) continue;
        const MonodromyRecord rec = monodromy_matrix(a, LoopSpec{cplx(0.4, -0.3), 0, std::nullopt}, ParameterPoint{});
        const CVector expect =
            testsupport::eigenvalues(r).unaryExpr([](cplx l) { return std::exp(kTwoPiI * l); });
        worst_eig = std::max(worst_eig, testsupport::spectrum_distance(testsupport::eigenvalues(rec.matrix), expect));
        LocalOptions opt;
        opt.order = kSeriesOrder;
        const LocalSolution sol = frobenius_solution(a, 0, ParameterPoint{}, opt);
        const ResidualSlope rs = residual_slope(a, sol);
        min_slope = std::min(min_slope, std::isnan(rs.slope) ? -1.0 : rs.slope);
        ++done;
    }
    v.require(worst_eig < kEigenTol, "eigenvalues");
    v.require(min_slope >= kSeriesOrder - 0.5, "residual slope");
    v.detail << "eigenvalue distance = " << worst_eig << ", min slope = " << min_slope << " (N = " << kSeriesOrder
             << ")";
    return v;
}

Check criterion9() {
    Check v;

    std::mt19937_64 rng(0xE49);
    double deriv = 0.0;
    int checked = 0;
    for (int attempts = 0; checked < 100 && attempts < 20000; ++attempts) {
        const Expr e = testsupport::random_expr(rng, 5, 2);
        std::vector<cplx> t{testsupport::random_disk(rng, 1.0), testsupport::random_disk(rng, 1.0)};
        bool fine = testsupport::well_conditioned(e, t);
        for (double h : {1e-5, -1e-5})
            for (cplx dir : {cplx(1, 0), cplx(0, 1)}) {
                std::vector<cplx> tp = t;
                tp[0] += h * dir;
                tp[1] += h * dir;
                fine = fine && testsupport::well_conditioned(e, tp);
            }
        if (!fine) continue;
        for (int j = 1; j <= 2; ++j) {
            const cplx d = e.diff(j).eval(t);
            const cplx fd = testsupport::centered_difference(e, t, j, 1e-5, cplx(1, 0));
            deriv = std::max(deriv, std::abs(d - fd) / (1.0 + std::abs(d)));
        }
        ++checked;
    }
    v.require(checked == 100 && deriv <= kDerivTol, "expr derivatives");

    std::mt19937_64 frng(0xF4A3E);
    const std::vector<cplx> poles{0.0, cplx(1.5, 0.3), cplx(-1.0, 1.2)};
    double frame = 0.0, det = 0.0, halving = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const ParamRationalMatrix a = testsupport::random_fuchsian(frng, 2 + trial % 2, poles, 0.4);
        const RationalMatrix at = a.at(ParameterPoint{});
        for (int i = 0; i < 3; ++i) {
            const MonodromyRecord m1 = monodromy_matrix(at, LoopSpec{cplx(0.4, -1.2), i, std::nullopt});
            const MonodromyRecord m2 = monodromy_matrix(at, LoopSpec{cplx(2.5, 2.0), i, std::nullopt});
            frame = std::max(frame, testsupport::spectrum_distance(testsupport::eigenvalues(m1.matrix),
                                                                   testsupport::eigenvalues(m2.matrix)));
            const cplx tr = at.poles()[static_cast<std::size_t>(i)].laurent[0].trace();
            det = std::max(det, std::abs(m1.matrix.determinant() - std::exp(kTwoPiI * tr)));
            MonodromyOptions fine;
            fine.integrator.rtol /= 2.0;
            fine.integrator.atol /= 2.0;
            const MonodromyRecord mf = monodromy_matrix(at, LoopSpec{cplx(0.4, -1.2), i, std::nullopt}, fine);
            halving = std::max(halving, inf_norm(mf.matrix - m1.matrix) / std::max(m1.err_estimate, 1e-12));
        }
    }
    v.require(frame <= kPropertyTol, "frame invariance");
    v.require(det <= kPropertyTol, "determinant identity");
    v.require(halving <= 1.0, "tolerance halving");

    const auto dh = load_system(fixture("dh_lax.json"));
    double product = 0.0;
    const TGrid dh_grid = load_grid(fixture("grid_dh_5.json"), 1);
    for (const ParameterPoint& tp : dh_grid.points()) {
        const cplx base(0.6, -0.4);
        std::vector<MonodromyRecord> recs;
        for (int i = 0; i < 3; ++i) recs.push_back(monodromy_matrix(dh, LoopSpec{base, i, std::nullopt}, tp));
        product = std::max(product, product_relation(recs, standard_ordering(dh.at(tp), base)));
    }
    v.require(product < kPropertyTol, "DH product relation");

    cli::MonodromyArgs args;
    args.system = fixture("dh_lax.json");
    args.grid = fixture("grid_dh_5.json");
    args.base = "0.6-0.4*i";
    auto rerun = [&](int jobs) {
        args.common.jobs = jobs;
        std::ostringstream out, err;
        const int code = cli::cmd_monodromy(args, out, err);
        json doc = json::parse(out.str());
        doc["manifest"].erase("wall_clock");
        return std::to_string(code) + doc.dump();
    };
    const std::string first = rerun(1);
    const bool same = first == rerun(1) && first == rerun(3);
    v.require(same, "deterministic re-run");

    v.detail << "derivative = " << deriv << " (" << checked << " trees), frame = " << frame << ", det = " << det
             << ", halving ratio = " << halving << ", DH product = " << product
             << ", re-run identical = " << (same ? "yes" : "no");
    return v;
}

}  // namespace

int main() {
    const std::vector<std::function<Check()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9};
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Check v;
        try {
            v = criteria[k]();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "exception: " << e.what();
        }
        if (!v.pass) ++failed;
        std::printf("criterion %zu: %s  %s\n", k + 1, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    }
    return failed == 0 ? 0 : 1;
}
