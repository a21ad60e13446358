// parmono: parameterized monodromy toolkit.
//
//   parmono monodromy  --system A.json --grid grid.json --base 0.5
//   parmono classify   --system A.json --grid grid.json --base 2
//   parmono integrable --system spec.json --samples 50
//   parmono halphen    --config dh.json --out report.json
//   parmono frobenius  --system A.json --pole 0 --t 0.3 --order 20

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "parmono/commands.hpp"

namespace {

using namespace parmono::cli;

void add_common(CLI::App* app, CommonArgs& c) {
    app->add_option("--out", c.out, "Output JSON path (default stdout)");
    app->add_option("--rtol", c.rtol, "Relative integration tolerance")->capture_default_str();
    app->add_option("--atol", c.atol, "Absolute integration tolerance")->capture_default_str();
    app->add_option("--seed", c.seed, "Sampling seed")->capture_default_str();
    app->add_option("--jobs", c.jobs, "Worker threads (default: $PARMONO_JOBS, else all cores)");
}

void add_run(CLI::App* app, MonodromyArgs& m) {
    app->add_option("--system", m.system, "System JSON file")->required();
    app->add_option("--grid", m.grid, "Grid JSON file or inline JSON object")->required();
    app->add_option("--base", m.base, "Base point x0 (constant expression)")->capture_default_str();
    app->add_option("--loops", m.loops, "'all' or comma list of pole indices and 'inf'")->capture_default_str();
    app->add_option("--radius", m.radius, "Loop radius (default: automatic per t)");
    add_common(app, m.common);
}

int env_jobs() {
    if (const char* v = std::getenv("PARMONO_JOBS")) {
        try {
            return std::max(0, std::stoi(v));
        } catch (const std::exception&) {
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameterized monodromy of linear ODE systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    MonodromyArgs mono;
    auto* c_mono = app.add_subcommand("monodromy", "Monodromy matrices over a parameter grid");
    add_run(c_mono, mono);

    ClassifyArgs cls;
    auto* c_cls = app.add_subcommand("classify", "Isomonodromy / projective isomonodromy verdict");
    add_run(c_cls, cls.run);
    c_cls->add_option("--tol-iso", cls.tol_iso, "Isomonodromy tolerance")->capture_default_str();
    c_cls->add_option("--tol-proj", cls.tol_proj, "Projective tolerance")->capture_default_str();
    c_cls->add_option("--max-refinements", cls.max_refinements, "Midpoint refinements of a segment grid on phase jumps")
        ->capture_default_str();

    IntegrableArgs integ;
    auto* c_int = app.add_subcommand("integrable", "Zero-curvature test of a system with t-directions");
    c_int->add_option("--system", integ.system, "System JSON file with an A_t list")->required();
    c_int->add_option("--samples", integ.samples, "Sample count")->capture_default_str();
    c_int->add_option("--zc-tol", integ.zc_tol, "Residual threshold")->capture_default_str();
    add_common(c_int, integ.common);

    HalphenArgs hal;
    auto* c_hal = app.add_subcommand("halphen", "Darboux-Halphen flow and monodromy evolution law");
    c_hal->add_option("--config", hal.config, "Config JSON file")->required();
    c_hal->add_option("--csv", hal.csv, "Trajectory CSV path (default: next to --out)");
    c_hal->add_option("--base", hal.base, "Base point for the monodromy loops");
    add_common(c_hal, hal.common);

    FrobeniusArgs fro;
    auto* c_fro = app.add_subcommand("frobenius", "Local solution at a simple pole");
    c_fro->add_option("--system", fro.system, "System JSON file")->required();
    c_fro->add_option("--pole", fro.pole, "Pole index")->capture_default_str();
    c_fro->add_option("--t", fro.t, "Parameter point: JSON list or constant expression");
    c_fro->add_option("--order", fro.order, "Truncation order N")->capture_default_str();
    c_fro->add_option("--growth-angle", fro.growth_angle, "Also run the growth probe along this ray angle");
    c_fro->add_option("--growth-samples", fro.growth_samples, "Points in the growth fit")->capture_default_str();
    add_common(c_fro, fro.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const int jobs = env_jobs();
    for (CommonArgs* c : {&mono.common, &cls.run.common, &integ.common, &hal.common, &fro.common})
        if (c->jobs <= 0) c->jobs = jobs;

    if (c_mono->parsed()) return cmd_monodromy(mono, std::cout, std::cerr);
    if (c_cls->parsed()) return cmd_classify(cls, std::cout, std::cerr);
    if (c_int->parsed()) return cmd_integrable(integ, std::cout, std::cerr);
    if (c_hal->parsed()) return cmd_halphen(hal, std::cout, std::cerr);
    if (c_fro->parsed()) return cmd_frobenius(fro, std::cout, std::cerr);
    return 1;
}
