#include "parmono/commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "parmono/json_io.hpp"

namespace parmono::cli {

namespace {

using Clock = std::chrono::steady_clock;

class Manifest {
public:
    Manifest(std::string command, const CommonArgs& common) : command_(std::move(command)), common_(common) {
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::ostringstream s;
        s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        started_ = s.str();
    }

    void input(const std::string& key, const std::string& value) { inputs_[key] = value; }
    void tolerance(const std::string& key, double value) { tolerances_[key] = value; }

    [[nodiscard]] json finish() const {
        json tol = tolerances_;
        tol["rtol"] = common_.rtol;
        tol["atol"] = common_.atol;
        const double secs = std::chrono::duration<double>(Clock::now() - t0_).count();
        return json{{"command", command_},
                    {"version", kToolVersion},
                    {"inputs", inputs_},
                    {"tolerances", std::move(tol)},
                    {"seed", common_.seed},
                    {"output", common_.out.value_or("-")},
                    {"wall_clock", json{{"started", started_}, {"seconds", secs}}}};
    }

private:
    std::string command_;
    CommonArgs common_;
    json inputs_ = json::object();
    json tolerances_ = json::object();
    std::string started_;
    Clock::time_point t0_ = Clock::now();
};

void emit(const CommonArgs& common, const json& j, std::ostream& out) {
    if (common.out) {
        write_json_file(*common.out, j);
    } else {
        out << j.dump(2) << '\n';
    }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << json{{"error", std::string(to_string(e.code()))}, {"detail", e.detail()}}.dump() << '\n';
    } catch (const std::exception& e) {
        err << json{{"error", "INVALID_INPUT"}, {"detail", e.what()}}.dump() << '\n';
    }
    return 1;
}

cplx parse_constant(const std::string& src) { return parse_expr(src, 0).eval(ParameterPoint{}); }

TGrid resolve_grid(const std::string& spec, int num_params) {
    const auto first = spec.find_first_not_of(" \t\n");
    if (first != std::string::npos && spec[first] == '{') {
        try {
            return grid_from_json(json::parse(spec), num_params);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidInput, std::string("inline grid: ") + e.what());
        }
    }
    return load_grid(spec, num_params);
}

std::vector<LoopSpec> resolve_loops(const std::string& spec, std::size_t num_poles, cplx base,
                                    std::optional<double> radius) {
    std::vector<LoopSpec> loops;
    if (spec == "all") {
        for (std::size_t i = 0; i < num_poles; ++i) loops.push_back({base, static_cast<int>(i), radius});
        return loops;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf") {
            loops.push_back({base, LoopSpec::kInfinity, std::nullopt});
            continue;
        }
        std::size_t used = 0;
        int idx = -1;
        try {
            idx = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || idx < 0 || static_cast<std::size_t>(idx) >= num_poles)
            throw Error(ErrorCode::InvalidInput, "bad loop '" + item + "'");
        loops.push_back({base, idx, radius});
    }
    if (loops.empty()) throw Error(ErrorCode::InvalidInput, "no loops selected");
    return loops;
}

MonodromyOptions monodromy_options(const CommonArgs& c) {
    MonodromyOptions opt;
    opt.integrator.rtol = c.rtol;
    opt.integrator.atol = c.atol;
    return opt;
}

json records_json(const std::vector<MonodromyRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    return arr;
}

std::string csv_number(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

}  // namespace

int cmd_monodromy(const MonodromyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest man("monodromy", args.common);
        man.input("system", args.system);
        man.input("grid", args.grid);
        man.input("base", args.base);
        man.input("loops", args.loops);
        const ParamRationalMatrix a = load_system(args.system);
        const TGrid grid = resolve_grid(args.grid, a.num_params);
        const cplx base = parse_constant(args.base);
        const auto loops = resolve_loops(args.loops, a.poles.size(), base, args.radius);
        const auto records = monodromy_grid(a, loops, grid, monodromy_options(args.common), args.common.jobs);
        bool partial = false;
        for (const auto& r : records) partial = partial || !r.ok();
        emit(args.common, json{{"manifest", man.finish()}, {"records", records_json(records)}}, out);
        return partial ? 2 : 0;
    });
}

int cmd_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const MonodromyArgs& run = args.run;
        Manifest man("classify", run.common);
        man.input("system", run.system);
        man.input("grid", run.grid);
        man.input("base", run.base);
        man.input("loops", run.loops);
        man.tolerance("tol_iso", args.tol_iso);
        man.tolerance("tol_proj", args.tol_proj);

        const ParamRationalMatrix a = load_system(run.system);
        TGrid grid = resolve_grid(run.grid, a.num_params);
        const cplx base = parse_constant(run.base);
        const auto loops = resolve_loops(run.loops, a.poles.size(), base, run.radius);
        const MonodromyOptions opt = monodromy_options(run.common);
        const ClassifyTolerances tol{args.tol_iso, args.tol_proj};

        auto records = monodromy_grid(a, loops, grid, opt, run.common.jobs);
        ClassificationReport rep = classify_monodromy(records, tol);
        int refinements = 0;
        while (rep.phase_jump && grid.is_segment() && refinements < args.max_refinements) {
            grid = grid.with_steps(2 * static_cast<int>(grid.size()) - 1);
            records = monodromy_grid(a, loops, grid, opt, run.common.jobs);
            rep = classify_monodromy(records, tol);
            ++refinements;
        }

        json body = to_json(rep);
        json doc = json{{"manifest", man.finish()}};
        for (auto& [k, v] : body.items()) doc[k] = v;
        doc["grid_points"] = grid.size();
        doc["refinements"] = refinements;

        bool fuchsian = true;
        try {
            (void)fuchsian_split(a);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NotFuchsian) throw;
            fuchsian = false;
        }
        bool finite_loops = true;
        for (const auto& l : loops) finite_loops = finite_loops && l.target != LoopSpec::kInfinity;
        if (fuchsian && finite_loops)
            doc["projective_split"] = to_json(projective_split_check(a, loops, grid, tol, opt, run.common.jobs));
        emit(run.common, doc, out);
        return 0;
    });
}

int cmd_integrable(const IntegrableArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest man("integrable", args.common);
        man.input("system", args.system);
        man.tolerance("zc_tol", args.zc_tol);
        const IntegrableSystemSpec spec = load_integrable(args.system);
        const int r = spec.a_x.num_params;
        json pairs = json::array();
        bool integrable = true;
        double worst = 0.0;
        for (int j = 0; j <= r; ++j)
            for (int k = j + 1; k <= r; ++k) {
                const double res = zero_curvature_residual(spec, j, k, args.samples, args.common.seed);
                integrable = integrable && res < args.zc_tol;
                worst = std::max(worst, res);
                pairs.push_back(json{{"j", j}, {"k", k}, {"residual", res}});
            }
        emit(args.common,
             json{{"manifest", man.finish()},
                  {"integrable", integrable},
                  {"max_residual", worst},
                  {"zc_tol", args.zc_tol},
                  {"samples", args.samples},
                  {"pairs", std::move(pairs)}},
             out);
        return 0;
    });
}

int cmd_halphen(const HalphenArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest man("halphen", args.common);
        man.input("config", args.config);
        const json raw = read_json_file(args.config);
        const HalphenConfig cfg = halphen_config_from_json(raw);
        IntegratorOptions iopt;
        iopt.rtol = args.common.rtol;
        iopt.atol = args.common.atol;
        const Trajectory traj = integrate_flow(cfg, cfg.t_end, iopt);

        json doc = json{{"manifest", man.finish()}, {"variant", to_string(cfg.variant)}};
        json cps = json::array();
        for (const auto& cp : traj.checkpoints) {
            json vars = json::array();
            for (cplx v : cp.vars) vars.push_back(to_json(v));
            cps.push_back(json{{"t", to_json(cp.t)}, {"vars", std::move(vars)}, {"err", cp.err_estimate}});
        }
        doc["checkpoints"] = std::move(cps);
        doc["steps"] = traj.points.size() - 1;

        const bool hii = cfg.variant == HalphenVariant::HII_flow;
        if (hii) {
            std::optional<cplx> base;
            if (args.base) {
                base = parse_constant(*args.base);
            } else if (raw.contains("base")) {
                base = complex_from_json(raw.at("base"));
            }
            doc["evolution"] = to_json(verify_evolution_law(traj, base, monodromy_options(args.common)));
        } else if (cfg.variant == HalphenVariant::DHV) {
            double gap = 0.0;
            for (const auto& p : traj.points) gap = std::max(gap, std::abs(p.vars[3] - p.vars[4]));
            doc["max_theta_phi_gap"] = gap;
        }

        std::optional<std::string> csv_path = args.csv;
        if (!csv_path && args.common.out)
            csv_path = std::filesystem::path(*args.common.out).replace_extension(".csv").string();
        if (csv_path) {
            std::ofstream csv(*csv_path);
            if (!csv) throw Error(ErrorCode::InvalidInput, "cannot write " + *csv_path);
            const std::vector<std::string> names =
                cfg.variant == HalphenVariant::DHV ? std::vector<std::string>{"w1", "w2", "w3", "theta", "phi"}
                : hii ? std::vector<std::string>{"x1", "x2", "x3"}
                      : std::vector<std::string>{"w1", "w2", "w3"};
            std::vector<std::string> cols{"t"};
            cols.insert(cols.end(), names.begin(), names.end());
            if (hii)
                for (const char* g : {"b", "beta", "c"})
                    for (int i = 1; i <= 3; ++i) cols.push_back(g + std::to_string(i));
            for (std::size_t k = 0; k < cols.size(); ++k)
                csv << (k ? "," : "") << cols[k] << "_re," << cols[k] << "_im";
            csv << '\n';
            for (const auto& p : traj.points) {
                std::vector<cplx> row{p.t};
                row.insert(row.end(), p.vars.begin(), p.vars.end());
                if (hii) {
                    const std::array<cplx, 3> x{p.vars[0], p.vars[1], p.vars[2]};
                    for (cplx v : lax_residue_scalars(cfg.mu, x)) row.push_back(v);
                    for (cplx v : beta_coefficients(x)) row.push_back(v);
                    for (int i = 0; i < 3; ++i) row.push_back(scalar_factor(traj, i, p.t));
                }
                for (std::size_t k = 0; k < row.size(); ++k)
                    csv << (k ? "," : "") << csv_number(row[k].real()) << ',' << csv_number(row[k].imag());
                csv << '\n';
            }
            doc["csv"] = *csv_path;
        }
        emit(args.common, doc, out);
        return 0;
    });
}

int cmd_frobenius(const FrobeniusArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest man("frobenius", args.common);
        man.input("system", args.system);
        man.input("t", args.t);
        man.input("pole", std::to_string(args.pole));
        const ParamRationalMatrix a = load_system(args.system);
        ParameterPoint t;
        const auto first = args.t.find_first_not_of(" \t");
        if (first != std::string::npos && args.t[first] == '[') {
            t = point_from_json(json::parse(args.t), a.num_params);
        } else if (a.num_params == 1) {
            t = ParameterPoint{parse_constant(args.t)};
        } else if (a.num_params == 0 && args.t.empty()) {
            t = ParameterPoint{};
        } else {
            throw Error(ErrorCode::DimensionMismatch, "give t as a JSON list of " + std::to_string(a.num_params) +
                                                          " complex values");
        }
        if (args.pole < 0) throw Error(ErrorCode::InvalidInput, "pole index must be non-negative");
        LocalOptions lopt;
        lopt.order = args.order;
        const LocalSolution sol = frobenius_solution(a, static_cast<std::size_t>(args.pole), t, lopt);
        const ResidualSlope slope = residual_slope(a, sol);
        json doc = json{{"manifest", man.finish()}};
        const json body = to_json(sol, slope);
        for (const auto& [k, v] : body.items()) doc[k] = v;
        doc["local_monodromy"] = to_json(local_monodromy_from_exponent(sol));
        if (args.growth_angle) {
            GrowthOptions g;
            g.integrator.rtol = args.common.rtol;
            g.integrator.atol = args.common.atol;
            const GrowthReport gr = growth_probe(a, static_cast<std::size_t>(args.pole), t, *args.growth_angle,
                                                 args.growth_samples, g);
            doc["growth"] = json{{"slope", gr.slope}, {"fit_rms", gr.fit_rms}, {"classification", gr.classification()}};
        }
        emit(args.common, doc, out);
        return 0;
    });
}

}  // namespace parmono::cli
