#include "parmono/json_io.hpp"

#include <fstream>
#include <sstream>

namespace parmono {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
    out << j.dump(2) << '\n';
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

Expr expr_from_json(const json& j, int num_params) {
    if (j.is_string()) return parse_expr(j.get<std::string>(), num_params);
    return Expr::constant(complex_from_json(j));
}

ExprMatrix expr_matrix_from_json(const json& j, int n, int num_params) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, "matrix must have " + std::to_string(n) + " rows");
    ExprMatrix m(n);
    for (int r = 0; r < n; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw Error(ErrorCode::DimensionMismatch, "matrix row must have " + std::to_string(n) + " entries");
        for (int c = 0; c < n; ++c) m(r, c) = expr_from_json(row[static_cast<std::size_t>(c)], num_params);
    }
    return m;
}

json expr_matrix_to_json(const ExprMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.dim(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.dim(); ++c) row.push_back(m(r, c).to_string());
        rows.push_back(std::move(row));
    }
    return rows;
}

// poles + poly of an already sized system
void fill_terms(ParamRationalMatrix& a, const json& j) {
    if (j.contains("poles")) {
        for (const json& p : j.at("poles")) {
            PoleLocus locus;
            locus.location = expr_from_json(require(p, "location"), a.num_params);
            const json& lau = require(p, "laurent");
            if (!lau.is_array() || lau.empty()) bad("pole needs at least one Laurent coefficient");
            for (auto it = lau.rbegin(); it != lau.rend(); ++it)
                locus.laurent.push_back(expr_matrix_from_json(*it, a.dim, a.num_params));
            a.poles.push_back(std::move(locus));
        }
    }
    if (j.contains("poly"))
        for (const json& m : j.at("poly")) a.poly.push_back(expr_matrix_from_json(m, a.dim, a.num_params));
    a.validate();
    prune_identically_zero(a);
}

}  // namespace

cplx complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    if (j.is_string()) return parse_expr(j.get<std::string>(), 0).eval(ParameterPoint{});
    bad("expected a complex value (number, [re, im] or constant expression), got " + j.dump());
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

CMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) bad("expected a matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    CMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

json to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(cplx(m(r, c))));
        rows.push_back(std::move(row));
    }
    return rows;
}

ParameterPoint point_from_json(const json& j, int num_params) {
    if (num_params == 1 && (j.is_number() || j.is_string())) return ParameterPoint{complex_from_json(j)};
    if (!j.is_array() || static_cast<int>(j.size()) != num_params)
        throw Error(ErrorCode::DimensionMismatch, "parameter point must have " + std::to_string(num_params) +
                                                      " coordinates: " + j.dump());
    std::vector<cplx> c;
    for (const json& v : j) c.push_back(complex_from_json(v));
    return ParameterPoint(std::move(c));
}

json to_json(const ParameterPoint& t) {
    json out = json::array();
    for (cplx z : t.coords()) out.push_back(to_json(z));
    return out;
}

// ---------------------------------------------------------------------------

ParamRationalMatrix system_from_json(const json& j) {
    const int n = require(j, "dimension").get<int>();
    const int r = j.value("num_params", 0);
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "dimension must be >= 1");
    ParamRationalMatrix a(n, r);
    fill_terms(a, j);
    return a;
}

json to_json(const ParamRationalMatrix& a) {
    json out = json::object();
    out["dimension"] = a.dim;
    out["num_params"] = a.num_params;
    json poles = json::array();
    for (const PoleLocus& p : a.poles) {
        json lau = json::array();
        for (auto it = p.laurent.rbegin(); it != p.laurent.rend(); ++it) lau.push_back(expr_matrix_to_json(*it));
        poles.push_back(json{{"location", p.location.to_string()}, {"laurent", std::move(lau)}});
    }
    out["poles"] = std::move(poles);
    json poly = json::array();
    for (const ExprMatrix& m : a.poly) poly.push_back(expr_matrix_to_json(m));
    out["poly"] = std::move(poly);
    return out;
}

ParamRationalMatrix load_system(const std::string& path) {
    try {
        return system_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
    }
}

IntegrableSystemSpec integrable_from_json(const json& j) {
    IntegrableSystemSpec spec;
    spec.a_x = system_from_json(j);
    if (j.contains("A_t")) {
        for (const json& d : j.at("A_t")) {
            ParamRationalMatrix m(spec.a_x.dim, spec.a_x.num_params);
            fill_terms(m, d);
            spec.a_t.push_back(std::move(m));
        }
    }
    spec.validate();
    return spec;
}

IntegrableSystemSpec load_integrable(const std::string& path) {
    try {
        return integrable_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
    }
}

TGrid grid_from_json(const json& j, int num_params) {
    if (j.contains("points")) {
        std::vector<ParameterPoint> pts;
        for (const json& p : j.at("points")) pts.push_back(point_from_json(p, num_params));
        return TGrid::from_points(std::move(pts));
    }
    return TGrid::segment(point_from_json(require(j, "start"), num_params),
                          point_from_json(require(j, "end"), num_params), require(j, "steps").get<int>());
}

TGrid load_grid(const std::string& path, int num_params) {
    try {
        return grid_from_json(read_json_file(path), num_params);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

json to_json(const MonodromyRecord& r) {
    json out = json::object();
    out["t"] = to_json(r.t);
    out["loop"] = r.loop;
    if (!r.ok()) {
        out["error"] = std::string(to_string(*r.error));
        out["detail"] = r.detail;
        return out;
    }
    out["M"] = to_json(r.matrix);
    out["err"] = r.err_estimate;
    if (r.det_check) out["det_check"] = *r.det_check;
    return out;
}

json to_json(const ClassificationReport& r) {
    json out = json::object();
    out["verdict"] = to_string(r.verdict);
    json loops = json::array();
    for (const LoopClassification& l : r.loops) {
        json c = json::array();
        for (cplx z : l.c_samples) c.push_back(to_json(z));
        loops.push_back(json{{"loop", l.loop},
                             {"Gamma", to_json(l.gamma)},
                             {"c_samples", std::move(c)},
                             {"max_residual", l.max_residual()},
                             {"iso_residual", l.iso_residual},
                             {"proj_residual", l.proj_residual},
                             {"err", l.err_estimate},
                             {"phase_jump", l.phase_jump}});
    }
    out["loops"] = std::move(loops);
    out["tolerances"] = json{{"iso_tol", r.tolerances.iso_tol}, {"proj_tol", r.tolerances.proj_tol}};
    return out;
}

json to_json(const ProjectiveSplitReport& r) {
    json b = json::array();
    for (const Expr& e : r.split.b) b.push_back(e.to_string());
    return json{{"verdict", to_string(r.verdict)},
                {"b", std::move(b)},
                {"reconstruction_drift", r.reconstruction_drift},
                {"traceless", to_json(r.traceless)},
                {"full", to_json(r.full)}};
}

json to_json(const LocalSolution& s, const ResidualSlope& slope) {
    json series = json::array();
    for (const CMatrix& h : s.series) series.push_back(to_json(h));
    json radii = json::array(), res = json::array();
    for (double v : slope.radii) radii.push_back(v);
    for (double v : slope.residuals) res.push_back(v);
    return json{{"pole", s.pole_index},
                {"t", to_json(s.t)},
                {"location", to_json(s.location)},
                {"exponent", to_json(s.exponent)},
                {"order", s.order()},
                {"series", std::move(series)},
                {"radius_estimate", s.radius_estimate},
                {"eigenvalue_collision", s.eigenvalue_collision},
                {"residual_slope", json{{"slope", slope.slope},
                                        {"points_used", slope.points_used},
                                        {"radii", std::move(radii)},
                                        {"residuals", std::move(res)}}}};
}

// ---------------------------------------------------------------------------

HalphenConfig halphen_config_from_json(const json& j) {
    try {
        HalphenConfig cfg;
        cfg.variant = parse_variant(require(j, "variant").get<std::string>());
        if (j.contains("mu")) cfg.mu = complex_from_json(j.at("mu"));
        if (j.contains("lambdas")) {
            const json& l = j.at("lambdas");
            if (!l.is_array() || l.size() != 3) bad("lambdas must have 3 entries");
            for (std::size_t k = 0; k < 3; ++k) cfg.lambdas[k] = complex_from_json(l[k]);
        }
        if (j.contains("C")) cfg.C = matrix_from_json(j.at("C"));
        if (j.contains("abc")) {
            const json& l = j.at("abc");
            if (!l.is_array() || l.size() != 3) bad("abc must have 3 entries");
            for (std::size_t k = 0; k < 3; ++k) cfg.abc[k] = complex_from_json(l[k]);
        }
        if (j.contains("t0")) cfg.t0 = complex_from_json(j.at("t0"));
        cfg.t_end = complex_from_json(require(j, "t_end"));
        cfg.checkpoints = j.value("checkpoints", 4);

        const json& init = require(j, "initial");
        if (cfg.variant == HalphenVariant::HII_flow) {
            for (const json& v : require(init, "x")) cfg.initial.push_back(complex_from_json(v));
        } else {
            for (const json& v : require(init, "omega")) cfg.initial.push_back(complex_from_json(v));
            if (cfg.variant == HalphenVariant::DHV) {
                cfg.initial.push_back(complex_from_json(require(init, "theta")));
                cfg.initial.push_back(complex_from_json(require(init, "phi")));
            }
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        bad(e.what());
    }
}

HalphenConfig load_halphen_config(const std::string& path) { return halphen_config_from_json(read_json_file(path)); }

json to_json(const EvolutionReport& r) {
    json cps = json::array();
    for (const EvolutionCheckpoint& c : r.checkpoints) {
        json x = json::array(), b = json::array(), beta = json::array(), cc = json::array(), cr = json::array(),
             res = json::array(), mono = json::array();
        for (int i = 0; i < 3; ++i) {
            x.push_back(to_json(c.x[i]));
            b.push_back(to_json(c.b[i]));
            beta.push_back(to_json(c.beta[i]));
            cc.push_back(to_json(c.c[i]));
            cr.push_back(to_json(c.c_residue[i]));
            res.push_back(c.residual[i]);
            mono.push_back(to_json(c.monodromy[i]));
        }
        cps.push_back(json{{"t", to_json(c.t)},
                           {"x", std::move(x)},
                           {"b", std::move(b)},
                           {"beta", std::move(beta)},
                           {"c", std::move(cc)},
                           {"c_from_b", std::move(cr)},
                           {"residual", std::move(res)},
                           {"M", std::move(mono)},
                           {"beta_sum", c.beta_sum},
                           {"beta_moment", c.beta_moment}});
    }
    return json{{"base", to_json(r.base)},
                {"max_residual", r.max_residual},
                {"max_rate_residual", r.max_rate_residual},
                {"max_rate_residual_rel", r.max_rate_residual_rel},
                {"max_beta_sum", r.max_beta_sum},
                {"max_beta_moment", r.max_beta_moment},
                {"max_c_crosscheck", r.max_c_crosscheck},
                {"max_err_estimate", r.max_err_estimate},
                {"checkpoints", std::move(cps)}};
}

}  // namespace parmono
