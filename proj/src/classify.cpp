#include "parmono/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace parmono {

const ParamRationalMatrix& IntegrableSystemSpec::direction(int j) const {
    if (j == 0) return a_x;
    if (j < 0 || j > static_cast<int>(a_t.size()))
        throw Error(ErrorCode::MissingDirection, "no matrix for direction " + std::to_string(j));
    return a_t[static_cast<std::size_t>(j - 1)];
}

void IntegrableSystemSpec::validate() const {
    a_x.validate();
    if (static_cast<int>(a_t.size()) < a_x.num_params)
        throw Error(ErrorCode::MissingDirection, "expected " + std::to_string(a_x.num_params) +
                                                     " t-direction matrices, got " + std::to_string(a_t.size()));
    for (const auto& m : a_t) {
        if (m.dim != a_x.dim || m.num_params != a_x.num_params)
            throw Error(ErrorCode::DimensionMismatch, "t-direction matrix differs in dimension or parameter count");
        m.validate();
    }
}

namespace {

ParamRationalMatrix partial(const ParamRationalMatrix& m, int j) { return j == 0 ? dx_matrix(m) : dt_matrix(m, j); }

}  // namespace

double zero_curvature_residual(const IntegrableSystemSpec& spec, int j, int k, std::size_t samples,
                               std::uint64_t seed, const SampleDomain& domain) {
    if (j == k) throw Error(ErrorCode::InvalidInput, "direction indices must differ");
    const int r = spec.a_x.num_params;
    if (j < 0 || k < 0 || j > r || k > r) throw Error(ErrorCode::InvalidInput, "direction index out of range");
    const ParamRationalMatrix& aj = spec.direction(j);
    const ParamRationalMatrix& ak = spec.direction(k);
    const ParamRationalMatrix djk = partial(ak, j);
    const ParamRationalMatrix dkj = partial(aj, k);
    const ParamRationalMatrix* sys[] = {&aj, &ak, &djk, &dkj};
    double worst = 0.0;
    for (const Sample& s : draw_samples(sys, r, samples, 1, seed, domain)) {
        const CMatrix vj = aj.eval(s.x, s.t);
        const CMatrix vk = ak.eval(s.x, s.t);
        const CMatrix res = djk.eval(s.x, s.t) - dkj.eval(s.x, s.t) - commutator(vj, vk);
        worst = std::max(worst, inf_norm(res));
    }
    return worst;
}

// ---------------------------------------------------------------------------

ParamRationalMatrix FuchsianSplit::traceless_system() const {
    ParamRationalMatrix out(dim, num_params);
    for (std::size_t i = 0; i < locations.size(); ++i) out.poles.push_back(PoleLocus{locations[i], {traceless[i]}});
    return out;
}

FuchsianSplit fuchsian_split(const ParamRationalMatrix& a) {
    for (const ExprMatrix& m : a.poly)
        if (!m.is_structurally_zero()) throw Error(ErrorCode::NotFuchsian, "system has a polynomial part");
    FuchsianSplit out;
    out.dim = a.dim;
    out.num_params = a.num_params;
    const Expr inv_n = Expr::constant(1.0 / a.dim);
    for (std::size_t i = 0; i < a.poles.size(); ++i) {
        const PoleLocus& p = a.poles[i];
        if (p.order() != 1)
            throw Error(ErrorCode::NotFuchsian, "pole " + std::to_string(i) + " has order " +
                                                    std::to_string(p.order()));
        const ExprMatrix& ai = p.laurent[0];
        Expr tr;
        for (int d = 0; d < a.dim; ++d) tr = tr + ai(d, d);
        const Expr b = a.dim == 1 ? tr : tr * inv_n;
        ExprMatrix bi = ai;
        for (int d = 0; d < a.dim; ++d) bi(d, d) = ai(d, d) - b;
        out.locations.push_back(p.location);
        out.b.push_back(b);
        out.traceless.push_back(std::move(bi));
    }
    return out;
}

// ---------------------------------------------------------------------------

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Isomonodromic: return "isomonodromic";
        case Verdict::ProjectivelyIsomonodromic: return "projectively_isomonodromic";
        case Verdict::Neither: return "neither";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

ClassificationReport classify_monodromy(const std::vector<MonodromyRecord>& records, const ClassifyTolerances& tol) {
    std::vector<ParameterPoint> ts;
    std::vector<int> loop_ids;
    for (const auto& r : records) {
        if (std::find(ts.begin(), ts.end(), r.t) == ts.end()) ts.push_back(r.t);
        if (std::find(loop_ids.begin(), loop_ids.end(), r.loop) == loop_ids.end()) loop_ids.push_back(r.loop);
    }
    if (ts.size() < 2) throw Error(ErrorCode::InsufficientGrid, "classification needs at least 2 grid points");

    ClassificationReport rep;
    rep.tolerances = tol;
    constexpr double kJump = 0.75 * std::numbers::pi;

    for (int id : loop_ids) {
        std::vector<const MonodromyRecord*> row;
        for (const auto& t : ts) {
            auto it = std::find_if(records.begin(), records.end(),
                                   [&](const MonodromyRecord& r) { return r.loop == id && r.t == t; });
            if (it == records.end() || !it->ok())
                throw Error(ErrorCode::MissingRecord, "loop " + std::to_string(id) + " lacks a valid record at some t");
            row.push_back(&*it);
        }
        LoopClassification lc;
        lc.loop = id;
        lc.gamma = row.front()->matrix;
        const auto n = lc.gamma.rows();
        Eigen::FullPivLU<CMatrix> lu(lc.gamma);
        if (!lu.isInvertible() || std::abs(lc.gamma.determinant()) <= 1e-12 * std::pow(std::max(1.0, inf_norm(lc.gamma)), n))
            throw Error(ErrorCode::SingularReference, "reference monodromy of loop " + std::to_string(id) + " is singular");
        const CMatrix inv0 = lu.inverse();
        const double scale = std::max(1.0, inf_norm(lc.gamma));
        for (const MonodromyRecord* r : row) {
            lc.t.push_back(r->t);
            lc.err_estimate = std::max(lc.err_estimate, r->err_estimate / scale);
            lc.iso_residual = std::max(lc.iso_residual, inf_norm(r->matrix - lc.gamma) / scale);
            const CMatrix nmat = r->matrix * inv0;
            const cplx c = nmat.trace() / static_cast<double>(n);
            lc.c_samples.push_back(c);
            lc.proj_residual =
                std::max(lc.proj_residual, inf_norm(nmat - c * CMatrix::Identity(n, n)) / scale);
        }
        for (std::size_t k = 1; k < lc.c_samples.size(); ++k) {
            const cplx q = lc.c_samples[k] / lc.c_samples[k - 1];
            if (std::abs(std::arg(q)) > kJump) lc.phase_jump = true;
        }
        lc.iso = lc.iso_residual < tol.iso_tol;
        lc.projective = lc.proj_residual < tol.proj_tol;
        rep.phase_jump = rep.phase_jump || lc.phase_jump;
        rep.loops.push_back(std::move(lc));
    }

    const bool all_iso = std::all_of(rep.loops.begin(), rep.loops.end(), [](const auto& l) { return l.iso; });
    const bool all_proj = std::all_of(rep.loops.begin(), rep.loops.end(), [](const auto& l) { return l.projective; });
    // A failing residual that integration error alone could explain does not decide.
    auto noisy = [](double residual, const LoopClassification& l) { return residual <= 10.0 * l.err_estimate; };
    if (all_iso) {
        rep.verdict = Verdict::Isomonodromic;
    } else if (all_proj) {
        const bool doubt = std::any_of(rep.loops.begin(), rep.loops.end(),
                                       [&](const auto& l) { return !l.iso && noisy(l.iso_residual, l); });
        rep.verdict = doubt ? Verdict::Inconclusive : Verdict::ProjectivelyIsomonodromic;
    } else {
        const bool doubt = std::any_of(rep.loops.begin(), rep.loops.end(),
                                       [&](const auto& l) { return !l.projective && noisy(l.proj_residual, l); });
        rep.verdict = doubt ? Verdict::Inconclusive : Verdict::Neither;
    }
    return rep;
}

// ---------------------------------------------------------------------------

ProjectiveSplitReport projective_split_check(const ParamRationalMatrix& a, const std::vector<LoopSpec>& loops,
                                             const TGrid& grid, const ClassifyTolerances& tol,
                                             const MonodromyOptions& opt, int jobs) {
    ProjectiveSplitReport rep;
    rep.split = fuchsian_split(a);
    for (const auto& l : loops)
        if (l.target < 0 || static_cast<std::size_t>(l.target) >= a.poles.size())
            throw Error(ErrorCode::InvalidInput, "projective split check needs loops around finite poles");

    const ParamRationalMatrix b = rep.split.traceless_system();
    const auto traceless_records = monodromy_grid(b, loops, grid, opt, jobs);
    rep.traceless = classify_monodromy(traceless_records, tol);
    const auto full_records = monodromy_grid(a, loops, grid, opt, jobs);
    rep.full = classify_monodromy(full_records, tol);

    std::map<int, CMatrix> ref;
    for (const auto& r : full_records) {
        const cplx bi = rep.split.b[static_cast<std::size_t>(r.loop)].eval(r.t);
        const CMatrix k = r.matrix * std::exp(cplx(0.0, -2.0 * std::numbers::pi) * bi);
        auto it = ref.find(r.loop);
        if (it == ref.end()) {
            ref.emplace(r.loop, k);
            continue;
        }
        rep.reconstruction_drift =
            std::max(rep.reconstruction_drift, inf_norm(k - it->second) / std::max(1.0, inf_norm(it->second)));
    }

    if (rep.full.verdict == Verdict::Isomonodromic) {
        rep.verdict = Verdict::Isomonodromic;
    } else if (rep.traceless.verdict == Verdict::Isomonodromic && rep.reconstruction_drift < tol.proj_tol) {
        rep.verdict = Verdict::ProjectivelyIsomonodromic;
    } else {
        rep.verdict = rep.full.verdict;
    }
    return rep;
}

}  // namespace parmono
