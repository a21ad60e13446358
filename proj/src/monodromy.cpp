#include "parmono/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace parmono {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double segment_distance(cplx a, cplx b, cplx p) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    const double s = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + s * d));
}

}  // namespace

PathPiece PathPiece::segment(cplx from, cplx to) {
    PathPiece p;
    p.kind_ = Kind::Segment;
    p.a_ = from;
    p.b_ = to;
    return p;
}

PathPiece PathPiece::arc(cplx center, double radius, double theta0, double sweep) {
    PathPiece p;
    p.kind_ = Kind::Arc;
    p.center_ = center;
    p.radius_ = radius;
    p.theta0_ = theta0;
    p.sweep_ = sweep;
    return p;
}

cplx PathPiece::point(double s) const {
    if (kind_ == Kind::Segment) return a_ + s * (b_ - a_);
    return center_ + std::polar(radius_, theta0_ + s * sweep_);
}

cplx PathPiece::tangent(double s) const {
    if (kind_ == Kind::Segment) return b_ - a_;
    return cplx(0.0, sweep_) * std::polar(radius_, theta0_ + s * sweep_);
}

double PathPiece::length() const {
    if (kind_ == Kind::Segment) return std::abs(b_ - a_);
    return radius_ * std::abs(sweep_);
}

double PathPiece::distance_to(cplx p) const {
    if (kind_ == Kind::Segment) return segment_distance(a_, b_, p);
    const double r = std::abs(p - center_);
    if (std::abs(sweep_) >= kTwoPi) return std::abs(r - radius_);
    // Partial arcs: nearest of the radial projection (if inside the sweep) and the endpoints.
    double best = std::min(std::abs(p - point(0.0)), std::abs(p - point(1.0)));
    if (r > 0.0) {
        double rel = std::arg(p - center_) - theta0_;
        if (sweep_ < 0.0) rel = -rel;
        rel = std::fmod(rel, kTwoPi);
        if (rel < 0.0) rel += kTwoPi;
        if (rel <= std::abs(sweep_)) best = std::min(best, std::abs(r - radius_));
    }
    return best;
}

// ---------------------------------------------------------------------------

LoopGeometry build_loop(const RationalMatrix& a, const LoopSpec& loop, const MonodromyOptions& opt) {
    const auto& poles = a.poles();
    const cplx x0 = loop.base;
    if (a.distance_to_poles(x0) < opt.tol.pole_guard_radius)
        throw Error(ErrorCode::NearPole, "base point is a pole");

    LoopGeometry g;
    if (loop.target == LoopSpec::kInfinity) {
        cplx c{};
        for (const auto& p : poles) c += p.location;
        if (!poles.empty()) c /= static_cast<double>(poles.size());
        double spread = 0.0;
        for (const auto& p : poles) spread = std::max(spread, std::abs(p.location - c));
        const double r = loop.radius.value_or(2.0 * std::max(spread, std::abs(x0 - c)) + 1.0);
        if (!(r > spread)) throw Error(ErrorCode::InvalidInput, "loop around infinity does not enclose all poles");
        const cplx dir = std::abs(x0 - c) > 0.0 ? (x0 - c) / std::abs(x0 - c) : cplx(1.0, 0.0);
        const cplx entry = c + r * dir;
        if (std::abs(entry - x0) > 0.0) g.path.push_back(PathPiece::segment(x0, entry));
        g.path.push_back(PathPiece::arc(c, r, std::arg(dir), -kTwoPi));
        if (std::abs(entry - x0) > 0.0) g.path.push_back(PathPiece::segment(entry, x0));
        g.center = c;
        g.radius = r;
        const double margin = opt.path_margin_fraction * (r - spread);
        for (std::size_t j = 0; j < poles.size(); ++j)
            for (const auto& piece : g.path)
                if (piece.distance_to(poles[j].location) < margin)
                    throw Error(ErrorCode::NearPole, "loop around infinity passes within margin of pole " +
                                                         std::to_string(j));
        return g;
    }

    if (loop.target < 0 || static_cast<std::size_t>(loop.target) >= poles.size())
        throw Error(ErrorCode::InvalidInput, "loop target " + std::to_string(loop.target) + " is not a pole");
    const std::size_t ti = static_cast<std::size_t>(loop.target);
    const cplx alpha = poles[ti].location;
    const double to_base = std::abs(x0 - alpha);
    const double to_other = a.distance_to_poles(alpha, ti);
    double r = loop.radius.value_or(std::min(0.5 * to_other, to_base));
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidInput, "loop radius must be positive");
    if (r > to_base * (1.0 + 1e-12)) throw Error(ErrorCode::InvalidInput, "base point lies inside the loop circle");
    r = std::min(r, to_base);

    const cplx dir = (x0 - alpha) / to_base;
    const cplx entry = alpha + r * dir;
    const bool approach = std::abs(entry - x0) > 1e-15 * (1.0 + to_base);
    if (approach) g.path.push_back(PathPiece::segment(x0, entry));
    g.path.push_back(PathPiece::arc(alpha, r, std::arg(dir), kTwoPi));
    if (approach) g.path.push_back(PathPiece::segment(entry, x0));
    g.center = alpha;
    g.radius = r;

    const double margin = opt.path_margin_fraction * r;
    for (std::size_t j = 0; j < poles.size(); ++j) {
        if (j == ti) continue;
        const cplx pj = poles[j].location;
        if (std::abs(pj - alpha) < r)
            throw Error(ErrorCode::NearPole, "pole " + std::to_string(j) + " lies inside the loop circle");
        for (const auto& piece : g.path)
            if (piece.distance_to(pj) < margin)
                throw Error(ErrorCode::NearPole, "loop passes within margin of pole " + std::to_string(j));
    }
    return g;
}

// ---------------------------------------------------------------------------

PathIntegral integrate_along(const RationalMatrix& a, const Path& path, const CMatrix& y0,
                             const IntegratorOptions& opt, const Tolerances& tol) {
    PathIntegral out;
    out.y = y0;
    CMatrix buf(a.dim(), a.dim());
    for (const auto& piece : path) {
        if (piece.length() == 0.0) continue;
        auto rhs = [&](double s, const CMatrix& y) -> CMatrix {
            a.eval_into(piece.point(s), buf, tol.pole_guard_radius);
            return (buf * piece.tangent(s)) * y;
        };
        const IntegrationResult r = integrate_dop853(rhs, 0.0, 1.0, out.y, opt);
        out.y = r.y;
        out.err_estimate += r.err_estimate;
        out.steps += r.steps;
    }
    return out;
}

PathIntegral integrate_along(const ParamRationalMatrix& a, const Path& path, const ParameterPoint& t,
                             const CMatrix& y0, const IntegratorOptions& opt, const Tolerances& tol) {
    return integrate_along(a.at(t, tol), path, y0, opt, tol);
}

// ---------------------------------------------------------------------------

namespace {

MonodromyRecord monodromy_at(const RationalMatrix& at, const LoopSpec& loop, const MonodromyOptions& opt) {
    const LoopGeometry g = build_loop(at, loop, opt);
    const int n = at.dim();
    PathIntegral pi = integrate_along(at, g.path, CMatrix::Identity(n, n), opt.integrator, opt.tol);

    MonodromyRecord rec;
    rec.loop = loop.target;
    rec.err_estimate = pi.err_estimate;
    const cplx det = pi.y.determinant();
    const double scale = std::pow(std::max(1.0, inf_norm(pi.y)), n);
    if (!(std::abs(det) > 1e-12 * scale))
        throw Error(ErrorCode::SingularMonodromy, "monodromy matrix is numerically singular");
    if (loop.target != LoopSpec::kInfinity) {
        const auto& pole = at.poles()[static_cast<std::size_t>(loop.target)];
        bool simple = !pole.laurent.empty();
        for (std::size_t k = 1; k < pole.laurent.size(); ++k)
            if (max_abs(pole.laurent[k]) >= opt.tol.drop_tol) simple = false;
        if (simple) {
            const cplx expected = std::exp(cplx(0.0, kTwoPi) * pole.laurent[0].trace());
            rec.det_check = std::abs(det - expected);
        }
    }
    rec.matrix = std::move(pi.y);
    return rec;
}

}  // namespace

MonodromyRecord monodromy_matrix(const RationalMatrix& a, const LoopSpec& loop, const MonodromyOptions& opt) {
    return monodromy_at(a, loop, opt);
}

MonodromyRecord monodromy_matrix(const ParamRationalMatrix& a, const LoopSpec& loop, const ParameterPoint& t,
                                 const MonodromyOptions& opt) {
    MonodromyRecord rec = monodromy_at(a.at(t, opt.tol), loop, opt);
    rec.t = t;
    return rec;
}

// ---------------------------------------------------------------------------

TGrid TGrid::from_points(std::vector<ParameterPoint> pts) {
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (pts[i] == pts[j]) throw Error(ErrorCode::InvalidInput, "grid points must be distinct");
    TGrid g;
    g.points_ = std::move(pts);
    return g;
}

TGrid TGrid::segment(ParameterPoint start, ParameterPoint end, int steps) {
    if (steps < 1) throw Error(ErrorCode::InvalidInput, "grid steps must be at least 1");
    if (start.size() != end.size()) throw Error(ErrorCode::DimensionMismatch, "grid endpoints differ in arity");
    if (steps > 1 && start == end) throw Error(ErrorCode::InvalidInput, "grid points must be distinct");
    TGrid g;
    g.segment_ = Segment{start, end, steps};
    g.points_.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double s = steps == 1 ? 0.0 : static_cast<double>(k) / (steps - 1);
        std::vector<cplx> c(start.size());
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = start[j] + s * (end[j] - start[j]);
        if (k == steps - 1 && steps > 1) c = std::vector<cplx>(end.coords().begin(), end.coords().end());
        g.points_.emplace_back(std::move(c));
    }
    return g;
}

TGrid TGrid::with_steps(int steps) const {
    if (!segment_) throw Error(ErrorCode::InvalidInput, "only segment grids can be refined");
    return segment(segment_->start, segment_->end, steps);
}

// ---------------------------------------------------------------------------

namespace {

struct Reference {
    bool valid = false;
    cplx center{};
    double radius = 0.0;
};

std::vector<Reference> reference_disks(const ParamRationalMatrix& a, const std::vector<LoopSpec>& loops,
                                       const TGrid& grid, const MonodromyOptions& opt) {
    std::vector<Reference> refs(loops.size());
    if (grid.size() == 0) return refs;
    RationalMatrix at0;
    try {
        at0 = a.at(grid.points().front(), opt.tol);
    } catch (const Error&) {
        return refs;
    }
    for (std::size_t l = 0; l < loops.size(); ++l) {
        if (loops[l].target == LoopSpec::kInfinity) continue;
        try {
            const LoopGeometry g = build_loop(at0, loops[l], opt);
            refs[l] = Reference{true, g.center, g.radius};
        } catch (const Error&) {
        }
    }
    return refs;
}

MonodromyRecord grid_cell(const ParamRationalMatrix& a, const LoopSpec& loop, const Reference& ref,
                          const ParameterPoint& t, const MonodromyOptions& opt) {
    MonodromyRecord rec;
    rec.t = t;
    rec.loop = loop.target;
    try {
        const RationalMatrix at = a.at(t, opt.tol);
        if (ref.valid) {
            const auto& poles = at.poles();
            const auto ti = static_cast<std::size_t>(loop.target);
            if (ti < poles.size() && std::abs(poles[ti].location - ref.center) >= ref.radius)
                throw Error(ErrorCode::PoleMigration, "pole " + std::to_string(ti) + " left its reference disk");
            for (std::size_t j = 0; j < poles.size(); ++j)
                if (j != ti && std::abs(poles[j].location - ref.center) < ref.radius)
                    throw Error(ErrorCode::PoleMigration,
                                "pole " + std::to_string(j) + " entered the disk of pole " + std::to_string(ti));
        }
        MonodromyRecord r = monodromy_at(at, loop, opt);
        r.t = t;
        return r;
    } catch (const Error& e) {
        rec.error = e.code();
        rec.detail = e.detail();
    } catch (const std::exception& e) {
        rec.error = ErrorCode::IntegrationFailure;
        rec.detail = e.what();
    }
    return rec;
}

}  // namespace

std::vector<MonodromyRecord> monodromy_grid_serial(const ParamRationalMatrix& a, const std::vector<LoopSpec>& loops,
                                                   const TGrid& grid, const MonodromyOptions& opt) {
    const auto refs = reference_disks(a, loops, grid, opt);
    std::vector<MonodromyRecord> out;
    out.reserve(grid.size() * loops.size());
    for (const auto& t : grid.points())
        for (std::size_t l = 0; l < loops.size(); ++l) out.push_back(grid_cell(a, loops[l], refs[l], t, opt));
    return out;
}

std::vector<MonodromyRecord> monodromy_grid(const ParamRationalMatrix& a, const std::vector<LoopSpec>& loops,
                                            const TGrid& grid, const MonodromyOptions& opt, int jobs) {
    const auto refs = reference_disks(a, loops, grid, opt);
    const std::size_t nl = loops.size();
    const auto cells = static_cast<long>(grid.size() * nl);
    std::vector<MonodromyRecord> out(static_cast<std::size_t>(cells));
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#else
    (void)jobs;
#endif
    for (long c = 0; c < cells; ++c) {
        const auto ti = static_cast<std::size_t>(c) / nl;
        const auto li = static_cast<std::size_t>(c) % nl;
        out[static_cast<std::size_t>(c)] = grid_cell(a, loops[li], refs[li], grid.points()[ti], opt);
    }
    return out;
}

// ---------------------------------------------------------------------------

double product_relation(const std::vector<MonodromyRecord>& records, const std::vector<int>& ordering) {
    if (ordering.empty()) throw Error(ErrorCode::MissingRecord, "empty ordering");
    CMatrix prod;
    for (int idx : ordering) {
        auto it = std::find_if(records.begin(), records.end(), [&](const MonodromyRecord& r) {
            return r.loop == idx && r.ok();
        });
        if (it == records.end()) throw Error(ErrorCode::MissingRecord, "no record for loop " + std::to_string(idx));
        prod = prod.size() == 0 ? it->matrix : CMatrix(prod * it->matrix);
    }
    return inf_norm(prod - CMatrix::Identity(prod.rows(), prod.cols()));
}

std::vector<int> standard_ordering(const RationalMatrix& a, cplx base) {
    const auto& poles = a.poles();
    cplx centroid{};
    for (const auto& p : poles) centroid += p.location;
    if (!poles.empty()) centroid /= static_cast<double>(poles.size());
    cplx ref = centroid - base;
    ref = std::abs(ref) > 0.0 ? ref / std::abs(ref) : cplx(1.0, 0.0);

    std::vector<std::pair<double, int>> keyed;
    for (std::size_t i = 0; i < poles.size(); ++i)
        keyed.emplace_back(std::arg((poles[i].location - base) * std::conj(ref)), static_cast<int>(i));
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    std::vector<int> out;
    for (const auto& k : keyed) out.push_back(k.second);
    return out;
}

}  // namespace parmono
