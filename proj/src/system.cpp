#include "parmono/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "parmono/error.hpp"

namespace parmono {

// ---------------------------------------------------------------------------
// ExprMatrix
// ---------------------------------------------------------------------------

ExprMatrix ExprMatrix::identity(int n) {
    ExprMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = Expr::constant(1.0);
    return m;
}

ExprMatrix ExprMatrix::from_constant(const CMatrix& c) {
    ExprMatrix m(static_cast<int>(c.rows()));
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            if (c(i, j) != cplx{}) m(i, j) = Expr::constant(c(i, j));
    return m;
}

CMatrix ExprMatrix::eval(const ParameterPoint& t) const {
    CMatrix out(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out(i, j) = (*this)(i, j).eval(t);
    return out;
}

ExprMatrix ExprMatrix::diff(int j) const {
    ExprMatrix out(n_);
    for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k].diff(j);
    return out;
}

bool ExprMatrix::is_structurally_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Expr& e) { return e.is_zero(); });
}

int ExprMatrix::max_param() const {
    int m = 0;
    for (const Expr& e : entries_) m = std::max(m, e.max_param());
    return m;
}

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) {
    ExprMatrix out(a.n_);
    for (std::size_t k = 0; k < a.entries_.size(); ++k) out.entries_[k] = a.entries_[k] + b.entries_[k];
    return out;
}

ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b) {
    ExprMatrix out(a.n_);
    for (std::size_t k = 0; k < a.entries_.size(); ++k) out.entries_[k] = a.entries_[k] - b.entries_[k];
    return out;
}

ExprMatrix operator*(const Expr& s, const ExprMatrix& m) {
    ExprMatrix out(m.n_);
    for (std::size_t k = 0; k < m.entries_.size(); ++k) out.entries_[k] = s * m.entries_[k];
    return out;
}

// ---------------------------------------------------------------------------
// RationalMatrix
// ---------------------------------------------------------------------------

RationalMatrix::RationalMatrix(int dim, std::vector<NumericPole> poles, std::vector<CMatrix> poly)
    : dim_(dim), poles_(std::move(poles)), poly_(std::move(poly)) {}

void RationalMatrix::eval_into(cplx x, CMatrix& out, double guard) const {
    out.setZero(dim_, dim_);
    // Horner on the polynomial part.
    for (auto it = poly_.rbegin(); it != poly_.rend(); ++it) {
        out *= x;
        out += *it;
    }
    for (const NumericPole& p : poles_) {
        const cplx u = x - p.location;
        if (std::abs(u) < guard)
            throw Error(ErrorCode::NearPole, "x within guard radius of pole at (" + std::to_string(p.location.real()) +
                                                 ", " + std::to_string(p.location.imag()) + ")");
        const cplx inv = 1.0 / u;
        cplx w = inv;
        for (const CMatrix& l : p.laurent) {
            out += w * l;
            w *= inv;
        }
    }
}

CMatrix RationalMatrix::eval(cplx x, double guard) const {
    CMatrix out;
    eval_into(x, out, guard);
    return out;
}

double RationalMatrix::distance_to_poles(cplx x, std::optional<std::size_t> skip) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poles_.size(); ++i) {
        if (skip && *skip == i) continue;
        d = std::min(d, std::abs(x - poles_[i].location));
    }
    return d;
}

// ---------------------------------------------------------------------------
// ParamRationalMatrix
// ---------------------------------------------------------------------------

int ParamRationalMatrix::max_pole_order() const noexcept {
    int m = 0;
    for (const PoleLocus& p : poles) m = std::max(m, p.order());
    return m;
}

void ParamRationalMatrix::validate() const {
    if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "dimension must be >= 1");
    if (num_params < 0) throw Error(ErrorCode::InvalidInput, "num_params must be >= 0");
    auto check = [&](const ExprMatrix& m, const char* what) {
        if (m.dim() != dim)
            throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has dimension " +
                                                          std::to_string(m.dim()) + ", expected " +
                                                          std::to_string(dim));
        if (m.max_param() > num_params)
            throw Error(ErrorCode::ParamOutOfRange, std::string(what) + " references t" +
                                                        std::to_string(m.max_param()));
    };
    for (const PoleLocus& p : poles) {
        if (p.location.max_param() > num_params)
            throw Error(ErrorCode::ParamOutOfRange, "pole location references t" +
                                                        std::to_string(p.location.max_param()));
        for (const ExprMatrix& l : p.laurent) check(l, "Laurent coefficient");
    }
    for (const ExprMatrix& m : poly) check(m, "polynomial coefficient");
}

RationalMatrix ParamRationalMatrix::at(const ParameterPoint& t, const Tolerances& tol) const {
    if (static_cast<int>(t.size()) != num_params)
        throw Error(ErrorCode::DimensionMismatch, "parameter point has " + std::to_string(t.size()) +
                                                      " coordinates, expected " + std::to_string(num_params));
    std::vector<NumericPole> np;
    np.reserve(poles.size());
    for (const PoleLocus& p : poles) {
        NumericPole q;
        q.location = p.location.eval(t);
        for (const NumericPole& other : np)
            if (std::abs(other.location - q.location) < tol.collision_tol)
                throw Error(ErrorCode::PoleCollision, "two pole locations coincide at this parameter point");
        q.laurent.reserve(p.laurent.size());
        for (const ExprMatrix& l : p.laurent) q.laurent.push_back(l.eval(t));
        np.push_back(std::move(q));
    }
    std::vector<CMatrix> pp;
    pp.reserve(poly.size());
    for (const ExprMatrix& m : poly) pp.push_back(m.eval(t));
    return RationalMatrix(dim, std::move(np), std::move(pp));
}

CMatrix ParamRationalMatrix::eval(cplx x, const ParameterPoint& t, const Tolerances& tol) const {
    return at(t, tol).eval(x, tol.pole_guard_radius);
}

namespace {

void trim_trailing_zero(std::vector<ExprMatrix>& v) {
    while (!v.empty() && v.back().is_structurally_zero()) v.pop_back();
}

void drop_empty_loci(ParamRationalMatrix& a) {
    for (PoleLocus& p : a.poles) trim_trailing_zero(p.laurent);
    std::erase_if(a.poles, [](const PoleLocus& p) { return p.laurent.empty(); });
    trim_trailing_zero(a.poly);
}

}  // namespace

ParamRationalMatrix dt_matrix(const ParamRationalMatrix& a, int j) {
    if (j < 1 || j > a.num_params)
        throw Error(ErrorCode::ParamOutOfRange, "dt_matrix index " + std::to_string(j) + " outside 1.." +
                                                    std::to_string(a.num_params));
    ParamRationalMatrix out(a.dim, a.num_params);
    for (const PoleLocus& p : a.poles) {
        PoleLocus q;
        q.location = p.location;
        const Expr dalpha = p.location.diff(j);
        const int m = p.order();
        q.laurent.assign(m + 1, ExprMatrix(a.dim));
        for (int k = 1; k <= m; ++k) {
            const ExprMatrix& l = p.laurent[k - 1];
            q.laurent[k - 1] = q.laurent[k - 1] + l.diff(j);
            // d/dt (x - alpha)^{-k} = k alpha' (x - alpha)^{-k-1}
            q.laurent[k] = q.laurent[k] + (Expr::constant(static_cast<double>(k)) * dalpha) * l;
        }
        out.poles.push_back(std::move(q));
    }
    for (const ExprMatrix& m : a.poly) out.poly.push_back(m.diff(j));
    drop_empty_loci(out);
    return out;
}

ParamRationalMatrix dx_matrix(const ParamRationalMatrix& a) {
    ParamRationalMatrix out(a.dim, a.num_params);
    for (const PoleLocus& p : a.poles) {
        PoleLocus q;
        q.location = p.location;
        const int m = p.order();
        q.laurent.assign(m + 1, ExprMatrix(a.dim));
        for (int k = 1; k <= m; ++k)
            q.laurent[k] = Expr::constant(-static_cast<double>(k)) * p.laurent[k - 1];
        out.poles.push_back(std::move(q));
    }
    for (std::size_t p = 1; p < a.poly.size(); ++p)
        out.poly.push_back(Expr::constant(static_cast<double>(p)) * a.poly[p]);
    drop_empty_loci(out);
    return out;
}

void prune_identically_zero(ParamRationalMatrix& a, std::uint64_t seed) {
    constexpr int kPoints = 20;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<ParameterPoint> pts;
    for (int k = 0; k < kPoints; ++k) {
        std::vector<cplx> c(a.num_params);
        for (cplx& z : c) z = {u(rng), u(rng)};
        pts.emplace_back(std::move(c));
    }
    auto vanishes = [&](const Expr& e) {
        if (e.is_zero()) return true;
        int finite = 0;
        for (const ParameterPoint& t : pts) {
            try {
                if (std::abs(e.eval(t)) > 1e-14) return false;
                ++finite;
            } catch (const Error&) {
            }
        }
        return finite > 0;
    };
    auto prune = [&](ExprMatrix& m) {
        for (int i = 0; i < m.dim(); ++i)
            for (int j = 0; j < m.dim(); ++j)
                if (!m(i, j).is_zero() && vanishes(m(i, j))) m(i, j) = Expr();
    };
    for (PoleLocus& p : a.poles)
        for (ExprMatrix& l : p.laurent) prune(l);
    for (ExprMatrix& m : a.poly) prune(m);
    drop_empty_loci(a);
}

std::vector<PoleOrder> pole_orders(const ParamRationalMatrix& a, const ParameterPoint& t, const Tolerances& tol) {
    const RationalMatrix at = a.at(t, tol);
    std::vector<PoleOrder> out;
    for (const NumericPole& p : at.poles()) {
        int order = 0;
        for (int k = static_cast<int>(p.laurent.size()); k >= 1; --k) {
            if (max_abs(p.laurent[k - 1]) > tol.drop_tol) {
                order = k;
                break;
            }
        }
        out.push_back({p.location, order});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

cplx draw_disk(std::mt19937_64& rng, cplx center, double radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(rng));
    const double th = 2.0 * std::numbers::pi * u(rng);
    return center + std::polar(r, th);
}

}  // namespace

std::vector<Sample> draw_samples(std::span<const ParamRationalMatrix* const> systems, int num_params,
                                 std::size_t t_count, std::size_t x_per_t, std::uint64_t seed,
                                 const SampleDomain& domain) {
    std::mt19937_64 rng(seed);
    std::vector<Sample> out;
    out.reserve(t_count * x_per_t);
    const std::size_t max_t_attempts = 10 * std::max<std::size_t>(t_count, 1);
    std::size_t t_attempts = 0;
    std::size_t accepted_t = 0;

    while (accepted_t < t_count) {
        if (t_attempts++ >= max_t_attempts)
            throw Error(ErrorCode::SamplingExhausted, "could not find " + std::to_string(t_count) +
                                                          " admissible parameter points");
        std::vector<cplx> c(num_params);
        for (int k = 0; k < num_params; ++k) {
            const cplx center = k < static_cast<int>(domain.t_center.size()) ? domain.t_center[k] : cplx{};
            c[k] = draw_disk(rng, center, domain.t_radius);
        }
        ParameterPoint t(std::move(c));

        std::vector<RationalMatrix> snapshots;
        try {
            for (const ParamRationalMatrix* s : systems) snapshots.push_back(s->at(t));
        } catch (const Error&) {
            continue;
        }

        std::vector<Sample> xs;
        std::size_t x_attempts = 0;
        while (xs.size() < x_per_t && x_attempts++ < 10 * std::max<std::size_t>(x_per_t, 1)) {
            const cplx x = draw_disk(rng, domain.x_center, domain.x_radius);
            bool ok = true;
            for (const RationalMatrix& s : snapshots)
                if (s.distance_to_poles(x) < domain.pole_margin) ok = false;
            if (!ok) continue;
            try {
                for (const RationalMatrix& s : snapshots) {
                    const CMatrix v = s.eval(x);
                    if (!all_finite(v)) ok = false;
                }
            } catch (const Error&) {
                ok = false;
            }
            if (ok) xs.push_back({x, t});
        }
        if (xs.size() < x_per_t) continue;
        out.insert(out.end(), xs.begin(), xs.end());
        ++accepted_t;
    }
    return out;
}

double sampled_difference(const ParamRationalMatrix& a, const ParamRationalMatrix& b, const SampleDomain& domain) {
    if (a.dim != b.dim || a.num_params != b.num_params)
        throw Error(ErrorCode::DimensionMismatch, "systems differ in dimension or parameter count");
    const int order = std::max(a.max_pole_order(), b.max_pole_order());
    const int npoles = static_cast<int>(std::max(a.poles.size(), b.poles.size()));
    const int degree = std::max({a.poly_degree(), b.poly_degree(), 0});
    const std::size_t s = static_cast<std::size_t>(2 * (order * npoles + degree) + 8);
    const ParamRationalMatrix* sys[] = {&a, &b};
    double worst = 0.0;
    for (const Sample& p : draw_samples(sys, a.num_params, s, 1, 0xA11CE, domain))
        worst = std::max(worst, inf_norm(a.eval(p.x, p.t) - b.eval(p.x, p.t)));
    return worst;
}

// ---------------------------------------------------------------------------
// Gauge
// ---------------------------------------------------------------------------

GaugeTransform::GaugeTransform(ParamRationalMatrix p) : p_(std::move(p)), dp_(dx_matrix(p_)) {
    p_.validate();
    const ParamRationalMatrix* sys[] = {&p_};
    const auto samples = draw_samples(sys, p_.num_params, 20, 1, 0x6A06E);
    for (const Sample& s : samples) {
        const CMatrix m = p_.eval(s.x, s.t);
        if (std::abs(m.determinant()) > 1e-12 * std::max(1.0, std::pow(inf_norm(m), m.rows()))) return;
    }
    throw Error(ErrorCode::SingularGauge, "det P vanishes at every sampled point");
}

GaugeReport::GaugeReport(ParamRationalMatrix a, GaugeTransform p, std::vector<Sample> samples)
    : a_(std::move(a)), p_(std::move(p)), samples_(std::move(samples)) {}

CMatrix GaugeReport::transformed(cplx x, const ParameterPoint& t) const {
    const CMatrix pm = p_.matrix().eval(x, t);
    Eigen::FullPivLU<CMatrix> lu(pm);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularGauge, "P(x,t) is singular at a sample");
    const CMatrix pinv = lu.inverse();
    return p_.derivative().eval(x, t) * pinv + pm * a_.eval(x, t) * pinv;
}

double GaugeReport::residual(const ParamRationalMatrix& candidate) const {
    double worst = 0.0;
    for (const Sample& s : samples_)
        worst = std::max(worst, inf_norm(candidate.eval(s.x, s.t) - transformed(s.x, s.t)));
    return worst;
}

GaugeReport apply_gauge(const ParamRationalMatrix& a, const GaugeTransform& p, std::size_t x_samples,
                        std::size_t t_samples, std::uint64_t seed, const SampleDomain& domain) {
    if (a.dim != p.matrix().dim)
        throw Error(ErrorCode::DimensionMismatch, "gauge and system dimensions differ");
    const ParamRationalMatrix* sys[] = {&a, &p.matrix(), &p.derivative()};
    auto samples = draw_samples(sys, a.num_params, t_samples, x_samples, seed, domain);
    return GaugeReport(a, p, std::move(samples));
}

}  // namespace parmono
