#pragma once

// Parameterized monodromy by analytic continuation along loops in the x-plane.
//
// Frame: the fundamental solution is normalised to Y(x0) = I at the loop base
// point, so M is the value of the continued solution back at x0. Other frames
// give conjugate matrices.
//
// Composition: traversing loop a and then loop b maps to M_b * M_a. Hence
// product_relation(ordering = {i1, ..., im}) = M_i1 * ... * M_im corresponds
// to traversing gamma_im first and gamma_i1 last.

#include <optional>
#include <string>
#include <vector>

#include "parmono/error.hpp"
#include "parmono/integrator.hpp"
#include "parmono/system.hpp"

namespace parmono {

class PathPiece {
public:
    enum class Kind { Segment, Arc };

    static PathPiece segment(cplx from, cplx to);
    /// Circle arc around `center`; sweep > 0 is counterclockwise.
    static PathPiece arc(cplx center, double radius, double theta0, double sweep);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] cplx point(double s) const;    // s in [0, 1]
    [[nodiscard]] cplx tangent(double s) const;  // dx/ds
    [[nodiscard]] double length() const;
    [[nodiscard]] double distance_to(cplx p) const;

private:
    Kind kind_ = Kind::Segment;
    cplx a_{}, b_{};
    cplx center_{};
    double radius_ = 0.0, theta0_ = 0.0, sweep_ = 0.0;
};

using Path = std::vector<PathPiece>;

struct LoopSpec {
    static constexpr int kInfinity = -1;

    cplx base{};
    int target = 0;                  // pole index, or kInfinity
    std::optional<double> radius;    // nullopt = auto
};

struct LoopGeometry {
    Path path;
    cplx center{};
    double radius = 0.0;
};

struct MonodromyOptions {
    IntegratorOptions integrator{};
    double path_margin_fraction = 0.25;
    Tolerances tol{};
};

/// Segment - full circle - segment. Auto radius is half the distance from the
/// target to the nearest other pole, capped by the distance to the base point.
/// Throws NEAR_POLE when the path passes within margin of another pole.
[[nodiscard]] LoopGeometry build_loop(const RationalMatrix& a, const LoopSpec& loop,
                                      const MonodromyOptions& opt = {});

struct PathIntegral {
    CMatrix y;
    double err_estimate = 0.0;
    std::size_t steps = 0;
};

/// Solves Y' = A(x(s)) x'(s) Y along the pieces of `path`.
[[nodiscard]] PathIntegral integrate_along(const RationalMatrix& a, const Path& path, const CMatrix& y0,
                                           const IntegratorOptions& opt, const Tolerances& tol = {});
[[nodiscard]] PathIntegral integrate_along(const ParamRationalMatrix& a, const Path& path, const ParameterPoint& t,
                                           const CMatrix& y0, const IntegratorOptions& opt,
                                           const Tolerances& tol = {});

struct MonodromyRecord {
    ParameterPoint t;
    int loop = 0;
    CMatrix matrix;
    double err_estimate = 0.0;
    std::optional<double> det_check;  // |det M - exp(2 pi i tr residue)| for simple targets
    std::optional<ErrorCode> error;   // set for flagged grid cells
    std::string detail;

    [[nodiscard]] bool ok() const noexcept { return !error.has_value(); }
};

[[nodiscard]] MonodromyRecord monodromy_matrix(const ParamRationalMatrix& a, const LoopSpec& loop,
                                               const ParameterPoint& t, const MonodromyOptions& opt = {});
[[nodiscard]] MonodromyRecord monodromy_matrix(const RationalMatrix& a, const LoopSpec& loop,
                                               const MonodromyOptions& opt = {});

/// Parameter grid: explicit points or a straight segment with `steps` points
/// (endpoints included; steps == 1 yields the start only).
class TGrid {
public:
    static TGrid from_points(std::vector<ParameterPoint> pts);
    static TGrid segment(ParameterPoint start, ParameterPoint end, int steps);

    [[nodiscard]] const std::vector<ParameterPoint>& points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool is_segment() const noexcept { return segment_.has_value(); }
    /// Same segment with `steps` points; throws for explicit grids.
    [[nodiscard]] TGrid with_steps(int steps) const;

private:
    struct Segment {
        ParameterPoint start, end;
        int steps;
    };
    std::vector<ParameterPoint> points_;
    std::optional<Segment> segment_;
};

/// All (t, loop) cells, t-major. Failed cells are flagged, not thrown. Loops
/// whose pole leaves (or another pole enters) the disk it occupied at the
/// first grid point are flagged POLE_MIGRATION. Runs cells concurrently with
/// OpenMP (jobs <= 0: runtime default); output is identical to the serial
/// reference.
[[nodiscard]] std::vector<MonodromyRecord> monodromy_grid(const ParamRationalMatrix& a,
                                                          const std::vector<LoopSpec>& loops, const TGrid& grid,
                                                          const MonodromyOptions& opt = {}, int jobs = 0);

/// Serial reference implementation of monodromy_grid.
[[nodiscard]] std::vector<MonodromyRecord> monodromy_grid_serial(const ParamRationalMatrix& a,
                                                                 const std::vector<LoopSpec>& loops,
                                                                 const TGrid& grid,
                                                                 const MonodromyOptions& opt = {});

/// ||M_{i1} ... M_{im} - I||_inf over records sharing one t (matched by the
/// record's loop index). Throws MISSING_RECORD.
[[nodiscard]] double product_relation(const std::vector<MonodromyRecord>& records, const std::vector<int>& ordering);

/// Pole indices ordered so that product_relation over them is the loop
/// around all finite poles (the identity when infinity is not singular):
/// decreasing argument of (alpha_i - base) measured from the direction of the
/// pole centroid.
[[nodiscard]] std::vector<int> standard_ordering(const RationalMatrix& a, cplx base);

}  // namespace parmono
