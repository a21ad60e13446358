#pragma once

// Integrability (zero curvature), isomonodromy and projective isomonodromy.

#include <cstdint>
#include <string>
#include <vector>

#include "parmono/monodromy.hpp"
#include "parmono/system.hpp"

namespace parmono {

/// dY/dx = A_x Y together with dY/dt_j = A_t[j-1] Y.
struct IntegrableSystemSpec {
    ParamRationalMatrix a_x;
    std::vector<ParamRationalMatrix> a_t;

    /// Direction 0 is x, 1..r are the parameters.
    [[nodiscard]] const ParamRationalMatrix& direction(int j) const;
    /// Throws MISSING_DIRECTION, DIMENSION_MISMATCH.
    void validate() const;
};

/// Max over seeded samples of ||d_j A_k - d_k A_j - [A_j, A_k]||_inf.
[[nodiscard]] double zero_curvature_residual(const IntegrableSystemSpec& spec, int j, int k, std::size_t samples,
                                             std::uint64_t seed, const SampleDomain& domain = {});

struct FuchsianSplit {
    int dim = 0;
    int num_params = 0;
    std::vector<Expr> locations;
    std::vector<Expr> b;                // tr A_i / n
    std::vector<ExprMatrix> traceless;  // A_i - b_i I

    /// sum_i B_i / (x - alpha_i)
    [[nodiscard]] ParamRationalMatrix traceless_system() const;
};

/// Throws NOT_FUCHSIAN when a pole is not simple or a polynomial part is present.
[[nodiscard]] FuchsianSplit fuchsian_split(const ParamRationalMatrix& a);

enum class Verdict { Isomonodromic, ProjectivelyIsomonodromic, Neither, Inconclusive };

[[nodiscard]] const char* to_string(Verdict v) noexcept;

struct ClassifyTolerances {
    double iso_tol = 1e-7;
    double proj_tol = 1e-6;
};

struct LoopClassification {
    int loop = 0;
    CMatrix gamma;                 // M_i(t0)
    std::vector<ParameterPoint> t;
    std::vector<cplx> c_samples;   // tr(M_i(t) M_i(t0)^{-1}) / n
    double iso_residual = 0.0;     // max_t ||M_i(t) - M_i(t0)|| / max(1, ||M_i(t0)||)
    double proj_residual = 0.0;    // max_t ||N_i(t) - c_i(t) I|| / max(1, ||M_i(t0)||)
    double err_estimate = 0.0;     // max record estimate, same normalisation
    bool phase_jump = false;       // |arg c(t_{k+1}) / c(t_k)| > 3 pi / 4 somewhere
    bool iso = false;
    bool projective = false;

    /// Residual that decided the verdict for this loop.
    [[nodiscard]] double max_residual() const noexcept { return iso ? iso_residual : proj_residual; }
};

struct ClassificationReport {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<LoopClassification> loops;
    ClassifyTolerances tolerances;
    bool phase_jump = false;
};

/// Records may come in any order; they are grouped by loop, keeping the
/// first-seen order of t (t0 is the first). Throws INSUFFICIENT_GRID,
/// MISSING_RECORD, SINGULAR_REFERENCE.
[[nodiscard]] ClassificationReport classify_monodromy(const std::vector<MonodromyRecord>& records,
                                                      const ClassifyTolerances& tol = {});

struct ProjectiveSplitReport {
    FuchsianSplit split;
    ClassificationReport traceless;  // classification of sum B_i / (x - alpha_i)
    ClassificationReport full;       // classification of A itself
    /// max_{i,t} ||M_i(t) e^{-2 pi i b_i(t)} - M_i(t0) e^{-2 pi i b_i(t0)}|| / max(1, ||.(t0)||)
    double reconstruction_drift = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

/// Loops must target finite poles of A (indices into the pole list).
[[nodiscard]] ProjectiveSplitReport projective_split_check(const ParamRationalMatrix& a,
                                                           const std::vector<LoopSpec>& loops, const TGrid& grid,
                                                           const ClassifyTolerances& tol = {},
                                                           const MonodromyOptions& opt = {}, int jobs = 0);

}  // namespace parmono
