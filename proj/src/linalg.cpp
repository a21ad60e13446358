#include "parmono/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace parmono {

double inf_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double max_abs(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

CMatrix expm(const CMatrix& m) { return m.exp(); }

std::vector<cplx> eigenvalues(const CMatrix& m) {
    Eigen::ComplexEigenSolver<CMatrix> solver(m, false);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const cplx& x : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](cplx p, cplx q) {
            return std::abs(p - x) < std::abs(q - x);
        });
        worst = std::max(worst, std::abs(*it - x));
        b.erase(it);
    }
    return worst;
}

bool all_finite(const CMatrix& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k)
        if (!std::isfinite(m.data()[k].real()) || !std::isfinite(m.data()[k].imag())) return false;
    return true;
}

}  // namespace parmono
