#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace parmono {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Induced infinity norm (maximum absolute row sum).
[[nodiscard]] double inf_norm(const CMatrix& m);

/// Largest absolute entry.
[[nodiscard]] double max_abs(const CMatrix& m);

[[nodiscard]] CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// Matrix exponential by Pade scaling-and-squaring.
[[nodiscard]] CMatrix expm(const CMatrix& m);

[[nodiscard]] std::vector<cplx> eigenvalues(const CMatrix& m);

/// Distance between two eigenvalue multisets of equal size: the largest gap
/// under a greedy nearest-neighbour pairing.
[[nodiscard]] double multiset_distance(std::vector<cplx> a, std::vector<cplx> b);

[[nodiscard]] bool all_finite(const CMatrix& m);

}  // namespace parmono
