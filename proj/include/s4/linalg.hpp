#pragma once

#include <utility>

#include "s4/common.hpp"

namespace s4 {

// out[l] = sum_n weights[n] * base[n]^l, l = 0..length-1.
CVector vandermonde_dot(const CVector& base, const CVector& weights, Eigen::Index length);

// sum_j numerators[j] / (node - poles[j]); throws SingularityError when node
// collides with a pole.
Complex cauchy_dot(const CVector& numerators, const CVector& poles, Complex node);

// Rotates each column so its first nonzero entry lies on the positive real
// axis (the eigenvector phase convention used by the power iteration).
void fix_column_phases(CMatrix& m);

// Thin Q factor with orthonormal columns; rows >= cols and full column rank
// required. Column phases follow fix_column_phases.
CMatrix qr_orthonormalize(const CMatrix& m);

// Eigenvalues ascending, eigenvectors as columns; input must be Hermitian
// within 1e-10.
std::pair<RVector, CMatrix> hermitian_eig(const CMatrix& m);

// Real skew-symmetric input; returns purely imaginary eigenvalues and a
// unitary V with m = V diag(lambda) V^*. Computed via hermitian_eig on i*m.
std::pair<CVector, CMatrix> skew_eig(const CMatrix& m);

}  // namespace s4
