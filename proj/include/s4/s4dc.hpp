#pragma once

#include <functional>

#include "s4/common.hpp"
#include "s4/kernel.hpp"

namespace s4 {

// Columns are the per-channel coupling vectors X_i = B o C_i, kept
// orthonormal with the first nonzero entry of each column on the positive
// real axis.
struct XMatrix {
  CMatrix x;  // n x channels

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index channels() const { return x.cols(); }
};

// One iteration of the orthogonalized shifted power method: QR of
// (m - ||m||_F I) x with the column phase convention. m must be Hermitian
// positive definite; the Frobenius shift makes the smallest eigenvalue
// dominant in magnitude.
XMatrix shifted_power_step(const XMatrix& x, const CMatrix& m);

// One coupled training update. Derives c = x (/) b into sys.c, invokes the
// gradient hook (which may update a, b, log_dt but must leave x alone),
// rebuilds the M-matrix from the updated poles and applies one shifted power
// step. The iteration matrix is M^T (= conj(M), same spectrum): the H2 form
// is evaluated at conj(B o C), so the minimizing X columns are conjugates of
// M's bottom eigenvectors.
using GradHook = std::function<void(DiagonalSSM&, const XMatrix&)>;
void s4dc_train_step(DiagonalSSM& sys, XMatrix& x, const GradHook& grad_hook);

// ||G||_2^2 of the system whose coupling matrix is x (b o c_i = x_i).
double s4dc_h2_of_x(const CVector& a, const XMatrix& x);

}  // namespace s4
