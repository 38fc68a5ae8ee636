#include "s4/s4dc.hpp"

#include <cmath>

#include "s4/init.hpp"
#include "s4/linalg.hpp"

namespace s4 {

XMatrix shifted_power_step(const XMatrix& x, const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() != x.n()) {
    throw SizeError("shifted_power_step: dimension mismatch");
  }
  const double shift = m.norm();  // Frobenius
  CMatrix shifted = m - shift * CMatrix::Identity(m.rows(), m.cols());
  CMatrix next = shifted * x.x;
  return {qr_orthonormalize(next)};
}

double s4dc_h2_of_x(const CVector& a, const XMatrix& x) {
  const CMatrix m = h2_m_matrix(a);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.channels(); ++i) {
    const CVector y = x.x.col(i).conjugate();
    acc += (y.adjoint() * m * y).value().real();
  }
  return acc;
}

void s4dc_train_step(DiagonalSSM& sys, XMatrix& x, const GradHook& grad_hook) {
  if (x.n() != sys.n()) throw SizeError("s4dc_train_step: x rows != state size");
  for (Eigen::Index j = 0; j < sys.n(); ++j) {
    if (std::abs(sys.b[j]) == 0.0) {
      throw DivisionError("s4dc_train_step: b has a zero entry at " + std::to_string(j));
    }
  }
  sys.c.resize(x.channels(), sys.n());
  for (Eigen::Index i = 0; i < x.channels(); ++i) {
    sys.c.row(i) = (x.x.col(i).array() / sys.b.array()).transpose();
  }
  if (grad_hook) grad_hook(sys, x);
  const CMatrix m_iter = h2_m_matrix(sys.a).transpose();
  x = shifted_power_step(x, m_iter);
}

}  // namespace s4
