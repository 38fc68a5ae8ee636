#include "s4/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

namespace s4 {

CVector vandermonde_dot(const CVector& base, const CVector& weights, Eigen::Index length) {
  if (base.size() != weights.size()) {
    throw SizeError("vandermonde_dot: base length " + std::to_string(base.size()) +
                    " != weights length " + std::to_string(weights.size()));
  }
  if (length < 1) throw SizeError("vandermonde_dot: length must be positive");
  CVector out = CVector::Zero(length);
  CVector pw = weights;  // weights[n] * base[n]^l, advanced in-place
  for (Eigen::Index l = 0; l < length; ++l) {
    out[l] = pw.sum();
    if (l + 1 < length) pw.array() *= base.array();
  }
  return out;
}

Complex cauchy_dot(const CVector& numerators, const CVector& poles, Complex node) {
  if (numerators.size() != poles.size()) {
    throw SizeError("cauchy_dot: numerators/poles length mismatch");
  }
  Complex acc(0.0, 0.0);
  for (Eigen::Index j = 0; j < poles.size(); ++j) {
    const Complex d = node - poles[j];
    if (std::abs(d) < 1e-14 * (1.0 + std::abs(node) + std::abs(poles[j]))) {
      throw SingularityError("cauchy_dot: node coincides with pole " + std::to_string(j));
    }
    acc += numerators[j] / d;
  }
  return acc;
}

void fix_column_phases(CMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double colnorm = m.col(c).norm();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const Complex v = m(r, c);
      if (std::abs(v) > 1e-12 * (colnorm > 0 ? colnorm : 1.0)) {
        m.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
}

CMatrix qr_orthonormalize(const CMatrix& m) {
  if (m.rows() < m.cols()) {
    throw SizeError("qr_orthonormalize: rows < cols");
  }
  Eigen::HouseholderQR<CMatrix> qr(m);
  CMatrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  double diag_max = 0.0;
  for (Eigen::Index i = 0; i < m.cols(); ++i) diag_max = std::max(diag_max, std::abs(r(i, i)));
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    if (std::abs(r(i, i)) < 1e-12 * std::max(1.0, diag_max)) {
      throw DegeneracyError("qr_orthonormalize: rank-deficient input (R diagonal ~ 0)");
    }
  }
  CMatrix q = qr.householderQ() * CMatrix::Identity(m.rows(), m.cols());
  fix_column_phases(q);
  return q;
}

std::pair<RVector, CMatrix> hermitian_eig(const CMatrix& m) {
  if (m.rows() != m.cols()) throw SizeError("hermitian_eig: matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw SymmetryError("hermitian_eig: input not Hermitian within 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver((m + m.adjoint()) * 0.5);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

std::pair<CVector, CMatrix> skew_eig(const CMatrix& m) {
  if (m.rows() != m.cols()) throw SizeError("skew_eig: matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (m.imag().cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw SymmetryError("skew_eig: input must be real");
  }
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw SymmetryError("skew_eig: input not skew-symmetric");
  }
  auto [mu, v] = hermitian_eig(Complex(0.0, 1.0) * m);
  CVector lambda(mu.size());
  for (Eigen::Index j = 0; j < mu.size(); ++j) lambda[j] = Complex(0.0, -mu[j]);
  return {lambda, v};
}

}  // namespace s4
