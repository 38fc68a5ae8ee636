#include "s4/hippo.hpp"

#include <cmath>

#include "s4/linalg.hpp"

namespace s4 {

HippoMatrix build_hippo(int n) {
  if (n < 1) throw SizeError("build_hippo: n must be >= 1");
  RMatrix a = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (i > k) {
        a(i, k) = -std::sqrt(2.0 * i + 1.0) * std::sqrt(2.0 * k + 1.0);
      } else if (i == k) {
        a(i, k) = -(i + 1.0);
      }
    }
  }
  return {n, std::move(a)};
}

NplrParts nplr_decompose(const HippoMatrix& h) {
  const int n = h.n;
  RVector p(n);
  for (int k = 0; k < n; ++k) p[k] = std::sqrt((2.0 * k + 1.0) / 2.0);
  RMatrix s = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) {
      const double v = 0.5 * std::sqrt((2.0 * i + 1.0) * (2.0 * k + 1.0));
      s(i, k) = -v;
      s(k, i) = v;
    }
  }
  return {n, std::move(p), std::move(s)};
}

DplrSystem to_dplr(const NplrParts& parts) {
  auto [lambda_s, v] = skew_eig(parts.s.cast<Complex>());
  DplrSystem sys;
  sys.lambda = lambda_s.array() - Complex(0.5, 0.0);
  sys.p = v.adjoint() * parts.p.cast<Complex>();
  sys.q = sys.p;
  sys.b = v.adjoint() * CVector::Ones(parts.n);
  sys.unitary = v;
  return sys;
}

CMatrix dplr_dense(const DplrSystem& sys) {
  CMatrix a = sys.lambda.asDiagonal();
  a -= sys.p * sys.q.adjoint();
  return a;
}

}  // namespace s4
