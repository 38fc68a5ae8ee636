#include "s4/kernel.hpp"

#include <Eigen/LU>
#include <cmath>

#include "s4/fft.hpp"
#include "s4/linalg.hpp"

namespace s4 {

namespace {

constexpr double kZohSeriesThreshold = 1e-12;

void require_positive_dt(double dt) {
  if (!(dt > 0.0)) throw SizeError("discretize: dt must be > 0");
}

}  // namespace

DiscreteSSM discretize_bilinear(const DenseSSM& sys, double dt) {
  require_positive_dt(dt);
  const Eigen::Index n = sys.b.size();
  CMatrix m1 = CMatrix::Identity(n, n) - (dt / 2.0) * sys.a;
  Eigen::PartialPivLU<CMatrix> lu(m1);
  if (std::abs(lu.determinant()) < 1e-300) {
    throw SingularityError("discretize_bilinear: I - dt/2 A is singular");
  }
  DiscreteSSM d;
  d.diagonal = false;
  d.a_dense = lu.solve(CMatrix::Identity(n, n) + (dt / 2.0) * sys.a);
  d.b = lu.solve((dt * sys.b).eval());
  d.c = sys.c;
  d.dt = dt;
  return d;
}

DiscreteSSM discretize_bilinear(const DiagonalSSM& sys, double dt) {
  require_positive_dt(dt);
  DiscreteSSM d;
  d.diagonal = true;
  d.a_diag.resize(sys.n());
  d.b.resize(sys.n());
  for (Eigen::Index j = 0; j < sys.n(); ++j) {
    const Complex den = 1.0 - (dt / 2.0) * sys.a[j];
    if (std::abs(den) < 1e-14) {
      throw SingularityError("discretize_bilinear: resolvent singular at entry " +
                             std::to_string(j));
    }
    d.a_diag[j] = (1.0 + (dt / 2.0) * sys.a[j]) / den;
    d.b[j] = dt * sys.b[j] / den;
  }
  d.c = sys.c;
  d.dt = dt;
  return d;
}

DiscreteSSM discretize_zoh(const DiagonalSSM& sys, double dt) {
  require_positive_dt(dt);
  DiscreteSSM d;
  d.diagonal = true;
  d.a_diag.resize(sys.n());
  d.b.resize(sys.n());
  for (Eigen::Index j = 0; j < sys.n(); ++j) {
    const Complex a = sys.a[j];
    const Complex abar = std::exp(dt * a);
    d.a_diag[j] = abar;
    if (std::abs(a) < kZohSeriesThreshold) {
      d.b[j] = dt * sys.b[j];  // removable singularity
    } else {
      d.b[j] = (abar - 1.0) / a * sys.b[j];
    }
  }
  d.c = sys.c;
  d.dt = dt;
  return d;
}

ConvKernel kernel_naive(const DiscreteSSM& d, Eigen::Index length) {
  if (length < 1) throw SizeError("kernel_naive: length must be >= 1");
  const Eigen::Index ch = d.channels();
  ConvKernel k;
  k.length = length;
  k.path = KernelPath::naive;
  k.values.resize(ch, length);
  CVector x = d.b;
  for (Eigen::Index l = 0; l < length; ++l) {
    for (Eigen::Index i = 0; i < ch; ++i) k.values(i, l) = (d.c.row(i) * x).value().real();
    if (l + 1 < length) {
      if (d.diagonal) {
        x.array() *= d.a_diag.array();
      } else {
        x = d.a_dense * x;
      }
    }
  }
  return k;
}

ConvKernel kernel_vandermonde(const DiscreteSSM& d, Eigen::Index length) {
  if (!d.diagonal) throw SizeError("kernel_vandermonde: system must be diagonal");
  const Eigen::Index ch = d.channels();
  ConvKernel k;
  k.length = length;
  k.path = KernelPath::vandermonde;
  k.values.resize(ch, length);
  for (Eigen::Index i = 0; i < ch; ++i) {
    CVector weights = d.b.array() * d.c.row(i).transpose().array();
    k.values.row(i) = vandermonde_dot(d.a_diag, weights, length).real();
  }
  return k;
}

CVector dplr_genfun_dft(const CVector& lambda, const CVector& p, const CVector& q,
                        const CVector& b, const CVector& c_tilde, double dt,
                        Eigen::Index length) {
  if (!is_power_of_two(length)) {
    throw SizeError("dplr_genfun_dft: length must be a power of two");
  }
  const CVector num_cb = c_tilde.array() * b.array();
  const CVector num_cp = c_tilde.array() * p.array();
  const CVector num_qb = q.conjugate().array() * b.array();
  const CVector num_qp = q.conjugate().array() * p.array();
  CVector khat(length);
  for (Eigen::Index k = 0; k < length; ++k) {
    const double ang = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(length);
    const Complex z = std::polar(1.0, ang);
    if (std::abs(z + 1.0) < 1e-12) {
      // z = -1: the resolvent collapses to (dt/2) I independently of the
      // dynamics, so K_hat(-1) = dt/2 * sum_j c_tilde_j b_j.
      khat[k] = (dt / 2.0) * (c_tilde.array() * b.array()).sum();
      continue;
    }
    const Complex g = (2.0 / dt) * (1.0 - z) / (1.0 + z);
    const Complex k00 = cauchy_dot(num_cb, lambda, g);
    const Complex k01 = cauchy_dot(num_cp, lambda, g);
    const Complex k10 = cauchy_dot(num_qb, lambda, g);
    const Complex k11 = cauchy_dot(num_qp, lambda, g);
    const Complex denom = 1.0 + k11;
    if (std::abs(denom) < 1e-12) {
      throw SingularityError("dplr_genfun_dft: Woodbury scalar 1 + q*Rp vanishes");
    }
    khat[k] = 2.0 / (1.0 + z) * (k00 - k01 * k10 / denom);
  }
  return khat;
}

CMatrix matrix_power_pow2(const CMatrix& m, Eigen::Index l) {
  if (!is_power_of_two(l)) throw SizeError("matrix_power_pow2: exponent must be a power of two");
  CMatrix out = m;
  for (Eigen::Index e = 1; e < l; e <<= 1) out = out * out;
  return out;
}

ConvKernel kernel_dplr_genfun(const DplrSystem& sys, double dt, Eigen::Index length) {
  if (!is_power_of_two(length)) {
    throw SizeError("kernel_dplr_genfun: length must be a power of two");
  }
  DenseSSM dense{dplr_dense(sys), sys.b, sys.c};
  DiscreteSSM d = discretize_bilinear(dense, dt);
  const CMatrix abar_l = matrix_power_pow2(d.a_dense, length);
  const CMatrix trunc = CMatrix::Identity(sys.lambda.size(), sys.lambda.size()) - abar_l;
  ConvKernel k;
  k.length = length;
  k.path = KernelPath::dplr_genfun;
  k.values.resize(sys.c.rows(), length);
  for (Eigen::Index i = 0; i < sys.c.rows(); ++i) {
    const CVector c_tilde = (sys.c.row(i) * trunc).transpose();
    const CVector khat = dplr_genfun_dft(sys.lambda, sys.p, sys.q, sys.b, c_tilde, dt, length);
    k.values.row(i) = fft(khat, /*inverse=*/true).real();
  }
  return k;
}

CVector woodbury_solve(const CVector& lambda, const CVector& p, const CVector& q,
                       Complex shift, const CVector& rhs) {
  const Eigen::Index n = lambda.size();
  if (p.size() != n || q.size() != n || rhs.size() != n) {
    throw SizeError("woodbury_solve: length mismatch");
  }
  CVector dinv(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = shift - lambda[j];
    if (std::abs(d) < 1e-14 * (1.0 + std::abs(shift) + std::abs(lambda[j]))) {
      throw SingularityError("woodbury_solve: shift hits lambda at entry " + std::to_string(j));
    }
    dinv[j] = 1.0 / d;
  }
  const CVector dinv_rhs = dinv.array() * rhs.array();
  const CVector dinv_p = dinv.array() * p.array();
  const Complex denom = 1.0 + (q.conjugate().array() * dinv_p.array()).sum();
  if (std::abs(denom) < 1e-12) {
    throw SingularityError("woodbury_solve: 1 + q*D^-1 p vanishes");
  }
  const Complex qdr = (q.conjugate().array() * dinv_rhs.array()).sum();
  return dinv_rhs - dinv_p * (qdr / denom);
}

std::pair<CVector, RVector> recurrence_step(const DiscreteSSM& d, const CVector& state,
                                            double input) {
  if (state.size() != d.n()) throw SizeError("recurrence_step: state length mismatch");
  CVector next(d.n());
  if (d.diagonal) {
    next = d.a_diag.array() * state.array() + d.b.array() * input;
  } else {
    next = d.a_dense * state + d.b * input;
  }
  RVector out(d.channels());
  for (Eigen::Index i = 0; i < d.channels(); ++i) out[i] = (d.c.row(i) * next).value().real();
  return {std::move(next), std::move(out)};
}

RMatrix apply_kernel_fft(const ConvKernel& k, const RVector& input) {
  if (input.size() != k.length) {
    throw SizeError("apply_kernel_fft: input length " + std::to_string(input.size()) +
                    " != kernel length " + std::to_string(k.length));
  }
  RMatrix out(k.values.rows(), k.length);
  for (Eigen::Index i = 0; i < k.values.rows(); ++i) {
    out.row(i) = causal_conv_fft(k.values.row(i).transpose(), input);
  }
  return out;
}

}  // namespace s4
