#pragma once

#include <utility>

#include "s4/common.hpp"
#include "s4/hippo.hpp"

namespace s4 {

// Continuous diagonal system; step size is carried as log(dt).
struct DiagonalSSM {
  CVector a;
  CVector b;
  CMatrix c;  // channels x n
  double log_dt = 0.0;

  Eigen::Index n() const { return a.size(); }
  Eigen::Index channels() const { return c.rows(); }
  double dt() const { return std::exp(log_dt); }
};

// Continuous dense system, used by oracles and the DPLR paths.
struct DenseSSM {
  CMatrix a;
  CVector b;
  CMatrix c;  // channels x n
};

struct DiscreteSSM {
  bool diagonal = true;
  CVector a_diag;
  CMatrix a_dense;
  CVector b;
  CMatrix c;  // channels x n
  double dt = 0.0;

  Eigen::Index n() const { return b.size(); }
  Eigen::Index channels() const { return c.rows(); }
};

enum class KernelPath { naive, vandermonde, dplr_genfun };

struct ConvKernel {
  Eigen::Index length = 0;
  RMatrix values;  // channels x length
  KernelPath path = KernelPath::naive;
};

// Tustin transform: a_bar = (I - dt/2 A)^-1 (I + dt/2 A), b_bar = (I - dt/2 A)^-1 dt B.
DiscreteSSM discretize_bilinear(const DenseSSM& sys, double dt);
DiscreteSSM discretize_bilinear(const DiagonalSSM& sys, double dt);

// a_bar_j = exp(dt a_j), b_bar_j = (exp(dt a_j) - 1)/a_j b_j, with the series
// limit dt*b_j below |a_j| < 1e-12.
DiscreteSSM discretize_zoh(const DiagonalSSM& sys, double dt);

// Reference path: values[i][l] = Re(c_i A_bar^l b_bar).
ConvKernel kernel_naive(const DiscreteSSM& d, Eigen::Index length);

// Diagonal fast path; per channel vandermonde_dot(a_bar, b_bar o c_i, L).
ConvKernel kernel_vandermonde(const DiscreteSSM& d, Eigen::Index length);

// Generating-function path of the DPLR system: four Cauchy dot products and a
// rank-1 Woodbury correction per root of unity, then an inverse FFT. The
// truncation factor C(I - A_bar^L) is formed internally from sys.c.
ConvKernel kernel_dplr_genfun(const DplrSystem& sys, double dt, Eigen::Index length);

// DFT of the truncated kernel for one channel given c_tilde = C(I - A_bar^L);
// exposed for the reparameterized-"learn c_tilde directly" route and tests.
CVector dplr_genfun_dft(const CVector& lambda, const CVector& p, const CVector& q,
                        const CVector& b, const CVector& c_tilde, double dt,
                        Eigen::Index length);

// (diag(shift - lambda) + p q^*)^-1 rhs by Sherman-Morrison.
CVector woodbury_solve(const CVector& lambda, const CVector& p, const CVector& q,
                       Complex shift, const CVector& rhs);

// One recurrence update: state' = A_bar state + B_bar u; outputs Re(c_i state').
std::pair<CVector, RVector> recurrence_step(const DiscreteSSM& d, const CVector& state,
                                            double input);

// Causal convolution of every kernel channel with the input (FFT, zero-padded
// to 2L).
RMatrix apply_kernel_fft(const ConvKernel& k, const RVector& input);

// A_bar^L by repeated squaring; L must be a power of two.
CMatrix matrix_power_pow2(const CMatrix& m, Eigen::Index l);

}  // namespace s4
