#pragma once

#include <functional>

#include "s4/common.hpp"
#include "s4/kernel.hpp"
#include "s4/rng.hpp"

namespace s4 {

enum class InitKind { s4d_lin, s4d_inv, s4d_legs, s4d_bw };

const char* init_kind_name(InitKind k);
InitKind init_kind_from_name(const std::string& name);

struct InitSpec {
  InitKind kind = InitKind::s4d_lin;
  int n = 64;
  double dt_min = 1e-3;
  double dt_max = 1e-1;
  int channels = 1;
};

// Deterministic pole placement only (no b/c/dt sampling):
//   s4d_lin   a_n = -1/2 + i pi n                     (zero-based n)
//   s4d_inv   a_n = -1/2 + i (N/pi)(N/(2n+1) - 1)     (zero-based n)
//   s4d_legs  diagonal of the DPLR-conjugated HiPPO-LegS matrix
//   s4d_bw    a_n = exp(i (2n+N-1) pi / 2N)           (one-based n)
CVector init_poles(InitKind kind, int n);

// Poles per init_poles, b = 1, c ~ complex normal with per-entry variance
// 1/n, log_dt log-uniform in [dt_min, dt_max].
DiagonalSSM init_diagonal(const InitSpec& spec, Rng& rng);

// Product-form evaluator of the order-n Butterworth low-pass transfer
// function with cutoff omega_c.
std::function<Complex(Complex)> butterworth_reference(int n, double omega_c);

// Partial-fraction residues r_k with G(s) = sum_k r_k / (s - s_k) over the
// Butterworth poles; with b = 1, c = r the diagonal transfer reproduces the
// product form exactly.
CVector butterworth_residues(int n, double omega_c);

struct TransferSample {
  double omega = 0.0;
  double magnitude_db = 0.0;
  double phase_deg = 0.0;
};

// G evaluated at s = i omega dt: the step size realizes the effective cutoff,
// so reported frequencies are in sequence-index units (features of the
// continuous system appear at omega = |a|/dt).
TransferSample transfer_eval(const DiagonalSSM& sys, double omega);

// M_ij = -1/(a_i + conj(a_j)).
CMatrix h2_m_matrix(const CVector& a);

struct H2Report {
  CMatrix m;
  double norm_sq = 0.0;
  RVector per_channel;
};

// Closed-form squared H2 norm. Note the quadratic form is evaluated at
// conj(b o c_i): expanding int_0^inf |C e^{At} B|^2 dt gives
// sum_ij x_i conj(x_j) M_ij, which is the M-form at the conjugate vector.
H2Report h2_norm(const DiagonalSSM& sys);

// Log-spaced frequency grid, 200 points per decade over [lo, hi].
RVector bode_grid(double lo = 1e-2, double hi = 1e4, int per_decade = 200);

}  // namespace s4
