#pragma once

#include <string>
#include <vector>

#include "s4/init.hpp"
#include "s4/rng.hpp"
#include "s4/tape.hpp"

namespace s4 {

enum class Discretization { zoh, bilinear };

double gelu(double x);
double gelu_grad(double x);

// Position-wise affine map y = x W^T + b, x laid out rows = time steps.
struct Linear {
  int in = 0, out = 0;
  int w_idx = -1, b_idx = -1;
  ParamTape* tape = nullptr;

  void init(ParamTape& t, const std::string& prefix, int in_dim, int out_dim, Rng& rng,
            double lr_scale = 1.0);

  Eigen::Map<const RMatrix> weight() const;  // out x in
  Eigen::Map<const RVector> bias() const;

  RMatrix forward(const RMatrix& x) const;
  // Accumulates parameter gradients into buf and returns dx.
  RMatrix backward(const RMatrix& x, const RMatrix& gy, GradBuffer& buf) const;
};

// One S4D layer: bank of h independent diagonal SSMs (vandermonde kernels +
// FFT convolution), GELU, position-wise mixing of the C*h channel outputs,
// residual add, layer norm over features.
struct S4DLayer {
  int h = 0;          // feature copies
  int n = 0;          // state size per SSM
  int channels = 1;   // C
  InitKind init = InitKind::s4d_lin;
  Discretization disc = Discretization::zoh;
  bool s4dc = false;             // c replaced by power-iterated x columns
  bool s4dc_b_through_c = false; // let b receive gradient through c = x (/) b
  ParamTape* tape = nullptr;

  int rho_idx = -1, aim_idx = -1, bre_idx = -1, bim_idx = -1;
  int cre_idx = -1, cim_idx = -1;  // x_re / x_im when s4dc
  int logdt_idx = -1;
  Linear mix;
  int lng_idx = -1, lnb_idx = -1;

  void build(ParamTape& t, const std::string& prefix, int h_dim, int n_state, int c_channels,
             InitKind kind, double dt_min, double dt_max, Rng& rng, double ssm_lr_scale);

  struct Cache {
    const RMatrix* input = nullptr;            // L x h (borrowed)
    CMatrix abar;                              // n x h
    CMatrix bbar;                              // n x h
    CMatrix coupling;                          // n x (C*h), column i*h+f holds c_i o bbar_f
    RMatrix kernels;                           // L x (C*h)
    CMatrix u_hat;                             // conv-length spectra of the padded inputs
    CMatrix k_hat;                             // conv-length spectra of the padded kernels
    RMatrix bank_out;                          // L x (C*h), pre-GELU
    RMatrix gelu_cdf;                          // Phi(bank_out), reused by backward
    RMatrix mixed_in;                          // L x (C*h), post-GELU
    RMatrix resid;                             // L x h, pre-layer-norm
    RMatrix normed;                            // L x h, (r - mu)/sigma
    RVector inv_sigma;                         // per time step
  };

  RMatrix forward(const RMatrix& u, Cache& cache) const;
  // Returns du; parameter gradients go to buf.
  RMatrix backward(const Cache& cache, const RMatrix& gout, GradBuffer& buf) const;

  // Assembled continuous systems (one per feature) for reporting paths.
  DiagonalSSM feature_ssm(int f) const;
  CVector pole(int f) const;  // length n
  double feature_dt(int f) const;

  // One orthogonalized shifted power step on every feature's X columns
  // (s4dc mode); run after the optimizer step.
  void s4dc_power_update();
};

// Layer norm over the feature axis with learned scale/shift.
RMatrix layer_norm_forward(const RMatrix& x, const RVector& gamma, const RVector& beta,
                           RMatrix& normed, RVector& inv_sigma);

}  // namespace s4
