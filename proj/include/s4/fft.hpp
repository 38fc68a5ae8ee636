#pragma once

#include <vector>

#include "s4/common.hpp"

namespace s4 {

// Precomputed radix-2 plan (bit-reversal permutation + per-stage twiddles),
// transforming in place. Plans are cached per length via fft_plan().
class FftPlan {
 public:
  explicit FftPlan(Eigen::Index n);
  Eigen::Index size() const { return n_; }
  void forward(Complex* a) const { run(a, false); }
  void inverse(Complex* a) const { run(a, true); }  // includes the 1/n scale

 private:
  void run(Complex* a, bool inverse) const;
  Eigen::Index n_;
  std::vector<Eigen::Index> rev_;
  std::vector<Complex> tw_;  // stages concatenated, n-1 factors total
};

const FftPlan& fft_plan(Eigen::Index n);

// Smallest power of two >= 2L, the transform length for causal convolution.
Eigen::Index fft_conv_length(Eigen::Index l);

// Radix-2 DFT. Length must be a power of two; the inverse carries the 1/L
// scaling so fft(fft(x), inverse) == x.
CVector fft(const CVector& signal, bool inverse = false);

// Causal (truncated linear) convolution y[t] = sum_{l<=t} k[l] u[t-l],
// computed with zero-padded FFTs of length 2L. kernel and input must have
// equal length.
RVector causal_conv_fft(const RVector& kernel, const RVector& input);

// Cross-correlation c[l] = sum_s x[s] g[s+l], the adjoint of causal
// convolution with respect to either argument.
RVector causal_corr_fft(const RVector& x, const RVector& g);

// O(L^2) reference used by tests and kernel sanity paths.
RVector causal_conv_direct(const RVector& kernel, const RVector& input);

}  // namespace s4
