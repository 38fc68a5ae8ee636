#include "s4/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace s4 {

FftPlan::FftPlan(Eigen::Index n) : n_(n) {
  if (!is_power_of_two(n)) {
    throw SizeError("fft: length " + std::to_string(n) + " is not a power of two");
  }
  rev_.resize(n);
  rev_[0] = 0;
  for (Eigen::Index i = 1, j = 0; i < n; ++i) {
    Eigen::Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    rev_[i] = j;
  }
  tw_.reserve(n > 1 ? n - 1 : 0);
  for (Eigen::Index len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    for (Eigen::Index j = 0; j < len / 2; ++j) {
      tw_.push_back(std::polar(1.0, ang * static_cast<double>(j)));
    }
  }
}

void FftPlan::run(Complex* a, bool inverse) const {
  for (Eigen::Index i = 0; i < n_; ++i) {
    const Eigen::Index j = rev_[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  const Complex* tw = tw_.data();
  for (Eigen::Index len = 2; len <= n_; len <<= 1) {
    const Eigen::Index half = len / 2;
    for (Eigen::Index i = 0; i < n_; i += len) {
      Complex* lo = a + i;
      Complex* hi = a + i + half;
      for (Eigen::Index j = 0; j < half; ++j) {
        const Complex w = inverse ? std::conj(tw[j]) : tw[j];
        const Complex u = lo[j];
        const Complex v = hi[j] * w;
        lo[j] = u + v;
        hi[j] = u - v;
      }
    }
    tw += half;
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n_);
    for (Eigen::Index i = 0; i < n_; ++i) a[i] *= scale;
  }
}

const FftPlan& fft_plan(Eigen::Index n) {
  static std::mutex mu;
  static std::map<Eigen::Index, std::unique_ptr<FftPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
  }
  return *it->second;
}

CVector fft(const CVector& signal, bool inverse) {
  const FftPlan& plan = fft_plan(signal.size());
  CVector a = signal;
  if (inverse) {
    plan.inverse(a.data());
  } else {
    plan.forward(a.data());
  }
  return a;
}

Eigen::Index fft_conv_length(Eigen::Index l) {
  Eigen::Index m = 1;
  while (m < 2 * l) m <<= 1;
  return m;
}

RVector causal_conv_fft(const RVector& kernel, const RVector& input) {
  const Eigen::Index L = kernel.size();
  if (input.size() != L) {
    throw SizeError("causal_conv_fft: kernel length " + std::to_string(L) +
                    " != input length " + std::to_string(input.size()));
  }
  const Eigen::Index m = fft_conv_length(L);
  const FftPlan& plan = fft_plan(m);
  CVector k = CVector::Zero(m);
  CVector u = CVector::Zero(m);
  k.head(L) = kernel.cast<Complex>();
  u.head(L) = input.cast<Complex>();
  plan.forward(k.data());
  plan.forward(u.data());
  k.array() *= u.array();
  plan.inverse(k.data());
  return k.head(L).real();
}

RVector causal_corr_fft(const RVector& x, const RVector& g) {
  const Eigen::Index L = x.size();
  if (g.size() != L) {
    throw SizeError("causal_corr_fft: length mismatch");
  }
  const Eigen::Index m = fft_conv_length(L);
  const FftPlan& plan = fft_plan(m);
  CVector xv = CVector::Zero(m);
  CVector gv = CVector::Zero(m);
  xv.head(L) = x.cast<Complex>();
  gv.head(L) = g.cast<Complex>();
  plan.forward(xv.data());
  plan.forward(gv.data());
  xv = xv.conjugate().cwiseProduct(gv);
  plan.inverse(xv.data());
  return xv.head(L).real();
}

RVector causal_conv_direct(const RVector& kernel, const RVector& input) {
  const Eigen::Index L = kernel.size();
  if (input.size() != L) throw SizeError("causal_conv_direct: length mismatch");
  RVector y = RVector::Zero(L);
  for (Eigen::Index t = 0; t < L; ++t) {
    double acc = 0.0;
    for (Eigen::Index l = 0; l <= t; ++l) acc += kernel[l] * input[t - l];
    y[t] = acc;
  }
  return y;
}

}  // namespace s4
