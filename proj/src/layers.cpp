#include "s4/layers.hpp"

#include <cmath>

#include "s4/fft.hpp"
#include "s4/linalg.hpp"
#include "s4/s4dc.hpp"

namespace s4 {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kZohSeriesThreshold = 1e-12;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
  const double phi = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  return phi + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

void Linear::init(ParamTape& t, const std::string& prefix, int in_dim, int out_dim, Rng& rng,
                  double lr_scale) {
  tape = &t;
  in = in_dim;
  out = out_dim;
  RVector w(static_cast<Eigen::Index>(in) * out);
  const double scale = std::sqrt(1.0 / in);
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = scale * rng.normal();
  w_idx = t.add(prefix + ".w", std::move(w),
                {static_cast<std::uint32_t>(out), static_cast<std::uint32_t>(in)}, lr_scale);
  b_idx = t.add(prefix + ".b", RVector::Zero(out), {}, lr_scale);
}

Eigen::Map<const RMatrix> Linear::weight() const {
  return {tape->entry(w_idx).value.data(), out, in};
}

Eigen::Map<const RVector> Linear::bias() const { return {tape->entry(b_idx).value.data(), out}; }

RMatrix Linear::forward(const RMatrix& x) const {
  if (x.cols() != in) throw SizeError("Linear: input width mismatch");
  return (x * weight().transpose()).rowwise() + bias().transpose();
}

RMatrix Linear::backward(const RMatrix& x, const RMatrix& gy, GradBuffer& buf) const {
  Eigen::Map<RMatrix> gw(buf.g[w_idx].data(), out, in);
  gw.noalias() += gy.transpose() * x;
  Eigen::Map<RVector> gb(buf.g[b_idx].data(), out);
  gb += gy.colwise().sum().transpose();
  return gy * weight();
}

RMatrix layer_norm_forward(const RMatrix& x, const RVector& gamma, const RVector& beta,
                           RMatrix& normed, RVector& inv_sigma) {
  const Eigen::Index t_steps = x.rows();
  const Eigen::Index h = x.cols();
  normed.resize(t_steps, h);
  inv_sigma.resize(t_steps);
  RMatrix out(t_steps, h);
  for (Eigen::Index t = 0; t < t_steps; ++t) {
    const double mu = x.row(t).mean();
    const double var = (x.row(t).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + kLnEps);
    inv_sigma[t] = is;
    normed.row(t) = (x.row(t).array() - mu) * is;
    out.row(t) = normed.row(t).cwiseProduct(gamma.transpose()) + beta.transpose();
  }
  return out;
}

void S4DLayer::build(ParamTape& t, const std::string& prefix, int h_dim, int n_state,
                     int c_channels, InitKind kind, double dt_min, double dt_max, Rng& rng,
                     double ssm_lr_scale) {
  tape = &t;
  h = h_dim;
  n = n_state;
  channels = c_channels;
  init = kind;
  const Eigen::Index hn = static_cast<Eigen::Index>(h) * n;
  const CVector poles = init_poles(kind, n);

  RVector rho(hn), aim(hn), bre(hn), bim(hn);
  for (int f = 0; f < h; ++f) {
    for (int j = 0; j < n; ++j) {
      rho[f * n + j] = std::log(-poles[j].real());
      aim[f * n + j] = poles[j].imag();
      bre[f * n + j] = 1.0;
      bim[f * n + j] = 0.0;
    }
  }
  rho_idx = t.add(prefix + ".a_log_neg_re", std::move(rho), {}, ssm_lr_scale);
  aim_idx = t.add(prefix + ".a_im", std::move(aim), {}, ssm_lr_scale);
  bre_idx = t.add(prefix + ".b_re", std::move(bre), {}, ssm_lr_scale);
  bim_idx = t.add(prefix + ".b_im", std::move(bim), {}, ssm_lr_scale);

  const Eigen::Index chn = static_cast<Eigen::Index>(channels) * hn;
  RVector cre(chn), cim(chn);
  if (s4dc) {
    // x columns start orthonormal per feature with the usual phase convention
    for (int f = 0; f < h; ++f) {
      CMatrix x0(n, channels);
      for (int i = 0; i < channels; ++i) {
        for (int j = 0; j < n; ++j) x0(j, i) = rng.cnormal();
      }
      x0 = qr_orthonormalize(x0);
      for (int i = 0; i < channels; ++i) {
        for (int j = 0; j < n; ++j) {
          cre[(static_cast<Eigen::Index>(i) * h + f) * n + j] = x0(j, i).real();
          cim[(static_cast<Eigen::Index>(i) * h + f) * n + j] = x0(j, i).imag();
        }
      }
    }
    cre_idx = t.add(prefix + ".x_re", std::move(cre), {}, 0.0, /*trainable=*/false);
    cim_idx = t.add(prefix + ".x_im", std::move(cim), {}, 0.0, /*trainable=*/false);
  } else {
    const double cscale = std::sqrt(1.0 / (2.0 * n));
    for (Eigen::Index i = 0; i < chn; ++i) {
      cre[i] = cscale * rng.normal();
      cim[i] = cscale * rng.normal();
    }
    cre_idx = t.add(prefix + ".c_re", std::move(cre), {}, ssm_lr_scale);
    cim_idx = t.add(prefix + ".c_im", std::move(cim), {}, ssm_lr_scale);
  }

  RVector logdt(h);
  for (int f = 0; f < h; ++f) logdt[f] = rng.uniform(std::log(dt_min), std::log(dt_max));
  logdt_idx = t.add(prefix + ".log_dt", std::move(logdt), {}, ssm_lr_scale);

  mix.init(t, prefix + ".mix", channels * h, h, rng);
  lng_idx = t.add(prefix + ".ln_gamma", RVector::Ones(h));
  lnb_idx = t.add(prefix + ".ln_beta", RVector::Zero(h));
}

CVector S4DLayer::pole(int f) const {
  const auto& rho = tape->entry(rho_idx).value;
  const auto& aim = tape->entry(aim_idx).value;
  CVector a(n);
  for (int j = 0; j < n; ++j) a[j] = Complex(-std::exp(rho[f * n + j]), aim[f * n + j]);
  return a;
}

double S4DLayer::feature_dt(int f) const { return std::exp(tape->entry(logdt_idx).value[f]); }

DiagonalSSM S4DLayer::feature_ssm(int f) const {
  DiagonalSSM sys;
  sys.a = pole(f);
  sys.b.resize(n);
  const auto& bre = tape->entry(bre_idx).value;
  const auto& bim = tape->entry(bim_idx).value;
  for (int j = 0; j < n; ++j) sys.b[j] = Complex(bre[f * n + j], bim[f * n + j]);
  sys.c.resize(channels, n);
  const auto& cre = tape->entry(cre_idx).value;
  const auto& cim = tape->entry(cim_idx).value;
  for (int i = 0; i < channels; ++i) {
    for (int j = 0; j < n; ++j) {
      Complex v(cre[(static_cast<Eigen::Index>(i) * h + f) * n + j],
                cim[(static_cast<Eigen::Index>(i) * h + f) * n + j]);
      if (s4dc) v /= sys.b[j];  // stored entries are x = b o c
      sys.c(i, j) = v;
    }
  }
  sys.log_dt = tape->entry(logdt_idx).value[f];
  return sys;
}

RMatrix S4DLayer::forward(const RMatrix& u, Cache& cache) const {
  const Eigen::Index L = u.rows();
  if (u.cols() != h) throw SizeError("S4DLayer: expected " + std::to_string(h) + " features");
  const Eigen::Index m = fft_conv_length(L);
  const FftPlan& plan = fft_plan(m);
  cache.input = &u;
  cache.abar.resize(n, h);
  cache.bbar.resize(n, h);
  cache.coupling.resize(n, static_cast<Eigen::Index>(channels) * h);
  cache.kernels.resize(L, static_cast<Eigen::Index>(channels) * h);
  cache.u_hat.resize(m, h);
  cache.k_hat.resize(m, static_cast<Eigen::Index>(channels) * h);
  cache.bank_out.resize(L, static_cast<Eigen::Index>(channels) * h);

  const auto& rho = tape->entry(rho_idx).value;
  const auto& aim = tape->entry(aim_idx).value;
  const auto& bre = tape->entry(bre_idx).value;
  const auto& bim = tape->entry(bim_idx).value;
  const auto& cre = tape->entry(cre_idx).value;
  const auto& cim = tape->entry(cim_idx).value;
  const auto& logdt = tape->entry(logdt_idx).value;

  for (int f = 0; f < h; ++f) {
    const double dt = std::exp(logdt[f]);
    for (int j = 0; j < n; ++j) {
      const Complex a(-std::exp(rho[f * n + j]), aim[f * n + j]);
      const Complex b(bre[f * n + j], bim[f * n + j]);
      Complex abar, bbar;
      if (disc == Discretization::zoh) {
        abar = std::exp(dt * a);
        bbar = std::abs(a) < kZohSeriesThreshold ? dt * b : (abar - 1.0) / a * b;
      } else {
        const Complex den = 1.0 - (dt / 2.0) * a;
        abar = (1.0 + (dt / 2.0) * a) / den;
        bbar = dt * b / den;
      }
      cache.abar(j, f) = abar;
      cache.bbar(j, f) = bbar;
      for (int i = 0; i < channels; ++i) {
        Complex c(cre[(static_cast<Eigen::Index>(i) * h + f) * n + j],
                  cim[(static_cast<Eigen::Index>(i) * h + f) * n + j]);
        if (s4dc) c /= b;
        cache.coupling(j, static_cast<Eigen::Index>(i) * h + f) = c * bbar;
      }
    }
  }

  // input spectra, shared across channel copies of the same feature
  for (int f = 0; f < h; ++f) {
    cache.u_hat.col(f).setZero();
    cache.u_hat.col(f).head(L) = u.col(f).cast<Complex>();
    plan.forward(cache.u_hat.col(f).data());
  }

  // Vandermonde kernels and FFT convolution per channel copy
  CVector work(m);
  CVector pw(n);
  for (int i = 0; i < channels; ++i) {
    for (int f = 0; f < h; ++f) {
      const Eigen::Index q = static_cast<Eigen::Index>(i) * h + f;
      pw = cache.coupling.col(q);
      const auto ab = cache.abar.col(f).array();
      double* kq = cache.kernels.col(q).data();
      for (Eigen::Index l = 0; l < L; ++l) {
        kq[l] = pw.sum().real();
        if (l + 1 < L) pw.array() *= ab;
      }
      cache.k_hat.col(q).setZero();
      cache.k_hat.col(q).head(L) = cache.kernels.col(q).cast<Complex>();
      plan.forward(cache.k_hat.col(q).data());
      work = cache.k_hat.col(q).cwiseProduct(cache.u_hat.col(f));
      plan.inverse(work.data());
      cache.bank_out.col(q) = work.head(L).real();
    }
  }

  cache.gelu_cdf =
      cache.bank_out.unaryExpr([](double v) { return 0.5 * (1.0 + std::erf(v * M_SQRT1_2)); });
  cache.mixed_in = cache.bank_out.cwiseProduct(cache.gelu_cdf);
  RMatrix z = mix.forward(cache.mixed_in);
  cache.resid = u + z;
  const RVector gamma = tape->entry(lng_idx).value;
  const RVector beta = tape->entry(lnb_idx).value;
  return layer_norm_forward(cache.resid, gamma, beta, cache.normed, cache.inv_sigma);
}

RMatrix S4DLayer::backward(const Cache& cache, const RMatrix& gout, GradBuffer& buf) const {
  const Eigen::Index L = gout.rows();
  const RMatrix& u = *cache.input;

  // layer norm
  const RVector gamma = tape->entry(lng_idx).value;
  RMatrix dresid(L, h);
  {
    Eigen::Map<RVector> dgamma(buf.g[lng_idx].data(), h);
    Eigen::Map<RVector> dbeta(buf.g[lnb_idx].data(), h);
    for (Eigen::Index t = 0; t < L; ++t) {
      dgamma += gout.row(t).cwiseProduct(cache.normed.row(t)).transpose();
      dbeta += gout.row(t).transpose();
      const RVector dxhat = gout.row(t).cwiseProduct(gamma.transpose()).transpose();
      const double m1 = dxhat.mean();
      const double m2 = dxhat.cwiseProduct(cache.normed.row(t).transpose()).mean();
      dresid.row(t) = cache.inv_sigma[t] *
                      (dxhat.array() - m1 - cache.normed.row(t).transpose().array() * m2);
    }
  }

  RMatrix du = dresid;  // residual skip
  RMatrix dmixed = mix.backward(cache.mixed_in, dresid, buf);
  // gelu'(x) = Phi(x) + x phi(x), with Phi cached from the forward pass
  RMatrix dbank = dmixed.cwiseProduct(
      cache.gelu_cdf + cache.bank_out.unaryExpr([](double v) {
        return v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
      }));

  const auto& rho = tape->entry(rho_idx).value;
  const auto& bre = tape->entry(bre_idx).value;
  const auto& bim = tape->entry(bim_idx).value;
  const auto& cre = tape->entry(cre_idx).value;
  const auto& cim = tape->entry(cim_idx).value;
  const auto& logdt = tape->entry(logdt_idx).value;

  auto& g_rho = buf.g[rho_idx];
  auto& g_aim = buf.g[aim_idx];
  auto& g_bre = buf.g[bre_idx];
  auto& g_bim = buf.g[bim_idx];
  auto& g_cre = buf.g[cre_idx];
  auto& g_cim = buf.g[cim_idx];
  auto& g_logdt = buf.g[logdt_idx];

  CMatrix w_abar = CMatrix::Zero(n, h);
  CMatrix w_bbar = CMatrix::Zero(n, h);

  const Eigen::Index m = fft_conv_length(L);
  const FftPlan& plan = fft_plan(m);
  CVector g_hat(m), work(m);
  RVector dk(L);
  for (int i = 0; i < channels; ++i) {
    for (int f = 0; f < h; ++f) {
      const Eigen::Index q = static_cast<Eigen::Index>(i) * h + f;
      g_hat.setZero();
      g_hat.head(L) = dbank.col(q).cast<Complex>();
      plan.forward(g_hat.data());
      // dk[l] = sum_t g[t] u[t-l]; du[s] += sum_l k[l] g[s+l], both as
      // correlations against the spectra cached by the forward pass
      work = cache.u_hat.col(f).conjugate().cwiseProduct(g_hat);
      plan.inverse(work.data());
      dk = work.head(L).real();
      work = cache.k_hat.col(q).conjugate().cwiseProduct(g_hat);
      plan.inverse(work.data());
      du.col(f) += work.head(L).real();

      // adjoints of kernel[l] = Re(sum_j coupling_j abar_j^l); the l+1 term
      // of t2 uses p_l, so both accumulate in the same pass over the powers
      CVector t1 = CVector::Zero(n);
      CVector t2 = CVector::Zero(n);
      CVector p_l = CVector::Ones(n);
      const auto ab = cache.abar.col(f).array();
      for (Eigen::Index l = 0; l < L; ++l) {
        t1 += dk[l] * p_l;
        if (l + 1 < L) {
          t2 += (dk[l + 1] * static_cast<double>(l + 1)) * p_l;
          p_l.array() *= ab;
        }
      }
      w_abar.col(f) += cache.coupling.col(q).cwiseProduct(t2);
      for (int j = 0; j < n; ++j) {
        const Complex b(bre[f * n + j], bim[f * n + j]);
        Complex c(cre[q * n + j], cim[q * n + j]);
        if (s4dc) c /= b;
        const Complex w_coupling = t1[j];
        const Complex w_c = w_coupling * cache.bbar(j, f);
        w_bbar(j, f) += w_coupling * c;
        if (!s4dc) {
          g_cre[q * n + j] += w_c.real();
          g_cim[q * n + j] += -w_c.imag();
        } else if (s4dc_b_through_c) {
          // c = x / b, x detached: dc/db = -c/b
          const Complex w_b_extra = w_c * (-c / b);
          g_bre[f * n + j] += w_b_extra.real();
          g_bim[f * n + j] += -w_b_extra.imag();
        }
      }
    }
  }

  // chain through the discretization into a, b, log_dt
  for (int f = 0; f < h; ++f) {
    const double dt = std::exp(logdt[f]);
    double g_dt_acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double neg_re = std::exp(rho[f * n + j]);
      const Complex a(-neg_re, tape->entry(aim_idx).value[f * n + j]);
      const Complex b(bre[f * n + j], bim[f * n + j]);
      const Complex abar = cache.abar(j, f);
      Complex dabar_da, dabar_ddt, dbbar_db, dbbar_da, dbbar_ddt;
      if (disc == Discretization::zoh) {
        dabar_da = dt * abar;
        dabar_ddt = a * abar;
        if (std::abs(a) < kZohSeriesThreshold) {
          dbbar_db = dt;
          dbbar_da = b * dt * dt * 0.5;
          dbbar_ddt = b;
        } else {
          const Complex r = (abar - 1.0) / a;
          dbbar_db = r;
          dbbar_da = b * (dt * abar - r) / a;
          dbbar_ddt = b * abar;
        }
      } else {
        const Complex den = 1.0 - (dt / 2.0) * a;
        dabar_da = dt / (den * den);
        dabar_ddt = a / (den * den);
        dbbar_db = dt / den;
        dbbar_da = (dt * dt * 0.5) * b / (den * den);
        dbbar_ddt = b / (den * den);
      }
      const Complex w_a = w_abar(j, f) * dabar_da + w_bbar(j, f) * dbbar_da;
      const Complex w_b = w_bbar(j, f) * dbbar_db;
      g_rho[f * n + j] += w_a.real() * (-neg_re);
      g_aim[f * n + j] += -w_a.imag();
      g_bre[f * n + j] += w_b.real();
      g_bim[f * n + j] += -w_b.imag();
      g_dt_acc += (w_abar(j, f) * dabar_ddt + w_bbar(j, f) * dbbar_ddt).real();
    }
    g_logdt[f] += g_dt_acc * dt;
  }
  return du;
}

void S4DLayer::s4dc_power_update() {
  auto& xre = tape->entry(cre_idx).value;
  auto& xim = tape->entry(cim_idx).value;
  for (int f = 0; f < h; ++f) {
    CMatrix x(n, channels);
    for (int i = 0; i < channels; ++i) {
      for (int j = 0; j < n; ++j) {
        x(j, i) = Complex(xre[(static_cast<Eigen::Index>(i) * h + f) * n + j],
                          xim[(static_cast<Eigen::Index>(i) * h + f) * n + j]);
      }
    }
    // iterate on M^T so the converged columns minimize the H2 form, which is
    // evaluated at conj(B o C)
    const CMatrix m_iter = h2_m_matrix(pole(f)).transpose();
    XMatrix xm{std::move(x)};
    xm = shifted_power_step(xm, m_iter);
    for (int i = 0; i < channels; ++i) {
      for (int j = 0; j < n; ++j) {
        xre[(static_cast<Eigen::Index>(i) * h + f) * n + j] = xm.x(j, i).real();
        xim[(static_cast<Eigen::Index>(i) * h + f) * n + j] = xm.x(j, i).imag();
      }
    }
  }
}

}  // namespace s4
