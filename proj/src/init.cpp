#include "s4/init.hpp"

#include <cmath>

#include "s4/linalg.hpp"

namespace s4 {

const char* init_kind_name(InitKind k) {
  switch (k) {
    case InitKind::s4d_lin: return "s4d_lin";
    case InitKind::s4d_inv: return "s4d_inv";
    case InitKind::s4d_legs: return "s4d_legs";
    case InitKind::s4d_bw: return "s4d_bw";
  }
  return "?";
}

InitKind init_kind_from_name(const std::string& name) {
  if (name == "s4d_lin" || name == "lin") return InitKind::s4d_lin;
  if (name == "s4d_inv" || name == "inv") return InitKind::s4d_inv;
  if (name == "s4d_legs" || name == "legs") return InitKind::s4d_legs;
  if (name == "s4d_bw" || name == "bw") return InitKind::s4d_bw;
  throw ConfigError("unknown init kind: " + name);
}

CVector init_poles(InitKind kind, int n) {
  if (n < 1) throw SizeError("init_poles: n must be >= 1");
  CVector a(n);
  switch (kind) {
    case InitKind::s4d_lin:
      for (int k = 0; k < n; ++k) a[k] = Complex(-0.5, M_PI * k);
      break;
    case InitKind::s4d_inv:
      for (int k = 0; k < n; ++k) {
        a[k] = Complex(-0.5, (n / M_PI) * (static_cast<double>(n) / (2.0 * k + 1.0) - 1.0));
      }
      break;
    case InitKind::s4d_legs:
      a = to_dplr(nplr_decompose(build_hippo(n))).lambda;
      break;
    case InitKind::s4d_bw:
      // one-based index per the Butterworth product formula
      for (int k = 1; k <= n; ++k) {
        a[k - 1] = std::polar(1.0, (2.0 * k + n - 1.0) * M_PI / (2.0 * n));
      }
      break;
  }
  return a;
}

DiagonalSSM init_diagonal(const InitSpec& spec, Rng& rng) {
  if (spec.dt_min > spec.dt_max || spec.dt_min <= 0.0) {
    throw SizeError("init_diagonal: need 0 < dt_min <= dt_max");
  }
  DiagonalSSM sys;
  sys.a = init_poles(spec.kind, spec.n);
  sys.b = CVector::Ones(spec.n);
  sys.c.resize(spec.channels, spec.n);
  const double cscale = std::sqrt(1.0 / (2.0 * spec.n));  // per-entry var 1/n
  for (int i = 0; i < spec.channels; ++i) {
    for (int j = 0; j < spec.n; ++j) sys.c(i, j) = cscale * rng.cnormal();
  }
  sys.log_dt = rng.uniform(std::log(spec.dt_min), std::log(spec.dt_max));
  return sys;
}

std::function<Complex(Complex)> butterworth_reference(int n, double omega_c) {
  if (n < 1 || !(omega_c > 0.0)) throw SizeError("butterworth_reference: need n >= 1, omega_c > 0");
  CVector poles(n);
  for (int k = 1; k <= n; ++k) {
    poles[k - 1] = omega_c * std::polar(1.0, (2.0 * k + n - 1.0) * M_PI / (2.0 * n));
  }
  return [poles, omega_c](Complex s) {
    Complex g(1.0, 0.0);
    for (Eigen::Index j = 0; j < poles.size(); ++j) g *= omega_c / (s - poles[j]);
    return g;
  };
}

CVector butterworth_residues(int n, double omega_c) {
  CVector poles(n);
  for (int k = 1; k <= n; ++k) {
    poles[k - 1] = omega_c * std::polar(1.0, (2.0 * k + n - 1.0) * M_PI / (2.0 * n));
  }
  const double num = std::pow(omega_c, n);
  CVector res(n);
  for (int j = 0; j < n; ++j) {
    Complex den(1.0, 0.0);
    for (int m = 0; m < n; ++m) {
      if (m != j) den *= poles[j] - poles[m];
    }
    res[j] = num / den;
  }
  return res;
}

TransferSample transfer_eval(const DiagonalSSM& sys, double omega) {
  const Complex s(0.0, omega * sys.dt());
  Complex g(0.0, 0.0);
  for (Eigen::Index j = 0; j < sys.n(); ++j) {
    const Complex d = s - sys.a[j];
    if (std::abs(d) < 1e-13 * (1.0 + std::abs(sys.a[j]))) {
      throw SingularityError("transfer_eval: pole on the evaluation axis");
    }
    g += sys.c(0, j) * sys.b[j] / d;
  }
  TransferSample out;
  out.omega = omega;
  out.magnitude_db = 20.0 * std::log10(std::abs(g));
  out.phase_deg = std::arg(g) * 180.0 / M_PI;
  return out;
}

CMatrix h2_m_matrix(const CVector& a) {
  const Eigen::Index n = a.size();
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = -1.0 / (a[i] + std::conj(a[j]));
  }
  return m;
}

H2Report h2_norm(const DiagonalSSM& sys) {
  for (Eigen::Index j = 0; j < sys.n(); ++j) {
    if (!(sys.a[j].real() < 0.0)) {
      throw StabilityError("h2_norm: a[" + std::to_string(j) + "] is not Hurwitz");
    }
  }
  H2Report rep;
  rep.m = h2_m_matrix(sys.a);
  rep.per_channel.resize(sys.channels());
  rep.norm_sq = 0.0;
  for (Eigen::Index i = 0; i < sys.channels(); ++i) {
    const CVector y = (sys.b.array() * sys.c.row(i).transpose().array()).conjugate();
    rep.per_channel[i] = (y.adjoint() * rep.m * y).value().real();
    rep.norm_sq += rep.per_channel[i];
  }
  return rep;
}

RVector bode_grid(double lo, double hi, int per_decade) {
  const double decades = std::log10(hi / lo);
  const int count = static_cast<int>(std::ceil(decades * per_decade)) + 1;
  RVector grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = lo * std::pow(10.0, decades * i / (count - 1));
  }
  return grid;
}

}  // namespace s4
