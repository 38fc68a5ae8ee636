#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "s4/init.hpp"
#include "s4/linalg.hpp"

using namespace s4;

namespace {

DiagonalSSM separated_system(Rng& rng, int n) {
  // well-separated poles keep the M-matrix spectrum usable in tests
  DiagonalSSM sys;
  sys.a.resize(n);
  sys.b.resize(n);
  sys.c.resize(1, n);
  for (int j = 0; j < n; ++j) {
    sys.a[j] = Complex(-(0.5 + 1.5 * rng.uniform()), 4.0 * (j - (n - 1) / 2.0) + rng.normal());
    sys.b[j] = rng.cnormal();
    sys.c(0, j) = rng.cnormal();
  }
  sys.log_dt = 0.0;
  return sys;
}

}  // namespace

TEST_CASE("s4d_lin poles") {
  const CVector a = init_poles(InitKind::s4d_lin, 4);
  CHECK(std::abs(a[0] - Complex(-0.5, 0.0)) < 1e-12);
  CHECK(std::abs(a[1] - Complex(-0.5, 3.1415926535897931)) < 1e-12);
  CHECK(std::abs(a[2] - Complex(-0.5, 6.2831853071795862)) < 1e-12);
  CHECK(std::abs(a[3] - Complex(-0.5, 9.4247779607693793)) < 1e-12);
}

TEST_CASE("s4d_inv first pole") {
  const CVector a = init_poles(InitKind::s4d_inv, 4);
  CHECK(std::abs(a[0] - Complex(-0.5, 3.8197186342054881)) < 1e-10);
}

TEST_CASE("s4d_bw n=2 poles") {
  const CVector a = init_poles(InitKind::s4d_bw, 2);
  CHECK(std::abs(a[0] - Complex(-0.7071067811865476, 0.7071067811865476)) < 1e-12);
  CHECK(std::abs(a[1] - Complex(-0.7071067811865476, -0.7071067811865476)) < 1e-12);
}

TEST_CASE("bw poles lie on the unit circle in the left half plane") {
  for (int n : {1, 2, 3, 4, 8, 16}) {
    const CVector a = init_poles(InitKind::s4d_bw, n);
    for (int j = 0; j < n; ++j) {
      CHECK(std::abs(std::abs(a[j]) - 1.0) < 1e-12);
      CHECK(a[j].real() < 0.0);
    }
  }
}

TEST_CASE("lin and inv real parts are exactly -1/2") {
  for (InitKind kind : {InitKind::s4d_lin, InitKind::s4d_inv}) {
    const CVector a = init_poles(kind, 12);
    for (int j = 0; j < 12; ++j) CHECK(a[j].real() == -0.5);
  }
}

TEST_CASE("init_diagonal fills b, c, dt per spec") {
  InitSpec spec;
  spec.kind = InitKind::s4d_lin;
  spec.n = 16;
  spec.channels = 2;
  Rng rng(41);
  const DiagonalSSM sys = init_diagonal(spec, rng);
  CHECK(sys.n() == 16);
  CHECK(sys.channels() == 2);
  for (int j = 0; j < 16; ++j) CHECK(std::abs(sys.b[j] - Complex(1, 0)) < 1e-15);
  CHECK(sys.dt() >= spec.dt_min);
  CHECK(sys.dt() <= spec.dt_max);
}

TEST_CASE("butterworth reference gains") {
  auto g2 = butterworth_reference(2, 1.0);
  CHECK(std::abs(g2(Complex(0, 0))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(g2(Complex(0, 1))) == doctest::Approx(0.7071067811865476).epsilon(1e-9));

  auto g4 = butterworth_reference(4, 1.0);
  CHECK(std::abs(g4(Complex(0, 10))) == doctest::Approx(1e-4).epsilon(0.05));
}

TEST_CASE("butterworth residues reproduce the product transfer function") {
  for (int n : {2, 4, 8}) {
    auto ref = butterworth_reference(n, 1.0);
    const CVector res = butterworth_residues(n, 1.0);
    const CVector poles = init_poles(InitKind::s4d_bw, n);
    for (double w : {0.0, 0.3, 1.0, 2.5}) {
      Complex sum(0, 0);
      for (int j = 0; j < n; ++j) sum += res[j] / (Complex(0, w) - poles[j]);
      CHECK(std::abs(sum - ref(Complex(0, w))) < 1e-9);
    }
  }
}

TEST_CASE("transfer_eval hand cases") {
  DiagonalSSM sys;
  sys.a = CVector::Constant(1, Complex(-1, 0));
  sys.b = CVector::Ones(1);
  sys.c = CMatrix::Ones(1, 1);
  sys.log_dt = 0.0;  // dt = 1 so reported omega is the raw frequency

  const TransferSample at0 = transfer_eval(sys, 0.0);
  CHECK(at0.magnitude_db == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(at0.phase_deg == doctest::Approx(0.0).epsilon(1e-12));

  const TransferSample at1 = transfer_eval(sys, 1.0);
  CHECK(std::pow(10.0, at1.magnitude_db / 20.0) == doctest::Approx(0.7071067811865476));
  CHECK(at1.phase_deg == doctest::Approx(-45.0).epsilon(1e-10));
}

TEST_CASE("conjugate-pair system has odd phase") {
  DiagonalSSM sys;
  sys.a.resize(2);
  sys.a << Complex(-0.5, 2.0), Complex(-0.5, -2.0);
  sys.b = CVector::Ones(2);
  sys.c.resize(1, 2);
  sys.c << Complex(0.3, 0.7), Complex(0.3, -0.7);
  sys.log_dt = 0.0;
  for (double w : {0.5, 1.5, 3.0}) {
    const TransferSample plus = transfer_eval(sys, w);
    const TransferSample minus = transfer_eval(sys, -w);
    CHECK(plus.magnitude_db == doctest::Approx(minus.magnitude_db).epsilon(1e-10));
    CHECK(plus.phase_deg == doctest::Approx(-minus.phase_deg).epsilon(1e-10));
  }
}

TEST_CASE("h2_norm hand cases") {
  DiagonalSSM sys;
  sys.a = CVector::Constant(1, Complex(-1, 0));
  sys.b = CVector::Ones(1);
  sys.c = CMatrix::Constant(1, 1, Complex(2, 0));
  sys.log_dt = 0.0;
  CHECK(h2_norm(sys).norm_sq == doctest::Approx(2.0).epsilon(1e-12));

  DiagonalSSM pair;
  pair.a.resize(2);
  pair.a << Complex(-0.5, M_PI), Complex(-0.5, -M_PI);
  pair.b = CVector::Ones(2);
  pair.c = CMatrix::Ones(1, 2);
  pair.log_dt = 0.0;
  const H2Report rep = h2_norm(pair);
  CHECK(rep.m(0, 0).real() == doctest::Approx(1.0));
  CHECK(rep.m(1, 1).real() == doctest::Approx(1.0));
}

TEST_CASE("h2_norm matches time-domain trapezoid quadrature") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + int(rng.uniform() * 8.0);
    DiagonalSSM sys;
    sys.a.resize(n);
    sys.b.resize(n);
    sys.c.resize(1, n);
    for (int j = 0; j < n; ++j) {
      sys.a[j] = Complex(-(0.5 + 1.5 * rng.uniform()), 3.0 * (2.0 * rng.uniform() - 1.0));
      sys.b[j] = rng.cnormal();
      sys.c(0, j) = rng.cnormal();
    }
    sys.log_dt = 0.0;
    const double closed = h2_norm(sys).norm_sq;

    double min_re = 1e30;
    for (int j = 0; j < n; ++j) min_re = std::min(min_re, std::abs(sys.a[j].real()));
    const double horizon = 40.0 / min_re;
    const int steps = 200000;
    const double h = horizon / steps;
    double quad = 0.0;
    for (int k = 0; k <= steps; ++k) {
      const double t = k * h;
      Complex imp(0, 0);
      for (int j = 0; j < n; ++j) imp += sys.c(0, j) * sys.b[j] * std::exp(sys.a[j] * t);
      const double val = std::norm(imp);
      quad += (k == 0 || k == steps) ? 0.5 * val : val;
    }
    quad *= h;
    CHECK(std::abs(quad - closed) / std::abs(closed) < 1e-4);
  }
}

TEST_CASE("M-matrix is Hermitian positive definite") {
  Rng rng(43);
  const DiagonalSSM sys = separated_system(rng, 8);
  const CMatrix m = h2_m_matrix(sys.a);
  CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  auto [ev, v] = hermitian_eig(m);
  for (int j = 0; j < 8; ++j) CHECK(ev[j] > 0.0);
}

TEST_CASE("h2_norm is invariant under the b/c coupling scale") {
  Rng rng(44);
  DiagonalSSM sys = separated_system(rng, 6);
  const double before = h2_norm(sys).norm_sq;
  sys.b *= 3.0;
  sys.c /= 3.0;
  CHECK(h2_norm(sys).norm_sq == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("unit-norm couplings are bounded below by lambda_min") {
  Rng rng(45);
  const DiagonalSSM base = separated_system(rng, 8);
  const CMatrix m = h2_m_matrix(base.a);
  auto [ev, vecs] = hermitian_eig(m);
  for (int trial = 0; trial < 20; ++trial) {
    DiagonalSSM sys = base;
    CVector x(8);
    for (int j = 0; j < 8; ++j) x[j] = rng.cnormal();
    x /= x.norm();
    sys.b = CVector::Ones(8);
    sys.c.row(0) = x.transpose();
    CHECK(h2_norm(sys).norm_sq >= ev[0] - 1e-10);
  }
  // the conjugate of the bottom eigenvector achieves the bound
  DiagonalSSM sys = base;
  sys.b = CVector::Ones(8);
  sys.c.row(0) = vecs.col(0).conjugate().transpose();
  CHECK(h2_norm(sys).norm_sq == doctest::Approx(ev[0]).epsilon(1e-9));
}

TEST_CASE("h2_norm rejects non-Hurwitz systems") {
  DiagonalSSM sys;
  sys.a = CVector::Constant(1, Complex(0.1, 0));
  sys.b = CVector::Ones(1);
  sys.c = CMatrix::Ones(1, 1);
  CHECK_THROWS_AS(h2_norm(sys), StabilityError);
}

TEST_CASE("transfer_eval flags a pole on the axis") {
  DiagonalSSM sys;
  sys.a = CVector::Constant(1, Complex(0.0, 1.0));
  sys.b = CVector::Ones(1);
  sys.c = CMatrix::Ones(1, 1);
  sys.log_dt = 0.0;
  CHECK_THROWS_AS(transfer_eval(sys, 1.0), SingularityError);
}

TEST_CASE("bode grid is log spaced with the configured density") {
  const RVector grid = bode_grid(1e-2, 1e4, 200);
  CHECK(grid[0] == doctest::Approx(1e-2));
  CHECK(grid[grid.size() - 1] == doctest::Approx(1e4));
  CHECK(grid.size() == 1201);
}
