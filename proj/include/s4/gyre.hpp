#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s4/common.hpp"
#include "s4/rng.hpp"

namespace s4 {

// Time-periodic double gyre on [0,2] x [0,1]:
//   psi(x,y,t) = A sin(pi f(x,t)) sin(pi y)
//   f(x,t)     = eps sin(w t) x^2 + x - 2 eps sin(w t) x
struct GyreParams {
  double amplitude = 0.5;
  double omega = 2.0 * M_PI;
  double epsilon = 0.25;
  int nx = 201;
  int ny = 101;
  // v = [-psi_y; psi_x]; the flipped convention (vy = -psi_x) is kept behind
  // a flag because the expanded form in some write-ups carries that sign.
  bool flip_vy = false;

  double dx() const { return 2.0 / (nx - 1); }
  double dy() const { return 1.0 / (ny - 1); }
};

double stream_function(const GyreParams& p, double x, double y, double t);

struct Vel {
  double vx = 0.0, vy = 0.0;
};
Vel velocity(const GyreParams& p, double x, double y, double t);

// Curl of the velocity field, from the closed-form second derivatives.
double vorticity_at(const GyreParams& p, double x, double y, double t);

// Snapshot on the nx x ny grid; entry (ix, iy), column-major flattening is
// iy*nx + ix.
RMatrix vorticity_grid(const GyreParams& p, double t);

struct Trajectory {
  RVector times;       // t0 + k dt_sample
  RMatrix positions;   // steps x 2
  RVector measurements;
};

// Passive advection with RK4 substeps (integrator step dt_sample/substeps),
// positions clamped to the closed domain. Measurements are the analytic
// vorticity at the exact sensor position.
Trajectory advect(const GyreParams& p, double x0, double y0, double t0, double horizon,
                  double dt_sample = 0.005, int substeps = 4);

enum class NoiseMode { clean, noisy, disturbed };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::clean;
  double sigma = 0.1;                 // std of added noise, standardized units
  double disturbance_magnitude = 5.0; // offset at the disturbed step, standardized units
  int disturbance_step = -1;          // -1 = last step
};

const char* noise_mode_name(NoiseMode m);
NoiseMode noise_mode_from_name(const std::string& name);

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
  double standardize(double v) const { return (v - mean) / std; }
  double unstandardize(double v) const { return v * std + mean; }
};

struct SensorSample {
  RMatrix inputs;   // seq_len x 3: standardized measurement, x/2, y
  FMatrix targets;  // t_eval x (nx*ny), standardized vorticity snapshots
};

struct SensorDataset {
  GyreParams params;
  double horizon = 4.0;
  double dt_sample = 0.005;
  int seq_len = 0;
  int t_eval = 0;
  int feature_dim = 3;
  int n_train = 0, n_val = 0, n_test = 0;
  NormStats stats;
  NoiseMode baked_mode = NoiseMode::clean;
  std::vector<SensorSample> samples;  // train, then val, then test

  int split_offset(int split) const;  // 0 train, 1 val, 2 test
  int split_count(int split) const;
  int field_dim() const { return params.nx * params.ny; }
};

// Random initial positions uniform over the domain, initial times uniform in
// [0,1) (one flow period). Standardization statistics come from the train
// measurements only; targets are the second-half vorticity snapshots,
// standardized with the same statistics.
SensorDataset make_dataset(const GyreParams& p, int n_train, int n_val, int n_test,
                           const NoiseSpec& noise, std::uint64_t seed, double horizon = 4.0,
                           double dt_sample = 0.005);

// Measurement-column injection used both at generation time and to derive
// disturbed/noisy variants of a clean split at evaluation time.
void inject_noise(RMatrix& inputs, const NoiseSpec& noise, Rng& rng);

void save_dataset(const SensorDataset& ds, const std::string& path);
SensorDataset load_dataset(const std::string& path);
std::string describe_dataset(const std::string& path);

}  // namespace s4
