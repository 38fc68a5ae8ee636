#include "s4/gyre.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "s4/parallel.hpp"

namespace s4 {

namespace {

double f_of(const GyreParams& p, double x, double t) {
  const double e = p.epsilon * std::sin(p.omega * t);
  return e * x * x + x - 2.0 * e * x;
}

double fx_of(const GyreParams& p, double x, double t) {
  const double e = p.epsilon * std::sin(p.omega * t);
  return 2.0 * e * x + 1.0 - 2.0 * e;
}

double fxx_of(const GyreParams& p, double t) { return 2.0 * p.epsilon * std::sin(p.omega * t); }

}  // namespace

double stream_function(const GyreParams& p, double x, double y, double t) {
  return p.amplitude * std::sin(M_PI * f_of(p, x, t)) * std::sin(M_PI * y);
}

Vel velocity(const GyreParams& p, double x, double y, double t) {
  const double f = f_of(p, x, t);
  const double piA = M_PI * p.amplitude;
  Vel v;
  v.vx = -piA * std::sin(M_PI * f) * std::cos(M_PI * y);
  v.vy = piA * std::cos(M_PI * f) * std::sin(M_PI * y) * fx_of(p, x, t);
  if (p.flip_vy) v.vy = -v.vy;
  return v;
}

double vorticity_at(const GyreParams& p, double x, double y, double t) {
  // d(vy)/dx - d(vx)/dy with vy = psi_x, vx = -psi_y
  const double f = f_of(p, x, t);
  const double fx = fx_of(p, x, t);
  const double fxx = fxx_of(p, t);
  const double piA = M_PI * p.amplitude;
  const double sy = std::sin(M_PI * y);
  double dvy_dx = piA * sy * (-M_PI * std::sin(M_PI * f) * fx * fx + std::cos(M_PI * f) * fxx);
  if (p.flip_vy) dvy_dx = -dvy_dx;
  const double dvx_dy = M_PI * piA * std::sin(M_PI * f) * sy;
  return dvy_dx - dvx_dy;
}

RMatrix vorticity_grid(const GyreParams& p, double t) {
  RMatrix w(p.nx, p.ny);
  for (int iy = 0; iy < p.ny; ++iy) {
    const double y = iy * p.dy();
    for (int ix = 0; ix < p.nx; ++ix) {
      w(ix, iy) = vorticity_at(p, ix * p.dx(), y, t);
    }
  }
  return w;
}

Trajectory advect(const GyreParams& p, double x0, double y0, double t0, double horizon,
                  double dt_sample, int substeps) {
  const int steps = static_cast<int>(std::llround(horizon / dt_sample)) + 1;
  Trajectory tr;
  tr.times.resize(steps);
  tr.positions.resize(steps, 2);
  tr.measurements.resize(steps);

  double x = std::clamp(x0, 0.0, 2.0);
  double y = std::clamp(y0, 0.0, 1.0);
  const double hsub = dt_sample / substeps;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * dt_sample;
    tr.times[k] = t;
    tr.positions(k, 0) = x;
    tr.positions(k, 1) = y;
    tr.measurements[k] = vorticity_at(p, x, y, t);
    if (k + 1 == steps) break;
    for (int s = 0; s < substeps; ++s) {
      const double ts = t + s * hsub;
      const Vel k1 = velocity(p, x, y, ts);
      const Vel k2 = velocity(p, x + 0.5 * hsub * k1.vx, y + 0.5 * hsub * k1.vy, ts + 0.5 * hsub);
      const Vel k3 = velocity(p, x + 0.5 * hsub * k2.vx, y + 0.5 * hsub * k2.vy, ts + 0.5 * hsub);
      const Vel k4 = velocity(p, x + hsub * k3.vx, y + hsub * k3.vy, ts + hsub);
      x += hsub / 6.0 * (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx);
      y += hsub / 6.0 * (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy);
      x = std::clamp(x, 0.0, 2.0);
      y = std::clamp(y, 0.0, 1.0);
    }
  }
  return tr;
}

const char* noise_mode_name(NoiseMode m) {
  switch (m) {
    case NoiseMode::clean: return "clean";
    case NoiseMode::noisy: return "noisy";
    case NoiseMode::disturbed: return "disturbed";
  }
  return "?";
}

NoiseMode noise_mode_from_name(const std::string& name) {
  if (name == "clean") return NoiseMode::clean;
  if (name == "noisy") return NoiseMode::noisy;
  if (name == "disturbed") return NoiseMode::disturbed;
  throw ConfigError("unknown noise mode: " + name);
}

void inject_noise(RMatrix& inputs, const NoiseSpec& noise, Rng& rng) {
  if (noise.mode == NoiseMode::clean) return;
  if (noise.mode == NoiseMode::noisy) {
    for (Eigen::Index k = 0; k < inputs.rows(); ++k) {
      inputs(k, 0) += noise.sigma * rng.normal();
    }
    return;
  }
  // disturbed: one severely corrupted measurement, by default the last step
  Eigen::Index step = noise.disturbance_step < 0 ? inputs.rows() - 1 : noise.disturbance_step;
  step = std::clamp<Eigen::Index>(step, 0, inputs.rows() - 1);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  inputs(step, 0) += sign * noise.disturbance_magnitude;
}

int SensorDataset::split_offset(int split) const {
  switch (split) {
    case 0: return 0;
    case 1: return n_train;
    case 2: return n_train + n_val;
  }
  throw SizeError("split_offset: split must be 0, 1 or 2");
}

int SensorDataset::split_count(int split) const {
  switch (split) {
    case 0: return n_train;
    case 1: return n_val;
    case 2: return n_test;
  }
  throw SizeError("split_count: split must be 0, 1 or 2");
}

SensorDataset make_dataset(const GyreParams& p, int n_train, int n_val, int n_test,
                           const NoiseSpec& noise, std::uint64_t seed, double horizon,
                           double dt_sample) {
  if (n_train < 1 || n_val < 1 || n_test < 1) throw SizeError("make_dataset: counts must be >= 1");
  SensorDataset ds;
  ds.params = p;
  ds.horizon = horizon;
  ds.dt_sample = dt_sample;
  ds.n_train = n_train;
  ds.n_val = n_val;
  ds.n_test = n_test;
  ds.baked_mode = noise.mode;
  const int total = n_train + n_val + n_test;
  ds.seq_len = static_cast<int>(std::llround(horizon / dt_sample)) + 1;
  ds.t_eval = (ds.seq_len + 1) / 2;  // second half of the trajectory
  ds.samples.resize(total);

  const Rng base(seed);
  std::vector<Trajectory> trajectories(total);
  parallel_for(total, [&](int idx) {
    Rng rng = base.fork(0x10000 + static_cast<std::uint64_t>(idx));
    const double x0 = rng.uniform(0.0, 2.0);
    const double y0 = rng.uniform(0.0, 1.0);
    const double t0 = rng.uniform(0.0, 1.0);  // one flow period
    trajectories[idx] = advect(p, x0, y0, t0, horizon, dt_sample);
  });

  // standardization statistics from train measurements only
  double mean = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < n_train; ++i) {
    mean += trajectories[i].measurements.sum();
    count += trajectories[i].measurements.size();
  }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (int i = 0; i < n_train; ++i) {
    var += (trajectories[i].measurements.array() - mean).square().sum();
  }
  var /= static_cast<double>(count);
  ds.stats.mean = mean;
  ds.stats.std = std::sqrt(var);
  if (!(ds.stats.std > 0.0)) ds.stats.std = 1.0;

  const int field = ds.field_dim();
  parallel_for(total, [&](int idx) {
    const Trajectory& tr = trajectories[idx];
    SensorSample& s = ds.samples[idx];
    s.inputs.resize(ds.seq_len, 3);
    for (int k = 0; k < ds.seq_len; ++k) {
      s.inputs(k, 0) = ds.stats.standardize(tr.measurements[k]);
      s.inputs(k, 1) = tr.positions(k, 0) / 2.0;  // locations normalized to [0,1]
      s.inputs(k, 2) = tr.positions(k, 1);
    }
    Rng rng = base.fork(0x20000 + static_cast<std::uint64_t>(idx));
    inject_noise(s.inputs, noise, rng);

    s.targets.resize(ds.t_eval, field);
    for (int e = 0; e < ds.t_eval; ++e) {
      const int k = ds.seq_len - ds.t_eval + e;
      const RMatrix w = vorticity_grid(p, tr.times[k]);
      for (int iy = 0; iy < p.ny; ++iy) {
        for (int ix = 0; ix < p.nx; ++ix) {
          s.targets(e, iy * p.nx + ix) = static_cast<float>(ds.stats.standardize(w(ix, iy)));
        }
      }
    }
  });
  return ds;
}

namespace {

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ofstream& f, double v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
double read_f64(std::ifstream& f) {
  double v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_dataset(const SensorDataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open dataset for writing: " + path);
  f.write("S4DS", 4);
  write_u32(f, 1);  // version
  write_u32(f, static_cast<std::uint32_t>(ds.n_train));
  write_u32(f, static_cast<std::uint32_t>(ds.n_val));
  write_u32(f, static_cast<std::uint32_t>(ds.n_test));
  write_u32(f, static_cast<std::uint32_t>(ds.seq_len));
  write_u32(f, static_cast<std::uint32_t>(ds.t_eval));
  write_u32(f, static_cast<std::uint32_t>(ds.feature_dim));
  write_u32(f, static_cast<std::uint32_t>(ds.params.nx));
  write_u32(f, static_cast<std::uint32_t>(ds.params.ny));
  write_u32(f, static_cast<std::uint32_t>(ds.baked_mode));
  write_f64(f, ds.stats.mean);
  write_f64(f, ds.stats.std);
  write_f64(f, ds.horizon);
  write_f64(f, ds.dt_sample);
  write_f64(f, ds.params.amplitude);
  write_f64(f, ds.params.omega);
  write_f64(f, ds.params.epsilon);
  std::vector<float> row(static_cast<std::size_t>(ds.feature_dim));
  for (const auto& s : ds.samples) {
    for (Eigen::Index k = 0; k < s.inputs.rows(); ++k) {
      for (Eigen::Index c = 0; c < s.inputs.cols(); ++c) {
        row[static_cast<std::size_t>(c)] = static_cast<float>(s.inputs(k, c));
      }
      f.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    for (Eigen::Index e = 0; e < s.targets.rows(); ++e) {
      for (Eigen::Index j = 0; j < s.targets.cols(); ++j) {
        const float v = s.targets(e, j);
        f.write(reinterpret_cast<const char*>(&v), sizeof(float));
      }
    }
  }
  if (!f) throw IoError("dataset write failed: " + path);
}

SensorDataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open dataset: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "S4DS", 4) != 0) throw IoError("not a dataset file: " + path);
  if (read_u32(f) != 1) throw IoError("unsupported dataset version");
  SensorDataset ds;
  ds.n_train = static_cast<int>(read_u32(f));
  ds.n_val = static_cast<int>(read_u32(f));
  ds.n_test = static_cast<int>(read_u32(f));
  ds.seq_len = static_cast<int>(read_u32(f));
  ds.t_eval = static_cast<int>(read_u32(f));
  ds.feature_dim = static_cast<int>(read_u32(f));
  ds.params.nx = static_cast<int>(read_u32(f));
  ds.params.ny = static_cast<int>(read_u32(f));
  ds.baked_mode = static_cast<NoiseMode>(read_u32(f));
  ds.stats.mean = read_f64(f);
  ds.stats.std = read_f64(f);
  ds.horizon = read_f64(f);
  ds.dt_sample = read_f64(f);
  ds.params.amplitude = read_f64(f);
  ds.params.omega = read_f64(f);
  ds.params.epsilon = read_f64(f);
  const int total = ds.n_train + ds.n_val + ds.n_test;
  const int field = ds.field_dim();
  ds.samples.resize(total);
  std::vector<float> buf;
  for (auto& s : ds.samples) {
    s.inputs.resize(ds.seq_len, ds.feature_dim);
    buf.resize(static_cast<std::size_t>(ds.seq_len) * ds.feature_dim);
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
    for (int k = 0; k < ds.seq_len; ++k) {
      for (int c = 0; c < ds.feature_dim; ++c) {
        s.inputs(k, c) = buf[static_cast<std::size_t>(k) * ds.feature_dim + c];
      }
    }
    s.targets.resize(ds.t_eval, field);
    buf.resize(static_cast<std::size_t>(ds.t_eval) * field);
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
    for (int e = 0; e < ds.t_eval; ++e) {
      for (int j = 0; j < field; ++j) {
        s.targets(e, j) = buf[static_cast<std::size_t>(e) * field + j];
      }
    }
  }
  if (!f) throw IoError("dataset truncated: " + path);
  return ds;
}

std::string describe_dataset(const std::string& path) {
  // header only; the payload may be large
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open dataset: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "S4DS", 4) != 0) throw IoError("not a dataset file: " + path);
  if (read_u32(f) != 1) throw IoError("unsupported dataset version");
  SensorDataset ds;
  ds.n_train = static_cast<int>(read_u32(f));
  ds.n_val = static_cast<int>(read_u32(f));
  ds.n_test = static_cast<int>(read_u32(f));
  ds.seq_len = static_cast<int>(read_u32(f));
  ds.t_eval = static_cast<int>(read_u32(f));
  ds.feature_dim = static_cast<int>(read_u32(f));
  ds.params.nx = static_cast<int>(read_u32(f));
  ds.params.ny = static_cast<int>(read_u32(f));
  ds.baked_mode = static_cast<NoiseMode>(read_u32(f));
  ds.stats.mean = read_f64(f);
  ds.stats.std = read_f64(f);
  ds.horizon = read_f64(f);
  ds.dt_sample = read_f64(f);
  ds.params.amplitude = read_f64(f);
  ds.params.omega = read_f64(f);
  ds.params.epsilon = read_f64(f);
  if (!f) throw IoError("dataset header truncated: " + path);
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "dataset %s\n"
                "  samples: train=%d val=%d test=%d\n"
                "  sequence: %d steps of dt=%g (horizon %g), eval steps %d\n"
                "  features: %d  grid: %d x %d (field dim %d)\n"
                "  stats: mean=%.10g std=%.10g\n"
                "  gyre: A=%g omega=%g epsilon=%g\n"
                "  baked noise mode: %s\n",
                path.c_str(), ds.n_train, ds.n_val, ds.n_test, ds.seq_len, ds.dt_sample,
                ds.horizon, ds.t_eval, ds.feature_dim, ds.params.nx, ds.params.ny, ds.field_dim(),
                ds.stats.mean, ds.stats.std, ds.params.amplitude, ds.params.omega,
                ds.params.epsilon, noise_mode_name(ds.baked_mode));
  return buf;
}

}  // namespace s4
