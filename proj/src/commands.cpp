#include "s4/commands.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

#include "s4/csv.hpp"
#include "s4/train.hpp"

namespace s4 {

GyreParams gyre_from_config(const RunConfig& cfg) {
  GyreParams p;
  p.nx = cfg.get_int("data.nx");
  p.ny = cfg.get_int("data.ny");
  return p;
}

NoiseSpec noise_from_config(const RunConfig& cfg) {
  NoiseSpec n;
  n.mode = noise_mode_from_name(cfg.get("data.noise"));
  n.sigma = cfg.get_double("data.noise_sigma");
  n.disturbance_magnitude = cfg.get_double("data.noise_disturbance");
  return n;
}

ModelConfig model_from_config(const RunConfig& cfg, int input_dim, int output_dim) {
  ModelConfig m;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  const std::string kind = cfg.get("model.kind");
  if (kind == "rs4d") {
    m.robust = true;
  } else if (kind == "s4d") {
    m.robust = false;
  } else {
    throw ConfigError("model.kind must be rs4d or s4d, got: " + kind);
  }
  m.hidden = cfg.get_int("model.hidden");
  m.state_n = cfg.get_int("model.state");
  m.bw_state = cfg.get_int("model.bw_state");
  m.lin_layers = cfg.get_int("model.layers");
  m.channels = cfg.get_int("model.channels");
  m.mem_init = init_kind_from_name(cfg.get("model.init"));
  if (m.mem_init == InitKind::s4d_bw) {
    throw ConfigError("model.init selects memorization layers; use model.kind=rs4d for the BW layer");
  }
  m.decoder_hidden = cfg.get_int("model.decoder_hidden");
  m.dt_min = cfg.get_double("model.dt_min");
  m.dt_max = cfg.get_double("model.dt_max");
  const std::string disc = cfg.get("model.disc");
  if (disc == "zoh") {
    m.disc = Discretization::zoh;
  } else if (disc == "bilinear") {
    m.disc = Discretization::bilinear;
  } else {
    throw ConfigError("model.disc must be zoh or bilinear, got: " + disc);
  }
  m.s4dc = cfg.get_bool("model.s4dc");
  m.s4dc_b_through_c = cfg.get_bool("model.s4dc_b_through_c");
  m.seed = cfg.get_u64("model.seed");
  const double lr = cfg.get_double("train.lr");
  const double lr_ssm = cfg.get_double("train.lr_ssm");
  m.ssm_lr_scale = lr > 0.0 ? lr_ssm / lr : 1.0;
  return m;
}

int cmd_gen_data(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const GyreParams p = gyre_from_config(cfg);
  const NoiseSpec noise = noise_from_config(cfg);
  SensorDataset ds = make_dataset(p, cfg.get_int("data.train"), cfg.get_int("data.val"),
                                  cfg.get_int("data.test"), noise, cfg.get_u64("data.seed"),
                                  cfg.get_double("data.horizon"), cfg.get_double("data.dt"));
  std::filesystem::create_directories(out_dir);
  save_dataset(ds, out_dir + "/dataset.s4ds");
  write_manifest(cfg, out_dir);
  log << "wrote " << out_dir << "/dataset.s4ds (" << ds.samples.size() << " samples, seq "
      << ds.seq_len << ", field " << ds.field_dim() << ")\n";
  return 0;
}

int cmd_describe(const std::string& dataset_path, std::ostream& out) {
  out << describe_dataset(dataset_path);
  return 0;
}

namespace {

struct KernelCheckRow {
  int n;
  Eigen::Index L;
  std::string init;
  std::string path_a, path_b;
  double max_abs_diff;
  double tol;
};

KernelCheckRow check_diagonal(InitKind kind, int n, Eigen::Index L, Rng& rng) {
  InitSpec spec;
  spec.kind = kind;
  spec.n = n;
  DiagonalSSM sys = init_diagonal(spec, rng);
  const DiscreteSSM d = discretize_zoh(sys, sys.dt());
  const ConvKernel naive = kernel_naive(d, L);
  const ConvKernel vandermonde = kernel_vandermonde(d, L);
  KernelCheckRow row;
  row.n = n;
  row.L = L;
  row.init = init_kind_name(kind);
  row.path_a = "vandermonde";
  row.path_b = "naive";
  row.max_abs_diff = (naive.values - vandermonde.values).cwiseAbs().maxCoeff();
  row.tol = 1e-10;
  return row;
}

KernelCheckRow check_dplr(int n, Eigen::Index L, double dt, Rng& rng) {
  DplrSystem sys = to_dplr(nplr_decompose(build_hippo(n)));
  sys.c.resize(1, n);
  for (int j = 0; j < n; ++j) sys.c(0, j) = rng.cnormal() / std::sqrt(2.0 * n);
  const ConvKernel gen = kernel_dplr_genfun(sys, dt, L);
  const DiscreteSSM d = discretize_bilinear(DenseSSM{dplr_dense(sys), sys.b, sys.c}, dt);
  const ConvKernel naive = kernel_naive(d, L);
  KernelCheckRow row;
  row.n = n;
  row.L = L;
  row.init = "hippo_dplr";
  row.path_a = "dplr_genfun";
  row.path_b = "naive";
  row.max_abs_diff = (naive.values - gen.values).cwiseAbs().maxCoeff();
  row.tol = 1e-6;
  return row;
}

}  // namespace

int cmd_kernel_check(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
  Rng rng(2024);
  std::vector<KernelCheckRow> rows;
  for (InitKind kind :
       {InitKind::s4d_lin, InitKind::s4d_inv, InitKind::s4d_legs, InitKind::s4d_bw}) {
    rows.push_back(check_diagonal(kind, 8, 64, rng));
    rows.push_back(check_diagonal(kind, 32, 512, rng));
  }
  rows.push_back(check_dplr(8, 64, 0.01, rng));
  rows.push_back(check_dplr(16, 256, 0.01, rng));

  std::filesystem::create_directories(out_dir);
  auto csv = open_out(out_dir + "/kernel_check.csv");
  csv << "n,L,init,path_a,path_b,max_abs_diff\n";
  bool ok = true;
  for (const auto& r : rows) {
    csv << r.n << "," << r.L << "," << r.init << "," << r.path_a << "," << r.path_b << ","
        << fmt_g(r.max_abs_diff) << "\n";
    const bool pass = r.max_abs_diff < r.tol;
    ok = ok && pass;
    out << (pass ? "ok   " : "FAIL ") << r.init << " n=" << r.n << " L=" << r.L << " "
        << r.path_a << " vs " << r.path_b << ": " << fmt_g(r.max_abs_diff) << " (tol "
        << fmt_g(r.tol) << ")\n";
  }
  write_manifest(cfg, out_dir);
  return ok ? 0 : 1;
}

int cmd_train(const RunConfig& cfg, const std::string& dataset_path, const std::string& out_dir,
              std::ostream& log) {
  const SensorDataset ds = load_dataset(dataset_path);
  ModelConfig mc = model_from_config(cfg, ds.feature_dim, ds.field_dim());
  ShredModel model(mc);

  TrainOptions opts;
  opts.epochs = cfg.get_int("train.epochs");
  opts.batch = cfg.get_int("train.batch");
  opts.lr = cfg.get_double("train.lr");
  opts.lr_ssm = cfg.get_double("train.lr_ssm");
  opts.seed = cfg.get_u64("train.seed");
  opts.t_eval = cfg.get_int("train.t_eval");

  const TrainResult res = train_model(model, ds, opts, &log);

  std::filesystem::create_directories(out_dir);
  save_checkpoint(model.tape(), out_dir + "/checkpoint.s4ck");
  auto loss_csv = open_out(out_dir + "/loss.csv");
  loss_csv << "epoch,train_mse,val_rmse\n";
  for (std::size_t e = 0; e < res.epochs.size(); ++e) {
    loss_csv << e + 1 << "," << fmt_g(res.epochs[e].train_mse) << ","
             << fmt_g(res.epochs[e].val_rmse) << "\n";
  }
  auto metrics = open_out(out_dir + "/metrics.txt");
  metrics << "final_train_rmse=" << fmt_g(res.final_train_rmse) << "\n"
          << "final_val_rmse=" << fmt_g(res.final_val_rmse) << "\n"
          << "baseline_val_rmse=" << fmt_g(res.baseline_val_rmse) << "\n"
          << "val_over_baseline=" << fmt_g(res.final_val_rmse / res.baseline_val_rmse) << "\n";
  write_manifest(cfg, out_dir);
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& dataset_path, const std::string& checkpoint,
             const std::string& out_dir, int split, std::ostream& out) {
  const SensorDataset ds = load_dataset(dataset_path);
  ModelConfig mc = model_from_config(cfg, ds.feature_dim, ds.field_dim());
  ShredModel model(mc);
  load_checkpoint(model.tape(), checkpoint);

  const std::uint64_t eval_seed = cfg.get_u64("eval.seed");
  NoiseSpec clean;
  NoiseSpec noisy;
  noisy.mode = NoiseMode::noisy;
  noisy.sigma = cfg.get_double("data.noise_sigma");
  NoiseSpec disturbed;
  disturbed.mode = NoiseMode::disturbed;
  disturbed.disturbance_magnitude = cfg.get_double("data.noise_disturbance");

  const EvalResult r_clean = evaluate_split(model, ds, split, clean, eval_seed);
  const EvalResult r_noisy = evaluate_split(model, ds, split, noisy, eval_seed);
  const EvalResult r_dist = evaluate_split(model, ds, split, disturbed, eval_seed);

  std::filesystem::create_directories(out_dir);
  auto csv = open_out(out_dir + "/metrics.csv");
  csv << "split,mode,rmse_all_steps,rmse_last_step\n";
  const char* split_name = split == 0 ? "train" : split == 1 ? "val" : "test";
  csv << split_name << ",clean," << fmt_g(r_clean.rmse_all) << "," << fmt_g(r_clean.rmse_last)
      << "\n";
  csv << split_name << ",disturbed," << fmt_g(r_dist.rmse_all) << "," << fmt_g(r_dist.rmse_last)
      << "\n";
  csv << split_name << ",noisy," << fmt_g(r_noisy.rmse_all) << "," << fmt_g(r_noisy.rmse_last)
      << "\n";

  // per-grid-point |error| at the disturbed step, one row per point
  auto hist = open_out(out_dir + "/err_histogram.csv");
  hist << "grid_index,ix,iy,mean_abs_error\n";
  for (int j = 0; j < ds.field_dim(); ++j) {
    const int ix = j % ds.params.nx;
    const int iy = j / ds.params.nx;
    hist << j << "," << ix << "," << iy << "," << fmt_g(r_dist.point_abs_err_last[j]) << "\n";
  }
  write_manifest(cfg, out_dir);

  out << "split=" << split_name << " clean_rmse=" << fmt_g(r_clean.rmse_all)
      << " clean_rmse_last=" << fmt_g(r_clean.rmse_last)
      << " disturbed_rmse_last=" << fmt_g(r_dist.rmse_last)
      << " noisy_rmse=" << fmt_g(r_noisy.rmse_all) << "\n";
  return 0;
}

namespace {

ShredModel model_for_reports(const RunConfig& cfg, const std::string& checkpoint) {
  const int output_dim = cfg.get_int("data.nx") * cfg.get_int("data.ny");
  ModelConfig mc = model_from_config(cfg, 3, output_dim);
  ShredModel model(mc);
  load_checkpoint(model.tape(), checkpoint);
  return model;
}

}  // namespace

int cmd_bode(const RunConfig& cfg, const std::string& checkpoint, const std::string& out_dir,
             std::ostream& log) {
  ShredModel model = model_for_reports(cfg, checkpoint);
  const RVector grid = bode_grid(cfg.get_double("bode.lo"), cfg.get_double("bode.hi"),
                                 cfg.get_int("bode.per_decade"));
  std::filesystem::create_directories(out_dir);

  auto bode = open_out(out_dir + "/bode.csv");
  bode << "omega,magnitude_db,phase_deg,layer_index,ssm_index\n";
  auto eig = open_out(out_dir + "/eigenvalues.csv");
  eig << "layer_index,ssm_index,state_index,re,im\n";
  auto h2csv = open_out(out_dir + "/h2.csv");
  h2csv << "layer_index,ssm_index,h2_norm_sq\n";

  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    double layer_h2 = 0.0;
    for (int f = 0; f < layers[l].h; ++f) {
      const DiagonalSSM sys = layers[l].feature_ssm(f);
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const TransferSample s = transfer_eval(sys, grid[i]);
        bode << fmt_g(s.omega) << "," << fmt_g(s.magnitude_db) << "," << fmt_g(s.phase_deg) << ","
             << l << "," << f << "\n";
      }
      for (int j = 0; j < layers[l].n; ++j) {
        eig << l << "," << f << "," << j << "," << fmt_g(sys.a[j].real()) << ","
            << fmt_g(sys.a[j].imag()) << "\n";
      }
      const double h2 = h2_norm(sys).norm_sq;
      layer_h2 += h2;
      h2csv << l << "," << f << "," << fmt_g(h2) << "\n";
    }
    log << "layer " << l << " mean_h2=" << fmt_g(layer_h2 / layers[l].h) << "\n";
  }
  write_manifest(cfg, out_dir);
  return 0;
}

int cmd_h2_report(const RunConfig& cfg, const std::string& checkpoint, const std::string& out_dir,
                  std::ostream& out) {
  ShredModel model = model_for_reports(cfg, checkpoint);
  std::filesystem::create_directories(out_dir);
  auto csv = open_out(out_dir + "/h2_report.csv");
  csv << "layer_index,ssm_index,h2_norm_sq\n";
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    double acc = 0.0;
    for (int f = 0; f < layers[l].h; ++f) {
      const double h2 = h2_norm(layers[l].feature_ssm(f)).norm_sq;
      acc += h2;
      csv << l << "," << f << "," << fmt_g(h2) << "\n";
    }
    out << "layer " << l << " mean_h2=" << fmt_g(acc / layers[l].h)
        << (l == 0 && model.config().robust ? " (bw filtering layer)" : "") << "\n";
  }
  write_manifest(cfg, out_dir);
  return 0;
}

}  // namespace s4
