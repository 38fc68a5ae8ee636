#pragma once

#include <iosfwd>
#include <vector>

#include "s4/gyre.hpp"
#include "s4/model.hpp"

namespace s4 {

struct TrainOptions {
  int epochs = 20;
  int batch = 16;
  double lr = 1e-3;      // decoder / mixing / encoder
  double lr_ssm = 1e-4;  // structured SSM parameters
  std::uint64_t seed = 1;
  int t_eval = 0;  // 0 = dataset's evaluated-step count
};

struct EpochStat {
  double train_mse = 0.0;
  double val_rmse = 0.0;
};

struct TrainResult {
  std::vector<EpochStat> epochs;
  double final_train_rmse = 0.0;
  double final_val_rmse = 0.0;
  double baseline_val_rmse = 0.0;  // constant per-point train-mean predictor
};

TrainResult train_model(ShredModel& model, const SensorDataset& ds, const TrainOptions& opts,
                        std::ostream* progress = nullptr);

struct EvalResult {
  double rmse_all = 0.0;          // over all evaluated steps
  double rmse_last = 0.0;         // final step only
  RVector point_abs_err_last;     // mean |error| per grid point at the final step
};

// Evaluates one split under a noise variant injected on top of the stored
// measurements (rng stream forked per sample from eval_seed).
EvalResult evaluate_split(const ShredModel& model, const SensorDataset& ds, int split,
                          const NoiseSpec& noise, std::uint64_t eval_seed, int t_eval = 0);

// RMSE on a split of the predictor that always outputs the per-grid-point
// mean of the train targets.
double baseline_rmse(const SensorDataset& ds, int split, int t_eval = 0);

}  // namespace s4
