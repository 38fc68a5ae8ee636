#include "s4/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "s4/parallel.hpp"

namespace s4 {

namespace {

int resolve_t_eval(const SensorDataset& ds, int requested) {
  if (requested <= 0) return ds.t_eval;
  if (requested > ds.t_eval) {
    throw SizeError("t_eval exceeds the dataset's evaluated-step count");
  }
  return requested;
}

RMatrix targets_tail(const SensorSample& s, int t_eval) {
  return s.targets.bottomRows(t_eval).cast<double>();
}

}  // namespace

TrainResult train_model(ShredModel& model, const SensorDataset& ds, const TrainOptions& opts,
                        std::ostream* progress) {
  const int t_eval = resolve_t_eval(ds, opts.t_eval);

  std::vector<int> order(ds.n_train);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = Rng(opts.seed).fork(0xbeef);

  TrainResult result;
  result.baseline_val_rmse = baseline_rmse(ds, 1, t_eval);

  const int batch = std::max(1, std::min(opts.batch, ds.n_train));
  std::vector<GradBuffer> sample_grads;
  std::vector<ShredModel::Cache> caches(batch);
  for (int i = 0; i < batch; ++i) sample_grads.emplace_back(model.tape());
  std::vector<double> sample_loss(batch);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Fisher-Yates on the run's stream; deterministic given the seed
    for (int i = ds.n_train - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_loss_acc = 0.0;
    long batches = 0;
    for (int start = 0; start < ds.n_train; start += batch) {
      const int count = std::min(batch, ds.n_train - start);
      model.tape().zero_grad();
      parallel_for(count, [&](int k) {
        sample_grads[k].reset();
        const SensorSample& s = ds.samples[order[start + k]];
        RMatrix pred = model.forward(s.inputs, t_eval, &caches[k]);
        const RMatrix tgt = targets_tail(s, t_eval);
        RMatrix diff = pred - tgt;
        sample_loss[k] = diff.squaredNorm() / static_cast<double>(diff.size());
        // d(mean over batch of per-sample MSE)/dpred
        RMatrix dpred = diff * (2.0 / (static_cast<double>(diff.size()) * count));
        model.backward(caches[k], dpred, sample_grads[k]);
      });
      double batch_loss = 0.0;
      for (int k = 0; k < count; ++k) {
        batch_loss += sample_loss[k] / count;
        accumulate(model.tape(), sample_grads[k]);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("training diverged (non-finite loss); parameter norms:\n" +
                             model.tape().norms_report());
      }
      model.tape().adam_step(opts.lr);
      if (model.config().s4dc) model.s4dc_power_update();
      epoch_loss_acc += batch_loss;
      ++batches;
    }
    EpochStat stat;
    stat.train_mse = epoch_loss_acc / static_cast<double>(batches);
    NoiseSpec clean;
    stat.val_rmse = evaluate_split(model, ds, 1, clean, 0, t_eval).rmse_all;
    result.epochs.push_back(stat);
    if (progress) {
      (*progress) << "epoch " << epoch + 1 << "/" << opts.epochs << " train_mse=" << stat.train_mse
                  << " val_rmse=" << stat.val_rmse << "\n";
    }
  }

  NoiseSpec clean;
  result.final_train_rmse = evaluate_split(model, ds, 0, clean, 0, t_eval).rmse_all;
  result.final_val_rmse = result.epochs.empty() ? 0.0 : result.epochs.back().val_rmse;
  return result;
}

EvalResult evaluate_split(const ShredModel& model, const SensorDataset& ds, int split,
                          const NoiseSpec& noise, std::uint64_t eval_seed, int t_eval) {
  const int te = resolve_t_eval(ds, t_eval);
  const int offset = ds.split_offset(split);
  const int count = ds.split_count(split);
  const int field = ds.field_dim();

  std::vector<double> sq_all(count), sq_last(count);
  RMatrix abs_err(field, count);
  const Rng base(eval_seed);
  parallel_for(count, [&](int k) {
    const SensorSample& s = ds.samples[offset + k];
    RMatrix inputs = s.inputs;
    Rng rng = base.fork(0x7000 + static_cast<std::uint64_t>(offset + k));
    inject_noise(inputs, noise, rng);
    const RMatrix pred = model.forward(inputs, te);
    const RMatrix tgt = targets_tail(s, te);
    const RMatrix diff = pred - tgt;
    sq_all[k] = diff.squaredNorm() / static_cast<double>(diff.size());
    sq_last[k] = diff.bottomRows(1).squaredNorm() / static_cast<double>(field);
    abs_err.col(k) = diff.bottomRows(1).cwiseAbs().transpose();
  });

  EvalResult res;
  double acc_all = 0.0, acc_last = 0.0;
  for (int k = 0; k < count; ++k) {
    acc_all += sq_all[k];
    acc_last += sq_last[k];
  }
  res.rmse_all = std::sqrt(acc_all / count);
  res.rmse_last = std::sqrt(acc_last / count);
  res.point_abs_err_last = abs_err.rowwise().mean();
  return res;
}

double baseline_rmse(const SensorDataset& ds, int split, int t_eval) {
  const int te = resolve_t_eval(ds, t_eval);
  const int field = ds.field_dim();
  RVector mean = RVector::Zero(field);
  long count = 0;
  for (int i = 0; i < ds.n_train; ++i) {
    const RMatrix t = targets_tail(ds.samples[i], te);
    mean += t.colwise().sum().transpose();
    count += t.rows();
  }
  mean /= static_cast<double>(count);

  const int offset = ds.split_offset(split);
  const int n = ds.split_count(split);
  double acc = 0.0;
  long terms = 0;
  for (int k = 0; k < n; ++k) {
    const RMatrix t = targets_tail(ds.samples[offset + k], te);
    acc += (t.rowwise() - mean.transpose()).squaredNorm();
    terms += t.size();
  }
  return std::sqrt(acc / static_cast<double>(terms));
}

}  // namespace s4
