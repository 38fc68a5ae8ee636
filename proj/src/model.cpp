#include "s4/model.hpp"

#include <cmath>

namespace s4 {

namespace {

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

ShredModel::ShredModel(const ModelConfig& cfg) : cfg_(cfg) {
  Rng rng(cfg.seed);
  Rng enc_rng = rng.fork(1);
  encoder_.init(tape_, "encoder", cfg.input_dim, cfg.hidden, enc_rng);

  const int total_layers = cfg.lin_layers + (cfg.robust ? 1 : 0);
  layers_.resize(total_layers);
  for (int l = 0; l < total_layers; ++l) {
    const bool is_bw = cfg.robust && l == 0;
    S4DLayer& layer = layers_[l];
    layer.disc = cfg.disc;
    layer.s4dc = cfg.s4dc && !is_bw;  // the filtering layer keeps plain c
    layer.s4dc_b_through_c = cfg.s4dc_b_through_c;
    Rng layer_rng = rng.fork(100 + l);
    layer.build(tape_, "layer" + std::to_string(l), cfg.hidden,
                is_bw ? cfg.bw_state : cfg.state_n, cfg.channels,
                is_bw ? InitKind::s4d_bw : cfg.mem_init, cfg.dt_min, cfg.dt_max, layer_rng,
                cfg.ssm_lr_scale);
  }

  Rng dec_rng = rng.fork(2);
  dec1_.init(tape_, "decoder.fc1", cfg.hidden, cfg.decoder_hidden, dec_rng);
  dec2_.init(tape_, "decoder.fc2", cfg.decoder_hidden, cfg.decoder_hidden, dec_rng);
  dec3_.init(tape_, "decoder.fc3", cfg.decoder_hidden, cfg.output_dim, dec_rng);
}

RMatrix ShredModel::forward(const RMatrix& inputs, Eigen::Index eval_count, Cache* cache) const {
  const Eigen::Index seq_len = inputs.rows();
  if (inputs.cols() != cfg_.input_dim) throw SizeError("forward: input feature dim mismatch");
  if (eval_count < 1 || eval_count > seq_len) throw SizeError("forward: bad eval_count");
  const Eigen::Index padded = next_pow2(seq_len);

  Cache local;
  Cache& c = cache ? *cache : local;
  c.seq_len = seq_len;
  c.padded_len = padded;
  c.eval_steps.resize(eval_count);
  for (Eigen::Index i = 0; i < eval_count; ++i) c.eval_steps[i] = seq_len - eval_count + i;

  c.padded_input = RMatrix::Zero(padded, cfg_.input_dim);
  c.padded_input.topRows(seq_len) = inputs;
  c.encoded = encoder_.forward(c.padded_input);

  c.layer_caches.resize(layers_.size());
  c.layer_outputs.resize(layers_.size());
  const RMatrix* cur = &c.encoded;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    c.layer_outputs[l] = layers_[l].forward(*cur, c.layer_caches[l]);
    cur = &c.layer_outputs[l];
  }

  c.dec_in.resize(eval_count, cfg_.hidden);
  for (Eigen::Index i = 0; i < eval_count; ++i) c.dec_in.row(i) = cur->row(c.eval_steps[i]);

  c.dec_h1 = dec1_.forward(c.dec_in).cwiseMax(0.0);
  c.dec_h2 = dec2_.forward(c.dec_h1).cwiseMax(0.0);
  RMatrix pred = dec3_.forward(c.dec_h2);
  c.valid = true;
  return pred;
}

void ShredModel::backward(const Cache& c, const RMatrix& dpred, GradBuffer& buf) const {
  if (!c.valid) throw StateError("backward: no recorded forward pass");
  RMatrix g2 = dec3_.backward(c.dec_h2, dpred, buf);
  g2 = g2.cwiseProduct((c.dec_h2.array() > 0.0).cast<double>().matrix());
  RMatrix g1 = dec2_.backward(c.dec_h1, g2, buf);
  g1 = g1.cwiseProduct((c.dec_h1.array() > 0.0).cast<double>().matrix());
  RMatrix g0 = dec1_.backward(c.dec_in, g1, buf);

  RMatrix gseq = RMatrix::Zero(c.padded_len, cfg_.hidden);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(c.eval_steps.size()); ++i) {
    gseq.row(c.eval_steps[i]) = g0.row(i);
  }
  for (std::size_t l = layers_.size(); l-- > 0;) {
    gseq = layers_[l].backward(c.layer_caches[l], gseq, buf);
  }
  encoder_.backward(c.padded_input, gseq, buf);
}

bool ShredModel::stable() const {
  for (const auto& layer : layers_) {
    for (int f = 0; f < layer.h; ++f) {
      const CVector a = layer.pole(f);
      for (int j = 0; j < layer.n; ++j) {
        if (!(a[j].real() < 0.0)) return false;
      }
    }
  }
  return true;
}

void ShredModel::s4dc_power_update() {
  for (auto& layer : layers_) {
    if (layer.s4dc) layer.s4dc_power_update();
  }
}

double loss_last_t(const std::vector<RMatrix>& predictions, const std::vector<RMatrix>& targets,
                   Eigen::Index t_eval) {
  if (t_eval < 1) throw SizeError("loss_last_t: t_eval must be >= 1");
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw SizeError("loss_last_t: batch mismatch");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    const RMatrix& p = predictions[s];
    const RMatrix& t = targets[s];
    if (p.rows() != t.rows() || p.cols() != t.cols()) throw SizeError("loss_last_t: shape mismatch");
    if (t_eval > p.rows()) throw SizeError("loss_last_t: t_eval exceeds sequence length");
    const auto dp = (p.bottomRows(t_eval) - t.bottomRows(t_eval)).eval();
    acc += dp.squaredNorm();
    count += static_cast<std::size_t>(dp.size());
  }
  return acc / static_cast<double>(count);
}

}  // namespace s4
