#pragma once

#include <memory>
#include <string>
#include <vector>

#include "s4/layers.hpp"

namespace s4 {

struct ModelConfig {
  int input_dim = 3;
  int hidden = 64;       // feature copies per layer
  int state_n = 64;      // state size of memorization layers
  int bw_state = 8;      // state size of the filtering layer
  int lin_layers = 2;    // memorization layers
  bool robust = true;    // prepend the BW-initialized filtering layer
  InitKind mem_init = InitKind::s4d_lin;
  int channels = 1;
  Discretization disc = Discretization::zoh;
  int decoder_hidden = 128;
  int output_dim = 1;
  double dt_min = 1e-3;
  double dt_max = 1e-1;
  bool s4dc = false;
  bool s4dc_b_through_c = false;
  double ssm_lr_scale = 0.1;  // ratio of SSM-parameter rate to base rate
  std::uint64_t seed = 1;
};

// rS4D (or plain S4D) recurrent stack between a linear input encoder and the
// shallow decoder, trained position-wise on the evaluated steps.
class ShredModel {
 public:
  explicit ShredModel(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  ParamTape& tape() { return tape_; }
  const ParamTape& tape() const { return tape_; }
  std::vector<S4DLayer>& layers() { return layers_; }
  const std::vector<S4DLayer>& layers() const { return layers_; }

  struct Cache {
    Eigen::Index seq_len = 0;         // real (unpadded) steps
    Eigen::Index padded_len = 0;
    std::vector<Eigen::Index> eval_steps;
    RMatrix padded_input;             // padded_len x input_dim
    RMatrix encoded;                  // padded_len x hidden
    std::vector<S4DLayer::Cache> layer_caches;
    std::vector<RMatrix> layer_outputs;  // padded_len x hidden each
    RMatrix dec_in;                   // eval x hidden
    RMatrix dec_h1, dec_h2;           // post-ReLU activations
    bool valid = false;
  };

  // inputs: seq_len x input_dim (features standardized). eval_count rows are
  // predicted: the last eval_count real steps. Sequences are zero-padded to
  // the next power of two internally.
  RMatrix forward(const RMatrix& inputs, Eigen::Index eval_count, Cache* cache = nullptr) const;

  // dpred has the forward output's shape; parameter gradients accumulate
  // into buf. Throws StateError when the cache was not produced by forward.
  void backward(const Cache& cache, const RMatrix& dpred, GradBuffer& buf) const;

  // Re(a) < 0 for every SSM entry; holds by construction of the
  // reparameterization and is asserted by tests after optimizer steps.
  bool stable() const;

  void s4dc_power_update();

 private:
  ModelConfig cfg_;
  ParamTape tape_;
  Linear encoder_;
  std::vector<S4DLayer> layers_;
  Linear dec1_, dec2_, dec3_;
};

// Mean squared error over the last t_eval rows of each prediction/target
// pair (all batch elements, all output entries).
double loss_last_t(const std::vector<RMatrix>& predictions, const std::vector<RMatrix>& targets,
                   Eigen::Index t_eval);

}  // namespace s4
