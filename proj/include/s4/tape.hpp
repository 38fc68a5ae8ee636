#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "s4/common.hpp"

namespace s4 {

// Named parameter store with mirrored gradients and optimizer moments.
// Complex model parameters are registered as separate _re/_im entries so the
// whole tape is real-valued. Entries are stable once added (deque storage);
// layers keep indices into it.
class ParamTape {
 public:
  struct Entry {
    std::string name;
    std::vector<std::uint32_t> dims;
    RVector value;
    RVector grad;
    RVector m;  // adam first moment
    RVector v;  // adam second moment
    double lr_scale = 1.0;
    bool trainable = true;
  };

  int add(const std::string& name, RVector init, std::vector<std::uint32_t> dims = {},
          double lr_scale = 1.0, bool trainable = true);

  Entry& entry(int idx) { return entries_[idx]; }
  const Entry& entry(int idx) const { return entries_[idx]; }
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  Eigen::Index count() const { return static_cast<Eigen::Index>(entries_.size()); }
  std::size_t total_params() const;

  void zero_grad();
  long step() const { return step_; }

  // Bias-corrected adaptive-moment update over all trainable entries;
  // per-entry lr_scale multiplies the base rate.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // One line per entry, used by the NaN-loss diagnostic dump.
  std::string norms_report() const;

 private:
  std::deque<Entry> entries_;
  std::map<std::string, int> index_;
  long step_ = 0;
};

// Per-sample gradient arena mirroring a tape's entry shapes. Batch gradients
// are reduced sample-by-sample in index order, which keeps training bitwise
// reproducible for any worker count.
struct GradBuffer {
  explicit GradBuffer(const ParamTape& tape);
  void reset();
  std::vector<RVector> g;
};

void accumulate(ParamTape& tape, const GradBuffer& buf);

// Checkpoint container: magic "S4CK", version u32, then per entry
// name-length u32, name bytes, rank u32, dims u32s, float64 payload.
// Little-endian throughout.
void save_checkpoint(const ParamTape& tape, const std::string& path);

// Shapes and names must match the tape built from the model config.
void load_checkpoint(ParamTape& tape, const std::string& path);

}  // namespace s4
