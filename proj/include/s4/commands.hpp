#pragma once

#include <iosfwd>
#include <string>

#include "s4/config.hpp"
#include "s4/gyre.hpp"
#include "s4/model.hpp"

namespace s4 {

GyreParams gyre_from_config(const RunConfig& cfg);
NoiseSpec noise_from_config(const RunConfig& cfg);
ModelConfig model_from_config(const RunConfig& cfg, int input_dim, int output_dim);

// All commands write a resolved-config manifest next to their outputs and
// return a process exit code: 0 ok, 1 tolerance/assertion failure, 2 config
// error, 3 I/O error (the CLI maps exceptions to 2/3).
int cmd_gen_data(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_describe(const std::string& dataset_path, std::ostream& out);
int cmd_kernel_check(const RunConfig& cfg, const std::string& out_dir, std::ostream& out);
int cmd_train(const RunConfig& cfg, const std::string& dataset_path, const std::string& out_dir,
              std::ostream& log);
int cmd_eval(const RunConfig& cfg, const std::string& dataset_path, const std::string& checkpoint,
             const std::string& out_dir, int split, std::ostream& out);
int cmd_bode(const RunConfig& cfg, const std::string& checkpoint, const std::string& out_dir,
             std::ostream& log);
int cmd_h2_report(const RunConfig& cfg, const std::string& checkpoint, const std::string& out_dir,
                  std::ostream& out);

}  // namespace s4
