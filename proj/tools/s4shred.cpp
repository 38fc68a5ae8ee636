// Command-line harness: dataset generation, kernel equivalence checks,
// SHRED-(r)S4D training/evaluation, and frequency-domain reports.

#include <CLI11.hpp>
#include <iostream>

#include "s4/commands.hpp"

namespace {

s4::RunConfig build_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
  s4::RunConfig cfg;
  if (!config_path.empty()) cfg.load_file(config_path);
  for (const auto& kv : overrides) cfg.parse_override(kv);
  cfg.finalize();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"s4shred: structured state-space sequence models with a shallow decoder"};
  app.footer(s4::RunConfig::help_text());
  app.require_subcommand(1);
  app.fallthrough();  // --config / -D may follow the subcommand

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value config file")->envname("S4_CONFIG");
  app.add_option("-D,--define", overrides, "override a config key (key=value)");

  std::string out_dir = "out";
  std::string data_path;
  std::string checkpoint_path;
  std::string split_name = "test";

  auto* gen = app.add_subcommand("gen-data", "generate a double-gyre sensor dataset");
  gen->add_option("--out", out_dir, "output directory");

  auto* describe = app.add_subcommand("describe", "print a dataset file header");
  describe->add_option("--data", data_path, "dataset file")->required();

  auto* kcheck = app.add_subcommand("kernel-check", "three-path kernel equivalence suite");
  kcheck->add_option("--out", out_dir, "output directory");

  auto* train = app.add_subcommand("train", "train SHRED-S4D / SHRED-rS4D");
  train->add_option("--data", data_path, "dataset file")->required();
  train->add_option("--out", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint (clean/disturbed/noisy)");
  eval->add_option("--data", data_path, "dataset file")->required();
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval->add_option("--split", split_name, "train | val | test");
  eval->add_option("--out", out_dir, "output directory");

  auto* bode = app.add_subcommand("bode", "transfer samples, eigenvalues and H2 norms");
  bode->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  bode->add_option("--out", out_dir, "output directory");

  auto* h2rep = app.add_subcommand("h2-report", "per-SSM and per-layer H2 norms");
  h2rep->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  h2rep->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const s4::RunConfig cfg = build_config(config_path, overrides);
    if (gen->parsed()) return s4::cmd_gen_data(cfg, out_dir, std::cerr);
    if (describe->parsed()) return s4::cmd_describe(data_path, std::cout);
    if (kcheck->parsed()) return s4::cmd_kernel_check(cfg, out_dir, std::cout);
    if (train->parsed()) return s4::cmd_train(cfg, data_path, out_dir, std::cerr);
    if (eval->parsed()) {
      int split = 2;
      if (split_name == "train") {
        split = 0;
      } else if (split_name == "val") {
        split = 1;
      } else if (split_name == "test") {
        split = 2;
      } else {
        throw s4::ConfigError("--split must be train, val or test");
      }
      return s4::cmd_eval(cfg, data_path, checkpoint_path, out_dir, split, std::cout);
    }
    if (bode->parsed()) return s4::cmd_bode(cfg, checkpoint_path, out_dir, std::cerr);
    if (h2rep->parsed()) return s4::cmd_h2_report(cfg, checkpoint_path, out_dir, std::cout);
  } catch (const s4::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const s4::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
