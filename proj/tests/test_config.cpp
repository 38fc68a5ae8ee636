#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "s4/commands.hpp"
#include "s4/config.hpp"

using namespace s4;

TEST_CASE("defaults and desk preset") {
  RunConfig cfg;
  cfg.finalize();
  CHECK(cfg.get("data.preset") == "desk");
  CHECK(cfg.get_int("data.nx") == 51);
  CHECK(cfg.get_int("data.ny") == 26);
  CHECK(cfg.get_int("data.train") == 256);
  CHECK(cfg.get_double("data.horizon") == doctest::Approx(2.0));
}

TEST_CASE("paper preset keeps the publication-scale values") {
  RunConfig cfg;
  cfg.set("data.preset", "paper");
  cfg.finalize();
  CHECK(cfg.get_int("data.nx") == 201);
  CHECK(cfg.get_int("data.ny") == 101);
  CHECK(cfg.get_int("data.train") == 2048);
  CHECK(cfg.get_double("data.horizon") == doctest::Approx(4.0));
}

TEST_CASE("explicit keys win over the preset") {
  RunConfig cfg;
  cfg.set("data.train", "32");
  cfg.finalize();
  CHECK(cfg.get_int("data.train") == 32);
  CHECK(cfg.get_int("data.val") == 64);
}

TEST_CASE("unknown keys are rejected by name") {
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(cfg.set("model.hiden", "64"),
                       doctest::Contains("model.hiden"), ConfigError);
  CHECK_THROWS_AS(cfg.parse_override("no_equals_sign"), ConfigError);
}

TEST_CASE("config files parse comments and whitespace") {
  const std::string path = std::filesystem::temp_directory_path() / "s4_cfg_test.cfg";
  {
    std::ofstream f(path);
    f << "# a comment line\n"
      << "model.hidden = 32   # trailing comment\n"
      << "\n"
      << "train.epochs=3\n";
  }
  RunConfig cfg;
  cfg.load_file(path);
  cfg.finalize();
  CHECK(cfg.get_int("model.hidden") == 32);
  CHECK(cfg.get_int("train.epochs") == 3);
  std::filesystem::remove(path);
}

TEST_CASE("bad values raise config errors with the key name") {
  RunConfig cfg;
  cfg.set("train.epochs", "lots");
  cfg.finalize();
  CHECK_THROWS_WITH_AS(cfg.get_int("train.epochs"), doctest::Contains("train.epochs"),
                       ConfigError);
}

TEST_CASE("resolved text is a loadable config file") {
  RunConfig cfg;
  cfg.set("model.hidden", "48");
  cfg.finalize();
  const std::string path = std::filesystem::temp_directory_path() / "s4_cfg_round.cfg";
  {
    std::ofstream f(path);
    f << cfg.resolved_text();
  }
  RunConfig back;
  back.load_file(path);
  back.finalize();
  CHECK(back.get_int("model.hidden") == 48);
  CHECK(back.resolved_text() == cfg.resolved_text());
  std::filesystem::remove(path);
}

TEST_CASE("model builder validates enum-like keys") {
  RunConfig cfg;
  cfg.set("model.kind", "lstm");
  cfg.finalize();
  CHECK_THROWS_AS(model_from_config(cfg, 3, 10), ConfigError);

  RunConfig cfg2;
  cfg2.set("model.disc", "euler");
  cfg2.finalize();
  CHECK_THROWS_AS(model_from_config(cfg2, 3, 10), ConfigError);
}

TEST_CASE("model builder wires the rs4d flag and lr ratio") {
  RunConfig cfg;
  cfg.finalize();
  const ModelConfig mc = model_from_config(cfg, 3, 20);
  CHECK(mc.robust);
  CHECK(mc.hidden == 64);
  CHECK(mc.output_dim == 20);
  CHECK(mc.ssm_lr_scale == doctest::Approx(0.1));

  RunConfig cfg2;
  cfg2.set("model.kind", "s4d");
  cfg2.finalize();
  CHECK_FALSE(model_from_config(cfg2, 3, 20).robust);
}
