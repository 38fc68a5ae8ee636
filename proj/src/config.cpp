#include "s4/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace s4 {

const std::vector<RunConfig::KeySpec>& RunConfig::registry() {
  static const std::vector<KeySpec> keys = {
      {"data.preset", "desk", "desk (51x26 grid, T=2, 256/64/64) or paper (201x101, T=4, 2048/512/512)"},
      {"data.nx", "", "grid points in x (preset default when empty)"},
      {"data.ny", "", "grid points in y"},
      {"data.horizon", "", "trajectory horizon T"},
      {"data.dt", "0.005", "sampling step along the trajectory"},
      {"data.train", "", "training sample count"},
      {"data.val", "", "validation sample count"},
      {"data.test", "", "test sample count"},
      {"data.seed", "1", "dataset generation seed"},
      {"data.noise", "clean", "baked noise mode: clean | noisy | disturbed"},
      {"data.noise_sigma", "0.1", "noisy-mode std, standardized units"},
      {"data.noise_disturbance", "5.0", "disturbed-mode offset, standardized units"},
      {"model.kind", "rs4d", "rs4d (BW filtering layer first) or s4d"},
      {"model.hidden", "64", "feature copies per layer (H)"},
      {"model.state", "64", "state size of memorization layers (N)"},
      {"model.bw_state", "8", "state size of the BW filtering layer"},
      {"model.layers", "2", "memorization layer count"},
      {"model.channels", "1", "SSM output channels (C)"},
      {"model.init", "lin", "memorization init: lin | inv | legs"},
      {"model.decoder_hidden", "128", "decoder hidden width"},
      {"model.dt_min", "0.001", "log-uniform step-size range, lower"},
      {"model.dt_max", "0.1", "log-uniform step-size range, upper"},
      {"model.disc", "zoh", "layer discretization: zoh | bilinear"},
      {"model.s4dc", "0", "power-iterated X coupling (1 enables)"},
      {"model.s4dc_b_through_c", "0", "let b receive gradient through c = x/b"},
      {"model.seed", "1", "parameter initialization seed"},
      {"train.epochs", "20", "training epochs"},
      {"train.batch", "16", "batch size"},
      {"train.lr", "0.001", "base learning rate (encoder/mixing/decoder)"},
      {"train.lr_ssm", "0.0001", "learning rate for SSM parameters"},
      {"train.seed", "1", "shuffle seed"},
      {"train.t_eval", "0", "evaluated steps for the loss (0 = dataset value)"},
      {"eval.seed", "7", "noise-injection seed for eval variants"},
      {"bode.lo", "0.01", "bode grid lower frequency"},
      {"bode.hi", "10000", "bode grid upper frequency"},
      {"bode.per_decade", "200", "bode grid points per decade"},
      {"meta.version", "", "written by commands; informational"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : registry()) values_[k.key] = k.def;
  values_["meta.version"] = kVersion;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) throw ConfigError("unknown config key: " + key);
  values_[key] = value;
  explicit_.insert(key);
}

void RunConfig::set_soft(const std::string& key, const std::string& value) {
  if (explicit_.count(key)) return;
  values_.at(key) = value;
}

void RunConfig::parse_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("override is not key=value: " + kv);
  set(kv.substr(0, eq), kv.substr(eq + 1));
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto kend = key.find_last_not_of(" \t");
    key = key.substr(0, kend + 1);
    const auto vbegin = value.find_first_not_of(" \t");
    value = vbegin == std::string::npos ? "" : value.substr(vbegin);
    set(key, value);
  }
}

void RunConfig::finalize() {
  const std::string preset = get("data.preset");
  if (preset == "desk") {
    set_soft("data.nx", "51");
    set_soft("data.ny", "26");
    set_soft("data.horizon", "2");
    set_soft("data.train", "256");
    set_soft("data.val", "64");
    set_soft("data.test", "64");
  } else if (preset == "paper") {
    set_soft("data.nx", "201");
    set_soft("data.ny", "101");
    set_soft("data.horizon", "4");
    set_soft("data.train", "2048");
    set_soft("data.val", "512");
    set_soft("data.test", "512");
  } else {
    throw ConfigError("data.preset must be desk or paper, got: " + preset);
  }
  values_["meta.version"] = kVersion;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  try {
    return std::stoi(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an integer: " + get(key));
  }
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + get(key));
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + v);
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an unsigned integer: " + get(key));
  }
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  out << "# resolved configuration\n";
  for (const auto& k : registry()) {
    out << k.key << "=" << values_.at(k.key) << "\n";
  }
  return out.str();
}

std::string RunConfig::help_text() {
  std::ostringstream out;
  out << "config keys (key=value in the config file or -D overrides):\n";
  for (const auto& k : registry()) {
    out << "  " << k.key;
    if (!k.def.empty()) out << " [" << k.def << "]";
    out << "  " << k.help << "\n";
  }
  return out.str();
}

void write_manifest(const RunConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/manifest.txt";
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest: " + path);
  f << cfg.resolved_text();
  if (!f) throw IoError("manifest write failed: " + path);
}

}  // namespace s4
