#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "s4/common.hpp"

namespace s4 {

// Flat key=value configuration. '#' starts a comment; unknown keys are
// rejected with the offending key named. Precedence: defaults < preset <
// config file < command-line overrides.
class RunConfig {
 public:
  struct KeySpec {
    std::string key;
    std::string def;
    std::string help;
  };

  static const std::vector<KeySpec>& registry();

  RunConfig();

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);  // explicit set
  void parse_override(const std::string& kv);                  // "key=value"

  // Applies the data.preset defaults to keys the user did not set explicitly.
  void finalize();

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  // Registry order, one key=value per line, suitable both as manifest and as
  // a reusable config file.
  std::string resolved_text() const;

  static std::string help_text();

 private:
  void set_soft(const std::string& key, const std::string& value);  // keeps explicit values
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

void write_manifest(const RunConfig& cfg, const std::string& dir);

}  // namespace s4
