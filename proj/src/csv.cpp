#include "s4/csv.hpp"

#include <cstdio>
#include <filesystem>

namespace s4 {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

}  // namespace s4
