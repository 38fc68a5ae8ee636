#pragma once

#include <fstream>
#include <string>

#include "s4/common.hpp"

namespace s4 {

// snprintf-backed formatting so report files are byte-stable across runs.
std::string fmt_g(double v);

std::ofstream open_out(const std::string& path);

}  // namespace s4
