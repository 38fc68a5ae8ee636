#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace s4 {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using FMatrix = Eigen::MatrixXf;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SizeError : Error {
  using Error::Error;
};
struct SingularityError : Error {
  using Error::Error;
};
struct DegeneracyError : Error {
  using Error::Error;
};
struct SymmetryError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct StabilityError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};
struct DivisionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace s4
