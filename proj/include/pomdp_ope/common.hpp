#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pomdp_ope {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Invalid model/policy/config combination (dimension mismatches etc.).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Bad argument to an operation (out-of-range index, empty class, T < 1, ...).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (solver residual too large, non-finite result).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed the configured capacity.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed file content.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Importance ratio requested where pi_e > 0 but pi_b = 0.
struct OverlapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No data supports a requested conditioning event.
struct SupportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An estimate collapsed (e.g. all-zero vector before normalization).
struct DegenerateEstimateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pomdp_ope
