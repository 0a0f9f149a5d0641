#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown on violated preconditions and malformed configuration.
class invalid_argument_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when the finite-distance graph does not span all observed nodes.
class disconnected_error : public std::runtime_error {
 public:
  explicit disconnected_error(std::string msg, std::vector<std::vector<int>> comps)
      : std::runtime_error(std::move(msg)), components(std::move(comps)) {}
  std::vector<std::vector<int>> components;
};

/// Thrown when local recursive grouping makes no progress on an active set.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(std::string msg, std::vector<int> active)
      : std::runtime_error(std::move(msg)), active_set(std::move(active)) {}
  std::vector<int> active_set;
};

/// Thrown on unreadable or malformed files; line is 1-based, 0 if not line-specific.
class io_error : public std::runtime_error {
 public:
  explicit io_error(std::string msg, std::size_t line_no = 0)
      : std::runtime_error(std::move(msg)), line(line_no) {}
  std::size_t line;
};

/// Thrown when a moment matrix is numerically rank deficient below the floor.
class rank_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string version_string();

}  // namespace ltm
