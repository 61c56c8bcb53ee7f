#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when eigenvalues needed for identifiability are tied or non-positive.
class IdentifiabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by dataset readers; carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Non-finite or exploding iterate.
class TrainingFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Curvature probe requested at a point that is not stationary.
class NotStationaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lae
