#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyscale {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy shared across modules.
struct DimensionUnsupported : std::runtime_error {
  explicit DimensionUnsupported(const std::string& m) : std::runtime_error(m) {}
};
struct DegenerateInput : std::runtime_error {
  explicit DegenerateInput(const std::string& m) : std::runtime_error(m) {}
};
struct NonPositiveCoordinate : std::runtime_error {
  explicit NonPositiveCoordinate(const std::string& m) : std::runtime_error(m) {}
};
struct LPNumericalFailure : std::runtime_error {
  explicit LPNumericalFailure(const std::string& m) : std::runtime_error(m) {}
};
struct PointOutsideBody : std::runtime_error {
  explicit PointOutsideBody(const std::string& m) : std::runtime_error(m) {}
};
struct NonIntegerDyadicLevel : std::runtime_error {
  explicit NonIntegerDyadicLevel(const std::string& m) : std::runtime_error(m) {}
};
struct ChartMissing : std::runtime_error {
  explicit ChartMissing(const std::string& m) : std::runtime_error(m) {}
};
struct EmptyInput : std::runtime_error {
  explicit EmptyInput(const std::string& m) : std::runtime_error(m) {}
};
struct RejectionBudgetExceeded : std::runtime_error {
  explicit RejectionBudgetExceeded(const std::string& m) : std::runtime_error(m) {}
};
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct InsufficientPoints : std::runtime_error {
  explicit InsufficientPoints(const std::string& m) : std::runtime_error(m) {}
};

// Point of the re-scaled picture: spatial coordinate v (in a fixed
// orthonormal basis of the zero-sum hyperplane) and height h.
struct RescaledPoint {
  Vec v;
  double h = 0.0;
};

}  // namespace polyscale
