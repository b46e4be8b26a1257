#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace tubebem {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;

/// Raised for invalid run/mesh parameters.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised for degenerate curve data (vanishing tangent, folded map).
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an operator cannot be assembled (e.g. singular diagonal block).
struct assembly_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by the causal solver (singular slab block, shape mismatch).
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar-plus-gradient bundle used when a kernel and its target
/// gradient are integrated in one pass.
struct value_grad {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();

  value_grad& operator+=(const value_grad& o) {
    value += o.value;
    grad += o.grad;
    return *this;
  }
};

inline value_grad operator*(const value_grad& a, double s) {
  return {a.value * s, a.grad * s};
}

}  // namespace tubebem
