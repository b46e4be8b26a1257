#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "tubebem/common.hpp"
#include "tubebem/kernels.hpp"
#include "tubebem/mesh.hpp"
#include "tubebem/operators.hpp"
#include "tubebem/quadrature.hpp"

namespace tubebem {

/// Result of a field evaluation; near_boundary warns that the point is
/// closer to Gamma_t than half a panel width, where the panel rules are
/// no longer trustworthy. The value is still returned unmodified.
struct FieldEval {
  double value = 0.0;
  bool near_boundary = false;
};

struct FieldEvalGrad {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  bool near_boundary = false;
};

namespace detail {

struct NearInfo {
  bool warn = false;
  std::optional<double> theta_hint;
};

inline NearInfo near_info(const SpaceTimeMesh& mesh, double t0, const Vec2& x0,
                          std::optional<double> hint) {
  const double scale = mesh.panel_width() * mesh.geom.radius();
  const double dist = boundary_distance(mesh.geom, t0, x0);
  NearInfo info;
  info.warn = dist < 0.5 * scale;
  if (hint) {
    info.theta_hint = hint;
  } else if (dist < 3.0 * scale) {
    // Star-shaped families: the polar angle about the moving center is a
    // good proxy for the nearest boundary angle.
    const Vec2 rel = x0 - domain_center(mesh.geom, t0);
    info.theta_hint = std::atan2(rel.y(), rel.x());
  }
  return info;
}

template <class T, class F>
T accumulate_potential(const SpaceTimeMesh& mesh, const Eigen::VectorXd& density,
                       double t0, std::optional<double> theta_hint, F&& f,
                       QuadratureIntensity intensity) {
  T acc{};
  for (int i = 0; i < mesh.num_slabs; ++i) {
    if (mesh.slab_begin(i) >= t0) break;
    for (int j = 0; j < mesh.num_panels; ++j) {
      const double c = density[mesh.index(i, j)];
      if (c == 0.0) continue;
      acc += integrate_element<T>(mesh, i, j, t0, theta_hint, f, intensity) * c;
    }
  }
  return acc;
}

}  // namespace detail

/// Single layer potential of a piecewise-constant density, evaluated at
/// the field point (t0, x0).
inline FieldEval eval_single_layer(const SpaceTimeMesh& mesh,
                                   const Eigen::VectorXd& psi, double t0,
                                   const Vec2& x0,
                                   std::optional<double> theta_hint = {},
                                   QuadratureIntensity intensity = {}) {
  const auto info = detail::near_info(mesh, t0, x0, theta_hint);
  const double value = detail::accumulate_potential<double>(
      mesh, psi, t0, info.theta_hint,
      [&](const BoundarySample& src) {
        return single_layer_value(t0, x0, src);
      },
      intensity);
  return {value, info.warn};
}

inline FieldEval eval_double_layer(const SpaceTimeMesh& mesh,
                                   const Eigen::VectorXd& w, double t0,
                                   const Vec2& x0,
                                   std::optional<double> theta_hint = {},
                                   QuadratureIntensity intensity = {}) {
  const auto info = detail::near_info(mesh, t0, x0, theta_hint);
  const double value = detail::accumulate_potential<double>(
      mesh, w, t0, info.theta_hint,
      [&](const BoundarySample& src) {
        return double_layer_value(t0, x0, src);
      },
      intensity);
  return {value, info.warn};
}

inline FieldEvalGrad eval_single_layer_grad(
    const SpaceTimeMesh& mesh, const Eigen::VectorXd& psi, double t0,
    const Vec2& x0, std::optional<double> theta_hint = {},
    QuadratureIntensity intensity = {}) {
  const auto info = detail::near_info(mesh, t0, x0, theta_hint);
  const value_grad vg = detail::accumulate_potential<value_grad>(
      mesh, psi, t0, info.theta_hint,
      [&](const BoundarySample& src) {
        return single_layer_value_grad(t0, x0, src);
      },
      intensity);
  return {vg.value, vg.grad, info.warn};
}

inline FieldEvalGrad eval_double_layer_grad(
    const SpaceTimeMesh& mesh, const Eigen::VectorXd& w, double t0,
    const Vec2& x0, std::optional<double> theta_hint = {},
    QuadratureIntensity intensity = {}) {
  const auto info = detail::near_info(mesh, t0, x0, theta_hint);
  const value_grad vg = detail::accumulate_potential<value_grad>(
      mesh, w, t0, info.theta_hint,
      [&](const BoundarySample& src) {
        return double_layer_value_grad(t0, x0, src);
      },
      intensity);
  return {vg.value, vg.grad, info.warn};
}

/// Representation formula u = V~ psi - K~ w for interior points of the
/// tube. Throws std::domain_error when (t0, x0) is not inside Omega_t0.
inline FieldEval represent_interior(const SpaceTimeMesh& mesh,
                                    const CauchyPair& pair, double t0,
                                    const Vec2& x0) {
  if (classify_point(mesh.geom, t0, x0) != PointLocation::inside)
    throw std::domain_error("represent_interior: point is not interior");
  const FieldEval s = eval_single_layer(mesh, pair.psi, t0, x0);
  const FieldEval d = eval_double_layer(mesh, pair.w, t0, x0);
  return {s.value - d.value, s.near_boundary || d.near_boundary};
}

}  // namespace tubebem
