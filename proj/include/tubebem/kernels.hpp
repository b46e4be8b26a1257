#pragma once

#include <cmath>
#include <optional>

#include "tubebem/common.hpp"
#include "tubebem/geometry.hpp"

namespace tubebem {

/// A kernel argument: a space-time point with optional surface data
/// (normal and normal velocity) for traced kernels.
struct KernelPoint {
  double t = 0.0;
  Vec2 x = Vec2::Zero();
  std::optional<Vec2> n;
  std::optional<double> vn;

  static KernelPoint from(const BoundarySample& s) {
    return {s.t, s.x, s.n, s.vn};
  }
};

/// Heat kernel G(dt, r2) = (4*pi*dt)^(-d/2) * exp(-r2/(4*dt)) for dt > 0,
/// and exactly 0 for dt <= 0. Exponents below -700 short-circuit to 0.
inline double heat_kernel(double dt, double r2, int d = 2) {
  if (dt <= 0.0) return 0.0;
  const double expo = -r2 / (4.0 * dt);
  if (expo < -700.0) return 0.0;
  double amp;
  switch (d) {
    case 1: amp = 1.0 / std::sqrt(4.0 * pi * dt); break;
    case 2: amp = 1.0 / (4.0 * pi * dt); break;
    case 3: amp = std::pow(4.0 * pi * dt, -1.5); break;
    default: amp = std::pow(4.0 * pi * dt, -0.5 * d); break;
  }
  return amp * std::exp(expo);
}

/// Gradient of G with respect to the target position,
/// grad_x G = -(x - y) / (2*(t - tau)) * G; zero in the acausal branch.
inline Vec2 grad_x_heat_kernel(const KernelPoint& target,
                               const KernelPoint& source) {
  const double dt = target.t - source.t;
  if (dt <= 0.0) return Vec2::Zero();
  const Vec2 r = target.x - source.x;
  const double g = heat_kernel(dt, r.squaredNorm(), 2);
  return (-0.5 / dt) * r * g;
}

/// Interior velocity-corrected conormal: <grad, n> + (1/2)*vn*value.
inline double neumann_minus(double value, const Vec2& gradient,
                            const BoundarySample& s) {
  return gradient.dot(s.n) + 0.5 * s.vn * value;
}

/// Adjoint-equation conormal: <grad, n> - (1/2)*vn*value.
inline double neumann_plus(double value, const Vec2& gradient,
                           const BoundarySample& s) {
  return gradient.dot(s.n) - 0.5 * s.vn * value;
}

// -- Traced kernels on the lateral boundary ---------------------------------
//
// All four vanish identically for target.t <= source.t. The velocity terms
// are the surface corrections of the moving boundary; they drop out when
// the geometry is stationary.

/// Kernel of V: G itself.
inline double single_layer_kernel(const BoundarySample& target,
                                  const BoundarySample& source) {
  return heat_kernel(target.t - source.t,
                     (target.x - source.x).squaredNorm(), 2);
}

/// Kernel of K: the plus-trace in the source variables,
/// [ <x-y, n_y> / (2*dt) - vn_y/2 ] * G.
inline double double_layer_kernel(const BoundarySample& target,
                                  const BoundarySample& source) {
  const double dt = target.t - source.t;
  if (dt <= 0.0) return 0.0;
  const Vec2 r = target.x - source.x;
  const double g = heat_kernel(dt, r.squaredNorm(), 2);
  return (r.dot(source.n) / (2.0 * dt) - 0.5 * source.vn) * g;
}

/// Kernel of K': the minus-trace in the target variables,
/// [ -<x-y, n_x> / (2*dt) + vn_x/2 ] * G.
inline double adjoint_double_layer_kernel(const BoundarySample& target,
                                          const BoundarySample& source) {
  const double dt = target.t - source.t;
  if (dt <= 0.0) return 0.0;
  const Vec2 r = target.x - source.x;
  const double g = heat_kernel(dt, r.squaredNorm(), 2);
  return (-r.dot(target.n) / (2.0 * dt) + 0.5 * target.vn) * g;
}

// -- Off-boundary evaluation forms -------------------------------------------
//
// Value (and optionally target gradient) of the potentials' kernels at an
// arbitrary field point; used by potential evaluation and offset traces.

inline double single_layer_value(double t, const Vec2& x,
                                 const BoundarySample& src) {
  return heat_kernel(t - src.t, (x - src.x).squaredNorm(), 2);
}

inline value_grad single_layer_value_grad(double t, const Vec2& x,
                                          const BoundarySample& src) {
  const double dt = t - src.t;
  if (dt <= 0.0) return {};
  const Vec2 r = x - src.x;
  const double g = heat_kernel(dt, r.squaredNorm(), 2);
  return {g, (-0.5 / dt) * r * g};
}

inline double double_layer_value(double t, const Vec2& x,
                                 const BoundarySample& src) {
  const double dt = t - src.t;
  if (dt <= 0.0) return 0.0;
  const Vec2 r = x - src.x;
  const double g = heat_kernel(dt, r.squaredNorm(), 2);
  return (r.dot(src.n) / (2.0 * dt) - 0.5 * src.vn) * g;
}

inline value_grad double_layer_value_grad(double t, const Vec2& x,
                                          const BoundarySample& src) {
  const double dt = t - src.t;
  if (dt <= 0.0) return {};
  const Vec2 r = x - src.x;
  const double g = heat_kernel(dt, r.squaredNorm(), 2);
  const double val = (r.dot(src.n) / (2.0 * dt) - 0.5 * src.vn) * g;
  const Vec2 grad = (0.5 / dt) * g * src.n - (0.5 / dt) * val * r;
  return {val, grad};
}

}  // namespace tubebem
