#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tubebem/common.hpp"

namespace tubebem {

/// Built-in analytic deformation families. The reference curve is the
/// circle of radius R0 (the ellipse family deforms it at t = 0),
/// parameterized by the angle theta in [0, 2*pi).
enum class TubeFamily {
  stationary_circle,
  translating_circle,
  expanding_circle,
  rotating_ellipse,
  radially_perturbed_circle,
};

inline const char* family_name(TubeFamily f) {
  switch (f) {
    case TubeFamily::stationary_circle: return "stationary-circle";
    case TubeFamily::translating_circle: return "translating-circle";
    case TubeFamily::expanding_circle: return "expanding-circle";
    case TubeFamily::rotating_ellipse: return "rotating-ellipse";
    case TubeFamily::radially_perturbed_circle: return "radially-perturbed-circle";
  }
  return "unknown";
}

inline TubeFamily family_from_name(const std::string& name) {
  if (name == "stationary-circle") return TubeFamily::stationary_circle;
  if (name == "translating-circle") return TubeFamily::translating_circle;
  if (name == "expanding-circle") return TubeFamily::expanding_circle;
  if (name == "rotating-ellipse") return TubeFamily::rotating_ellipse;
  if (name == "radially-perturbed-circle")
    return TubeFamily::radially_perturbed_circle;
  throw config_error("unknown geometry family '" + name + "'");
}

/// A moving planar domain Omega_t given as an analytic family of closed
/// curves over the time interval [0, horizon]. Immutable after
/// construction; safe to share across threads.
///
/// Parameters by family (all optional entries default as noted):
///   stationary-circle:          R0
///   translating-circle:         R0, cx, cy          (velocity vector)
///   expanding-circle:           R0, a               (radius R0 + a*t)
///   rotating-ellipse:           R0, a, omega        (axes R0*(1±a))
///   radially-perturbed-circle:  R0, a, k, omega
///                               (radius R0*(1 + a*sin(k*theta)*sin(omega*t)))
struct TubeGeometry {
  TubeFamily kind = TubeFamily::stationary_circle;
  std::map<std::string, double> params;
  double horizon = 1.0;

  double param(const std::string& name, double fallback) const {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
  }

  double radius() const { return param("R0", 1.0); }
};

inline void validate_geometry(const TubeGeometry& g) {
  if (!(g.horizon > 0.0)) throw config_error("geometry horizon must be > 0");
  if (!(g.radius() > 0.0)) throw config_error("geometry R0 must be > 0");
  const double a = g.param("a", 0.0);
  switch (g.kind) {
    case TubeFamily::expanding_circle:
      if (g.radius() + a * g.horizon <= 0.0)
        throw config_error("expanding-circle collapses before the horizon");
      break;
    case TubeFamily::rotating_ellipse:
      if (std::abs(a) >= 1.0)
        throw config_error("rotating-ellipse aspect |a| must be < 1");
      break;
    case TubeFamily::radially_perturbed_circle:
      if (std::abs(a) >= 1.0)
        throw config_error("radial perturbation |a| must be < 1");
      break;
    default:
      break;
  }
}

inline TubeGeometry make_stationary_circle(double r0, double horizon) {
  TubeGeometry g{TubeFamily::stationary_circle, {{"R0", r0}}, horizon};
  validate_geometry(g);
  return g;
}

inline TubeGeometry make_translating_circle(double r0, const Vec2& c,
                                            double horizon) {
  TubeGeometry g{TubeFamily::translating_circle,
                 {{"R0", r0}, {"cx", c.x()}, {"cy", c.y()}},
                 horizon};
  validate_geometry(g);
  return g;
}

inline TubeGeometry make_expanding_circle(double r0, double rate,
                                          double horizon) {
  TubeGeometry g{TubeFamily::expanding_circle, {{"R0", r0}, {"a", rate}},
                 horizon};
  validate_geometry(g);
  return g;
}

inline TubeGeometry make_rotating_ellipse(double r0, double aspect,
                                          double omega, double horizon) {
  TubeGeometry g{TubeFamily::rotating_ellipse,
                 {{"R0", r0}, {"a", aspect}, {"omega", omega}},
                 horizon};
  validate_geometry(g);
  return g;
}

inline TubeGeometry make_radially_perturbed_circle(double r0, double ampl,
                                                   int mode, double omega,
                                                   double horizon) {
  TubeGeometry g{
      TubeFamily::radially_perturbed_circle,
      {{"R0", r0}, {"a", ampl}, {"k", double(mode)}, {"omega", omega}},
      horizon};
  validate_geometry(g);
  return g;
}

/// One space-time boundary node: position, outward normal, line element
/// and normal velocity <V, n> of the moving curve.
struct BoundarySample {
  double t = 0.0;
  double theta = 0.0;
  Vec2 x = Vec2::Zero();
  Vec2 n = Vec2::Zero();
  double jac = 0.0;  // |d x / d theta|
  double vn = 0.0;   // <d kappa / dt, n>
};

/// Position and first derivatives of the boundary curve at (t, theta).
struct CurveJet {
  Vec2 x;
  Vec2 dx_dtheta;
  Vec2 dx_dt;
};

inline CurveJet curve_jet(const TubeGeometry& g, double t, double theta) {
  const double r0 = g.radius();
  const double c = std::cos(theta), s = std::sin(theta);
  switch (g.kind) {
    case TubeFamily::stationary_circle:
      return {{r0 * c, r0 * s}, {-r0 * s, r0 * c}, {0.0, 0.0}};
    case TubeFamily::translating_circle: {
      const Vec2 v{g.param("cx", 0.0), g.param("cy", 0.0)};
      return {Vec2{r0 * c, r0 * s} + t * v, {-r0 * s, r0 * c}, v};
    }
    case TubeFamily::expanding_circle: {
      const double a = g.param("a", 0.0);
      const double r = r0 + a * t;
      return {{r * c, r * s}, {-r * s, r * c}, {a * c, a * s}};
    }
    case TubeFamily::rotating_ellipse: {
      const double a = g.param("a", 0.0);
      const double omega = g.param("omega", 1.0);
      const double ax = r0 * (1.0 + a), ay = r0 * (1.0 - a);
      const double cw = std::cos(omega * t), sw = std::sin(omega * t);
      const Vec2 p{ax * c, ay * s};
      const Vec2 dp{-ax * s, ay * c};
      const Vec2 x{cw * p.x() - sw * p.y(), sw * p.x() + cw * p.y()};
      const Vec2 dxdth{cw * dp.x() - sw * dp.y(), sw * dp.x() + cw * dp.y()};
      const Vec2 dxdt{omega * (-sw * p.x() - cw * p.y()),
                      omega * (cw * p.x() - sw * p.y())};
      return {x, dxdth, dxdt};
    }
    case TubeFamily::radially_perturbed_circle: {
      const double a = g.param("a", 0.0);
      const double k = g.param("k", 3.0);
      const double omega = g.param("omega", 1.0);
      const double sk = std::sin(k * theta), ck = std::cos(k * theta);
      const double st = std::sin(omega * t), ct = std::cos(omega * t);
      const double r = r0 * (1.0 + a * sk * st);
      const double dr_dth = r0 * a * k * ck * st;
      const double dr_dt = r0 * a * omega * sk * ct;
      return {{r * c, r * s},
              {dr_dth * c - r * s, dr_dth * s + r * c},
              {dr_dt * c, dr_dt * s}};
    }
  }
  throw geometry_error("curve_jet: unhandled family");
}

/// kappa(t, xhat(theta)) on the boundary. Throws std::domain_error for t
/// outside [0, horizon].
inline Vec2 boundary_point(const TubeGeometry& g, double t, double theta) {
  if (t < 0.0 || t > g.horizon)
    throw std::domain_error("boundary_point: t outside [0, horizon]");
  return curve_jet(g, t, theta).x;
}

/// Full sample with outward normal, line element and normal velocity.
/// The velocity is the analytic d kappa/dt at the reference point, so no
/// inversion of kappa is ever performed.
inline BoundarySample boundary_sample(const TubeGeometry& g, double t,
                                      double theta) {
  if (t < 0.0 || t > g.horizon)
    throw std::domain_error("boundary_sample: t outside [0, horizon]");
  const CurveJet jet = curve_jet(g, t, theta);
  const double jac = jet.dx_dtheta.norm();
  if (jac < 1e-12)
    throw geometry_error("boundary_sample: degenerate tangent at theta=" +
                         std::to_string(theta));
  // Counterclockwise parameterization: outward normal = rotate tangent by -90.
  const Vec2 n{jet.dx_dtheta.y() / jac, -jet.dx_dtheta.x() / jac};
  BoundarySample s;
  s.t = t;
  s.theta = theta;
  s.x = jet.x;
  s.n = n;
  s.jac = jac;
  s.vn = jet.dx_dt.dot(n);
  return s;
}

/// Unit space-time normal (nu_t, n_x, n_y) with time component
/// v_nu = -<V, n>, normalized by sqrt(1 + v_nu^2).
inline Vec3 space_time_normal(const BoundarySample& s) {
  const double v_nu = -s.vn;
  const double scale = 1.0 / std::sqrt(1.0 + v_nu * v_nu);
  return {scale * v_nu, scale * s.n.x(), scale * s.n.y()};
}

enum class PointLocation { inside, outside, near_boundary };

namespace detail {

inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double lambda = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  lambda = std::clamp(lambda, 0.0, 1.0);
  return (p - (a + lambda * ab)).norm();
}

}  // namespace detail

/// Distance from x to a fine polygonal approximation of Gamma_t.
inline double boundary_distance(const TubeGeometry& g, double t, const Vec2& x,
                                int segments = 4096) {
  double best = std::numeric_limits<double>::max();
  Vec2 prev = curve_jet(g, t, 0.0).x;
  const Vec2 first = prev;
  for (int i = 1; i <= segments; ++i) {
    const Vec2 cur = i == segments
                         ? first
                         : curve_jet(g, t, 2.0 * pi * i / segments).x;
    best = std::min(best, detail::segment_distance(x, prev, cur));
    prev = cur;
  }
  return best;
}

/// Winding-number classification against a 4096-segment polygon with a
/// near band of 1e-3 * R0 around the curve.
inline PointLocation classify_point(const TubeGeometry& g, double t,
                                    const Vec2& x) {
  if (t < 0.0 || t > g.horizon)
    throw std::domain_error("classify_point: t outside [0, horizon]");
  constexpr int segments = 4096;
  const double band = 1e-3 * g.radius();
  if (boundary_distance(g, t, x, segments) < band)
    return PointLocation::near_boundary;
  // Crossing-number parity along the ray x + s*(1,0), s > 0.
  int crossings = 0;
  Vec2 prev = curve_jet(g, t, 0.0).x;
  const Vec2 first = prev;
  for (int i = 1; i <= segments; ++i) {
    const Vec2 cur = i == segments
                         ? first
                         : curve_jet(g, t, 2.0 * pi * i / segments).x;
    const bool up = (prev.y() <= x.y()) && (cur.y() > x.y());
    const bool down = (prev.y() > x.y()) && (cur.y() <= x.y());
    if (up || down) {
      const double s =
          prev.x() + (x.y() - prev.y()) / (cur.y() - prev.y()) *
                         (cur.x() - prev.x());
      if (s > x.x()) ++crossings;
    }
    prev = cur;
  }
  return (crossings % 2 == 1) ? PointLocation::inside : PointLocation::outside;
}

/// Star-shape center of Omega_t, used by the volume quadrature.
inline Vec2 domain_center(const TubeGeometry& g, double t) {
  if (g.kind == TubeFamily::translating_circle)
    return t * Vec2{g.param("cx", 0.0), g.param("cy", 0.0)};
  return Vec2::Zero();
}

/// Checks the uniformity bound on first and second derivatives of the
/// deformation over a sample grid, together with positivity of the line
/// element. Derivatives are probed by central differences on the curve.
inline bool respects_derivative_bound(const TubeGeometry& g, double c_kappa,
                                      int grid = 16) {
  const double h = 1e-4;
  for (int i = 0; i <= grid; ++i) {
    const double t = g.horizon * i / grid;
    const double tm = std::max(0.0, t - h), tp = std::min(g.horizon, t + h);
    for (int j = 0; j < grid; ++j) {
      const double theta = 2.0 * pi * j / grid;
      const CurveJet jet = curve_jet(g, t, theta);
      if (!(jet.dx_dtheta.norm() > 0.0)) return false;
      const CurveJet jm = curve_jet(g, tm, theta);
      const CurveJet jp = curve_jet(g, tp, theta);
      const Vec2 d2t = (jp.dx_dt - jm.dx_dt) / (tp - tm);
      const CurveJet km = curve_jet(g, t, theta - h);
      const CurveJet kp = curve_jet(g, t, theta + h);
      const Vec2 d2th = (kp.dx_dtheta - km.dx_dtheta) / (2.0 * h);
      const double worst =
          std::max({jet.dx_dtheta.norm(), jet.dx_dt.norm(), d2t.norm(),
                    d2th.norm()});
      if (worst > c_kappa) return false;
    }
  }
  return true;
}

}  // namespace tubebem
