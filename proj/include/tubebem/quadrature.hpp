#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "tubebem/common.hpp"
#include "tubebem/gauss.hpp"
#include "tubebem/geometry.hpp"
#include "tubebem/kernels.hpp"
#include "tubebem/mesh.hpp"

namespace tubebem {

/// Refinement depth of the near-field rules. The defaults suffice for
/// operator assembly and off-boundary potential evaluation; offset-trace
/// evaluations (hypersingular columns, jump probes) use trace_quadrature()
/// which resolves target distances down to a small fraction of the panel
/// width.
struct QuadratureIntensity {
  int theta_levels = 4;  // dyadic halvings toward the singular angle
  int s_levels = 0;      // dyadic halvings of the s-rule toward s = 0
};

inline QuadratureIntensity trace_quadrature() { return {6, 6}; }

namespace detail {

// Subintervals of [a,b] dyadically graded toward a (toward_left) or b.
inline void graded_subintervals(double a, double b, bool toward_left,
                                int levels,
                                std::vector<std::pair<double, double>>& out) {
  std::vector<double> fractions{0.0, 1.0};
  double f = 1.0;
  for (int l = 0; l < levels; ++l) {
    f *= 0.5;
    fractions.push_back(toward_left ? f : 1.0 - f);
  }
  std::sort(fractions.begin(), fractions.end());
  const double len = b - a;
  for (std::size_t k = 0; k + 1 < fractions.size(); ++k)
    out.emplace_back(a + fractions[k] * len, a + fractions[k + 1] * len);
}

// Theta subintervals for one panel given an optional singular angle. The
// panel and its two neighbors are graded toward the target angle; all
// other panels keep the plain single interval.
inline void theta_subintervals(const SpaceTimeMesh& mesh, int panel,
                               std::optional<double> theta_star, bool near,
                               int levels,
                               std::vector<std::pair<double, double>>& out) {
  const double a = mesh.panel_begin(panel);
  const double b = mesh.panel_end(panel);
  if (!near || !theta_star) {
    out.emplace_back(a, b);
    return;
  }
  const double h = mesh.panel_width();
  const double center = 0.5 * (a + b);
  const double rep = center + std::remainder(*theta_star - center, 2.0 * pi);
  if (std::abs(rep - center) > 1.5 * h) {
    out.emplace_back(a, b);
    return;
  }
  if (rep > a && rep < b) {
    graded_subintervals(a, rep, false, levels, out);
    graded_subintervals(rep, b, true, levels, out);
  } else if (rep <= a) {
    graded_subintervals(a, b, true, levels, out);
  } else {
    graded_subintervals(a, b, false, levels, out);
  }
}

}  // namespace detail

/// Integrates f(source)*jac over one space-time element against a target
/// at time t_target. Causality is built in: the tau-integration never
/// crosses t_target. Elements temporally within two slabs of the target
/// use the tau = t - s^2 substitution; panels angularly near theta_star
/// are graded toward it. T must be default-constructible, support += and
/// scalar multiplication.
template <class T, class F>
T integrate_element(const SpaceTimeMesh& mesh, int slab, int panel,
                    double t_target, std::optional<double> theta_star, F&& f,
                    QuadratureIntensity intensity = {}) {
  T acc{};
  const double ta = mesh.slab_begin(slab);
  if (t_target <= ta) return acc;
  const double tb = mesh.slab_end(slab);
  const double tb_eff = std::min(tb, t_target);
  const double width = mesh.slab_width();
  const bool near_time = (t_target - ta) <= 2.0 * width * (1.0 + 1e-12);

  if (!near_time) {
    // Regular path: cached tensor samples.
    const int qs = mesh.space_order;
    const int per = mesh.time_order * qs;
    const std::size_t base = std::size_t(mesh.index(slab, panel)) * per;
    for (int k = 0; k < per; ++k) {
      const BoundarySample& s = mesh.quad_samples[base + k];
      acc += f(s) * (mesh.quad_weights[base + k] * s.jac);
    }
    return acc;
  }

  std::vector<std::pair<double, double>> thetas;
  detail::theta_subintervals(mesh, panel, theta_star, true,
                             intensity.theta_levels, thetas);

  // tau = t_target - s^2 turns the (t-tau)^(-1)-type concentration into a
  // rule that clusters near tau = t_target.
  const double s_lo = std::sqrt(std::max(0.0, t_target - tb_eff));
  const double s_hi = std::sqrt(t_target - ta);
  std::vector<std::pair<double, double>> s_ranges;
  if (intensity.s_levels > 0)
    detail::graded_subintervals(s_lo, s_hi, true, intensity.s_levels,
                                s_ranges);
  else
    s_ranges.emplace_back(s_lo, s_hi);
  for (const auto& [sa, sb] : s_ranges) {
    for (std::size_t a = 0; a < mesh.rule_time.size(); ++a) {
      const auto [s, ws] = map_to_interval(mesh.rule_time, a, sa, sb);
      const double tau = t_target - s * s;
      const double w_tau = ws * 2.0 * s;
      for (const auto& [th_a, th_b] : thetas) {
        for (std::size_t b = 0; b < mesh.rule_space.size(); ++b) {
          const auto [theta, w_theta] =
              map_to_interval(mesh.rule_space, b, th_a, th_b);
          const BoundarySample src = boundary_sample(mesh.geom, tau, theta);
          acc += f(src) * (w_tau * w_theta * src.jac);
        }
      }
    }
  }
  return acc;
}

enum class TracedKernel { single_layer, double_layer, adjoint_double_layer };

/// Space-time integral of one traced kernel over one element, seen from a
/// boundary collocation target. Entries with the whole source slab at or
/// after the target time are exactly zero.
inline double panel_integral(TracedKernel kernel, const BoundarySample& target,
                             int slab, int panel, const SpaceTimeMesh& mesh) {
  switch (kernel) {
    case TracedKernel::single_layer:
      return integrate_element<double>(
          mesh, slab, panel, target.t, target.theta,
          [&](const BoundarySample& src) {
            return single_layer_kernel(target, src);
          });
    case TracedKernel::double_layer:
      return integrate_element<double>(
          mesh, slab, panel, target.t, target.theta,
          [&](const BoundarySample& src) {
            return double_layer_kernel(target, src);
          });
    case TracedKernel::adjoint_double_layer:
      return integrate_element<double>(
          mesh, slab, panel, target.t, target.theta,
          [&](const BoundarySample& src) {
            return adjoint_double_layer_kernel(target, src);
          });
  }
  return 0.0;
}

/// Quadrature over the space-time volume Q_T, its lateral boundary and the
/// final-time slice. Volume nodes come from a star-shaped radial map of
/// the reference cylinder; weights carry the exact area element.
struct VolumeQuadrature {
  struct VolumeNode {
    double t;
    Vec2 x;
    double w;
  };
  double horizon = 0.0;
  std::vector<VolumeNode> nodes;
  std::vector<std::pair<BoundarySample, double>> boundary_nodes;
  std::vector<std::pair<Vec2, double>> final_slice;  // Omega_T at t = T

  double total_measure() const {
    double m = 0.0;
    for (const auto& n : nodes) m += n.w;
    return m;
  }
};

inline VolumeQuadrature build_volume_quadrature(const TubeGeometry& geom,
                                                int resolution) {
  if (resolution < 8)
    throw config_error("build_volume_quadrature: resolution must be >= 8");
  validate_geometry(geom);

  VolumeQuadrature vq;
  vq.horizon = geom.horizon;
  const gauss_rule rule = gauss_legendre(resolution);
  const int n_theta = 2 * resolution;
  const double w_theta = 2.0 * pi / n_theta;

  // x(t, rho, theta) = c(t) + rho * S(t, theta) with S the center-to-curve
  // chord; the area element is rho * (S x dS/dtheta).
  auto slice_nodes = [&](double t, double w_t, auto&& emit) {
    const Vec2 c = domain_center(geom, t);
    for (int j = 0; j < n_theta; ++j) {
      const double theta = (j + 0.5) * w_theta;
      const CurveJet jet = curve_jet(geom, t, theta);
      const Vec2 S = jet.x - c;
      const double cross =
          S.x() * jet.dx_dtheta.y() - S.y() * jet.dx_dtheta.x();
      for (std::size_t a = 0; a < rule.size(); ++a) {
        const auto [rho, w_rho] = map_to_interval(rule, a, 0.0, 1.0);
        emit(c + rho * S, w_t * w_rho * w_theta * rho * cross);
      }
    }
  };

  for (std::size_t k = 0; k < rule.size(); ++k) {
    const auto [t, w_t] = map_to_interval(rule, k, 0.0, geom.horizon);
    slice_nodes(t, w_t, [&](const Vec2& x, double w) {
      vq.nodes.push_back({t, x, w});
    });
    for (int j = 0; j < n_theta; ++j) {
      const double theta = (j + 0.5) * w_theta;
      const BoundarySample s = boundary_sample(geom, t, theta);
      vq.boundary_nodes.emplace_back(s, w_t * w_theta * s.jac);
    }
  }
  slice_nodes(geom.horizon, 1.0, [&](const Vec2& x, double w) {
    vq.final_slice.emplace_back(x, w);
  });
  return vq;
}

}  // namespace tubebem
