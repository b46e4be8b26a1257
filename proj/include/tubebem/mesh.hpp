#pragma once

#include <vector>

#include "tubebem/common.hpp"
#include "tubebem/gauss.hpp"
#include "tubebem/geometry.hpp"

namespace tubebem {

/// Uniform tensor mesh of the lateral boundary Sigma_T: M time slabs of
/// (0,T] times N reference-angle panels of [0,2*pi). Collocation nodes sit
/// at slab/panel midpoints in slab-major order; this ordering is the
/// causality contract for CausalMatrix. Per-element tensor quadrature
/// samples are precomputed for the regular (well-separated) path.
struct SpaceTimeMesh {
  TubeGeometry geom;
  int num_slabs = 0;    // M
  int num_panels = 0;   // N
  int time_order = 0;   // q_t
  int space_order = 0;  // q_s

  gauss_rule rule_time;   // per-slab rule in tau
  gauss_rule rule_space;  // per-panel rule in theta

  std::vector<BoundarySample> collocation;   // M*N, slab-major
  std::vector<BoundarySample> quad_samples;  // element-major, q_t*q_s each
  std::vector<double> quad_weights;          // matching d_tau*d_theta weights
  std::vector<double> element_measure;       // integral of jac over element

  int size() const { return num_slabs * num_panels; }
  int index(int slab, int panel) const { return slab * num_panels + panel; }
  double slab_width() const { return geom.horizon / num_slabs; }
  double panel_width() const { return 2.0 * pi / num_panels; }
  double slab_begin(int slab) const { return slab * slab_width(); }
  double slab_end(int slab) const { return (slab + 1) * slab_width(); }
  double panel_begin(int panel) const { return panel * panel_width(); }
  double panel_end(int panel) const { return (panel + 1) * panel_width(); }
};

inline SpaceTimeMesh build_mesh(const TubeGeometry& geom, int num_slabs,
                                int num_panels, int time_order,
                                int space_order) {
  if (num_slabs < 4 || num_panels < 4)
    throw config_error("build_mesh: need at least 4 slabs and 4 panels");
  if (time_order < 2 || space_order < 2)
    throw config_error("build_mesh: quadrature orders must be >= 2");
  validate_geometry(geom);

  SpaceTimeMesh mesh;
  mesh.geom = geom;
  mesh.num_slabs = num_slabs;
  mesh.num_panels = num_panels;
  mesh.time_order = time_order;
  mesh.space_order = space_order;
  mesh.rule_time = gauss_legendre(time_order);
  mesh.rule_space = gauss_legendre(space_order);

  const double dt = mesh.slab_width();
  const double dth = mesh.panel_width();

  mesh.collocation.reserve(mesh.size());
  for (int i = 0; i < num_slabs; ++i) {
    const double t_mid = (i + 0.5) * dt;
    for (int j = 0; j < num_panels; ++j)
      mesh.collocation.push_back(
          boundary_sample(geom, t_mid, (j + 0.5) * dth));
  }

  const int per_element = time_order * space_order;
  mesh.quad_samples.reserve(std::size_t(mesh.size()) * per_element);
  mesh.quad_weights.reserve(std::size_t(mesh.size()) * per_element);
  mesh.element_measure.assign(mesh.size(), 0.0);
  for (int i = 0; i < num_slabs; ++i) {
    for (int j = 0; j < num_panels; ++j) {
      double measure = 0.0;
      for (int a = 0; a < time_order; ++a) {
        const auto [tau, w_tau] = map_to_interval(
            mesh.rule_time, a, mesh.slab_begin(i), mesh.slab_end(i));
        for (int b = 0; b < space_order; ++b) {
          const auto [theta, w_theta] = map_to_interval(
              mesh.rule_space, b, mesh.panel_begin(j), mesh.panel_end(j));
          const BoundarySample s = boundary_sample(geom, tau, theta);
          mesh.quad_samples.push_back(s);
          mesh.quad_weights.push_back(w_tau * w_theta);
          measure += w_tau * w_theta * s.jac;
        }
      }
      mesh.element_measure[mesh.index(i, j)] = measure;
    }
  }
  return mesh;
}

}  // namespace tubebem
