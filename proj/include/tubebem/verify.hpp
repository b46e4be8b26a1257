#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tubebem/common.hpp"
#include "tubebem/kernels.hpp"
#include "tubebem/mesh.hpp"
#include "tubebem/operators.hpp"
#include "tubebem/potentials.hpp"
#include "tubebem/quadrature.hpp"

namespace tubebem {

/// Exact caloric field u(t,x) = G~(t - t*, x - x*) with the source placed
/// at t* = 0 strictly outside every Omega_t, so u solves the heat equation
/// in the tube and u(0,.) = 0 on Omega_0 holds identically.
struct ManufacturedSolution {
  double t_star = 0.0;
  Vec2 x_star = Vec2::Zero();

  double value(double t, const Vec2& x) const {
    return heat_kernel(t - t_star, (x - x_star).squaredNorm(), 2);
  }

  Vec2 gradient(double t, const Vec2& x) const {
    const double dt = t - t_star;
    if (dt <= 0.0) return Vec2::Zero();
    return (-0.5 / dt) * (x - x_star) * value(t, x);
  }

  double time_derivative(double t, const Vec2& x) const {
    const double dt = t - t_star;
    if (dt <= 0.0) return 0.0;
    const double r2 = (x - x_star).squaredNorm();
    return value(t, x) * (-1.0 / dt + r2 / (4.0 * dt * dt));
  }

  double dirichlet_trace(const BoundarySample& s) const {
    return value(s.t, s.x);
  }

  double neumann_minus_trace(const BoundarySample& s) const {
    return neumann_minus(value(s.t, s.x), gradient(s.t, s.x), s);
  }
};

struct ManufacturedData {
  ManufacturedSolution oracle;
  Eigen::VectorXd g;          // exact gamma_0 u at collocation nodes
  Eigen::VectorXd psi_exact;  // exact gamma_1^- u at collocation nodes
};

/// Samples the exact Cauchy data of the shifted-kernel solution on the
/// mesh. The source must stay outside the domain with the given margin at
/// every slab time; violations raise config_error.
inline ManufacturedData manufactured_cauchy_data(const TubeGeometry& geom,
                                                 const SpaceTimeMesh& mesh,
                                                 const Vec2& x_star,
                                                 double margin_factor = 0.2) {
  const double margin = margin_factor * geom.radius();
  for (int i = 0; i < mesh.num_slabs; ++i) {
    const double t = 0.5 * (mesh.slab_begin(i) + mesh.slab_end(i));
    if (classify_point(geom, t, x_star) != PointLocation::outside ||
        boundary_distance(geom, t, x_star) < margin)
      throw config_error(
          "manufactured source violates the margin at slab time t=" +
          std::to_string(t));
  }
  ManufacturedData data;
  data.oracle = ManufacturedSolution{0.0, x_star};
  data.g.resize(mesh.size());
  data.psi_exact.resize(mesh.size());
  for (int k = 0; k < mesh.size(); ++k) {
    const BoundarySample& s = mesh.collocation[k];
    data.g[k] = data.oracle.dirichlet_trace(s);
    data.psi_exact[k] = data.oracle.neumann_minus_trace(s);
  }
  return data;
}

/// Default manufactured source: on the negative x-axis, 1.5 length units
/// clear of the domain over the whole time horizon. The clearance keeps
/// the arrival transient of the exact density resolvable on desk-scale
/// meshes while the data stays well above roundoff.
inline Vec2 default_manufactured_source(const TubeGeometry& geom) {
  double reach = 0.0;
  for (int i = 0; i <= 16; ++i) {
    const double t = geom.horizon * i / 16.0;
    for (int j = 0; j < 64; ++j)
      reach = std::max(reach, -curve_jet(geom, t, 2.0 * pi * j / 64.0).x.x());
  }
  return {-(reach + 1.5), 0.0};
}

// -- Jump relations -----------------------------------------------------------

enum class PotentialKind { single_layer, double_layer };
enum class TraceKind { dirichlet, neumann_minus };

struct JumpProbePoint {
  int element = 0;
  double interior = 0.0;
  double exterior = 0.0;
  double jump = 0.0;
  double predicted = 0.0;
  bool converged = true;
};

struct JumpProbeReport {
  std::vector<JumpProbePoint> points;
  double max_deviation = 0.0;
  int nonconverged = 0;
};

/// Measures the two-sided limits of a potential (or its gamma_1^- trace)
/// by Richardson extrapolation along x -+ eps*n and compares the jump
/// exterior-minus-interior against the jump-relations lemma:
///   [gamma_0 V~ psi] = 0,    [gamma_1^- V~ psi] = -psi,
///   [gamma_0 K~ w]   = w,    [gamma_1^- K~ w]   = 0.
inline JumpProbeReport jump_probe(const SpaceTimeMesh& mesh,
                                  const Eigen::VectorXd& density,
                                  PotentialKind potential, TraceKind trace,
                                  std::vector<double> epsilons = {},
                                  int stride = 0,
                                  double extrapolation_tol = 5e-2) {
  if (epsilons.empty()) epsilons = default_trace_offsets(mesh);
  if (epsilons.size() < 2)
    throw config_error("jump_probe: need at least 2 offsets");
  for (std::size_t k = 0; k + 1 < epsilons.size(); ++k)
    if (epsilons[k + 1] >= epsilons[k])
      throw config_error("jump_probe: offsets must decrease");
  if (stride <= 0) stride = std::max(1, mesh.size() / 64);

  const QuadratureIntensity intensity = trace_quadrature();
  auto evaluate = [&](const BoundarySample& s, const Vec2& point) {
    if (trace == TraceKind::dirichlet) {
      return potential == PotentialKind::single_layer
                 ? eval_single_layer(mesh, density, s.t, point, s.theta,
                                     intensity)
                       .value
                 : eval_double_layer(mesh, density, s.t, point, s.theta,
                                     intensity)
                       .value;
    }
    const FieldEvalGrad fe =
        potential == PotentialKind::single_layer
            ? eval_single_layer_grad(mesh, density, s.t, point, s.theta,
                                     intensity)
            : eval_double_layer_grad(mesh, density, s.t, point, s.theta,
                                     intensity);
    return fe.grad.dot(s.n) + 0.5 * s.vn * fe.value;
  };

  auto extrapolate = [&](const std::vector<double>& f, bool& ok) {
    double prev = 0.0, cur = f.front();
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
      const double ratio = epsilons[k] / epsilons[k + 1];
      prev = cur;
      cur = (ratio * f[k + 1] - f[k]) / (ratio - 1.0);
    }
    ok = std::abs(cur - prev) <= extrapolation_tol * (1.0 + std::abs(cur));
    return cur;
  };

  JumpProbeReport report;
  for (int e = 0; e < mesh.size(); e += stride) {
    const BoundarySample& s = mesh.collocation[e];
    std::vector<double> inner, outer;
    for (double eps : epsilons) {
      inner.push_back(evaluate(s, Vec2(s.x - eps * s.n)));
      outer.push_back(evaluate(s, Vec2(s.x + eps * s.n)));
    }
    JumpProbePoint p;
    p.element = e;
    bool ok_in = true, ok_out = true;
    p.interior = extrapolate(inner, ok_in);
    p.exterior = extrapolate(outer, ok_out);
    p.converged = ok_in && ok_out;
    p.jump = p.exterior - p.interior;
    if (potential == PotentialKind::single_layer)
      p.predicted = trace == TraceKind::dirichlet ? 0.0 : -density[e];
    else
      p.predicted = trace == TraceKind::dirichlet ? density[e] : 0.0;
    if (!p.converged) ++report.nonconverged;
    report.max_deviation =
        std::max(report.max_deviation, std::abs(p.jump - p.predicted));
    report.points.push_back(p);
  }
  return report;
}

// -- Calderon identities ------------------------------------------------------

struct CalderonResiduals {
  double projector = 0.0;   // ||C p - p|| / ||p||
  double involution = 0.0;  // ||A^2 q - q/4|| / ||q||
};

inline double calderon_projector_residual(const CalderonBlocks& blocks,
                                          const CauchyPair& pair) {
  CauchyPair c = blocks.apply_C(pair);
  c.w -= pair.w;
  c.psi -= pair.psi;
  const double n = pair.norm();
  if (n == 0.0) return 0.0;  // exact-zero case
  return c.norm() / n;
}

inline double calderon_involution_residual(const CalderonBlocks& blocks,
                                           const CauchyPair& q) {
  CauchyPair a2 = blocks.apply_A(blocks.apply_A(q));
  a2.w -= 0.25 * q.w;
  a2.psi -= 0.25 * q.psi;
  const double n = q.norm();
  if (n == 0.0) return 0.0;
  return a2.norm() / n;
}

inline CalderonResiduals calderon_residuals(const CalderonBlocks& blocks,
                                            const CauchyPair& pair,
                                            const CauchyPair& q) {
  return {calderon_projector_residual(blocks, pair),
          calderon_involution_residual(blocks, q)};
}

// -- Random smooth probes -----------------------------------------------------

/// Smooth trigonometric polynomial in (t, theta) sampled at the
/// collocation nodes; deterministic for a given generator state.
inline Eigen::VectorXd random_smooth_density(const SpaceTimeMesh& mesh,
                                             std::mt19937_64& rng,
                                             int space_modes = 3,
                                             int time_modes = 2) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  struct Term {
    double amp, k_theta, k_time, phase_theta, phase_time;
  };
  std::vector<Term> terms;
  for (int ks = 0; ks <= space_modes; ++ks)
    for (int kt = 0; kt <= time_modes; ++kt)
      terms.push_back({unit(rng) / (1.0 + ks + kt), double(ks), double(kt),
                       pi * unit(rng), pi * unit(rng)});
  Eigen::VectorXd d(mesh.size());
  const double horizon = mesh.geom.horizon;
  for (int e = 0; e < mesh.size(); ++e) {
    const BoundarySample& s = mesh.collocation[e];
    double v = 0.0;
    for (const Term& term : terms)
      v += term.amp * std::cos(term.k_theta * s.theta + term.phase_theta) *
           std::cos(pi * term.k_time * s.t / horizon + term.phase_time);
    d[e] = v;
  }
  return d;
}

// -- Coercivity surrogate -----------------------------------------------------

struct CoercivityReport {
  double min_eig_V = 0.0;             // sym(W^{1/2} V W^{1/2})
  double min_eig_D = 0.0;             // sym(W^{1/2} D W^{1/2}), full space
  double min_eig_D_complement = 0.0;  // same, constants deflated
  int positive_pairs = 0;
  int total_pairs = 0;
  double min_pair_form = 0.0;
  std::uint64_t seed = 0;

  bool v_positive() const { return min_eig_V > 0.0; }
  bool all_pairs_positive() const { return positive_pairs == total_pairs; }
};

/// Empirical positivity of the measure-weighted quadratic forms. The pair
/// form is the discrete <[psi,w], A [psi,w]> of the positive-definiteness
/// theorem with A = [[V, -K], [K', D]] and W the element-measure diagonal.
inline CoercivityReport coercivity_report(const CalderonBlocks& blocks,
                                          const SpaceTimeMesh& mesh,
                                          int num_pairs = 100,
                                          std::uint64_t seed = 20240901ull) {
  CoercivityReport report;
  report.seed = seed;
  const int n = mesh.size();
  Eigen::VectorXd sqw(n);
  for (int k = 0; k < n; ++k) sqw[k] = std::sqrt(mesh.element_measure[k]);

  auto weighted_sym = [&](const CausalMatrix& a) {
    Eigen::MatrixXd d = a.dense();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) *= sqw[i] * sqw[j];
    return Eigen::MatrixXd(0.5 * (d + d.transpose()));
  };

  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted_sym(blocks.V));
    report.min_eig_V = es.eigenvalues().minCoeff();
  }
  {
    const Eigen::MatrixXd s = weighted_sym(blocks.D);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    report.min_eig_D = es.eigenvalues().minCoeff();
    // Deflate the measure-weighted constant direction and look again.
    Eigen::VectorXd u = sqw / sqw.norm();
    const double shift = std::abs(es.eigenvalues().cwiseAbs().maxCoeff()) + 1.0;
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) - u * u.transpose();
    Eigen::MatrixXd sc = p * s * p + shift * (u * u.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esc(sc);
    report.min_eig_D_complement = esc.eigenvalues().minCoeff();
  }

  std::mt19937_64 rng(seed);
  const Eigen::VectorXd wvec =
      Eigen::Map<const Eigen::VectorXd>(mesh.element_measure.data(), n);
  report.total_pairs = num_pairs;
  report.min_pair_form = std::numeric_limits<double>::max();
  for (int k = 0; k < num_pairs; ++k) {
    const Eigen::VectorXd psi = random_smooth_density(mesh, rng);
    const Eigen::VectorXd w = random_smooth_density(mesh, rng);
    const Eigen::VectorXd row1 = blocks.V.apply(psi) - blocks.K.apply(w);
    const Eigen::VectorXd row2 = blocks.Kp.apply(psi) + blocks.D.apply(w);
    const double form = psi.dot(wvec.cwiseProduct(row1)) +
                        w.dot(wvec.cwiseProduct(row2));
    if (form > 0.0) ++report.positive_pairs;
    report.min_pair_form = std::min(report.min_pair_form, form);
  }
  return report;
}

// -- Bilinear form d(u,v) and Green's first formula on the tube ---------------

/// Smooth space-time field with the derivatives the checks need.
struct SmoothField {
  std::function<double(double, const Vec2&)> value;
  std::function<double(double, const Vec2&)> dt;
  std::function<Vec2(double, const Vec2&)> grad;
  std::function<double(double, const Vec2&)> lap;
};

inline SmoothField manufactured_field(const ManufacturedSolution& m) {
  SmoothField f;
  f.value = [m](double t, const Vec2& x) { return m.value(t, x); };
  f.dt = [m](double t, const Vec2& x) { return m.time_derivative(t, x); };
  f.grad = [m](double t, const Vec2& x) { return m.gradient(t, x); };
  // Caloric: the Laplacian equals the time derivative.
  f.lap = [m](double t, const Vec2& x) { return m.time_derivative(t, x); };
  return f;
}

/// d(u,v) = int int du/dt v dx dt + 1/2 int int <V,n> u v dsigma dt.
/// The boundary term is the moving-boundary speciality; it vanishes for
/// stationary geometry.
inline double bilinear_d(const SmoothField& u, const SmoothField& v,
                         const VolumeQuadrature& vq) {
  double vol = 0.0;
  for (const auto& node : vq.nodes)
    vol += node.w * u.dt(node.t, node.x) * v.value(node.t, node.x);
  double sur = 0.0;
  for (const auto& [s, w] : vq.boundary_nodes)
    sur += w * s.vn * u.value(s.t, s.x) * v.value(s.t, s.x);
  return vol + 0.5 * sur;
}

/// Residual of Green's first formula on the tube:
/// int <grad u, grad v> + d(u,v) - int (du/dt - lap u) v - <gamma_1^- u, v>.
/// Needs u(0,.) = 0 and v(T,.) = 0.
inline double greens_first_residual(const SmoothField& u, const SmoothField& v,
                                    const VolumeQuadrature& vq) {
  double grad_term = 0.0, pde_term = 0.0;
  for (const auto& node : vq.nodes) {
    grad_term += node.w * u.grad(node.t, node.x).dot(v.grad(node.t, node.x));
    pde_term += node.w * (u.dt(node.t, node.x) - u.lap(node.t, node.x)) *
                v.value(node.t, node.x);
  }
  double trace_term = 0.0;
  for (const auto& [s, w] : vq.boundary_nodes) {
    const double g1 = u.grad(s.t, s.x).dot(s.n) + 0.5 * s.vn * u.value(s.t, s.x);
    trace_term += w * g1 * v.value(s.t, s.x);
  }
  return std::abs(grad_term + bilinear_d(u, v, vq) - pde_term - trace_term);
}

/// Residual of the rewritten Green formula, which trades v's zero end
/// condition for a final-time volume term:
/// int <grad u, grad v> - d(v,u) + int_{Omega_T} u(T) v(T)
///   - int (du/dt - lap u) v - <gamma_1^- u, v>.
/// Needs u(0,.) = v(0,.) = 0.
inline double greens_rewritten_residual(const SmoothField& u,
                                        const SmoothField& v,
                                        const VolumeQuadrature& vq) {
  double grad_term = 0.0, pde_term = 0.0;
  for (const auto& node : vq.nodes) {
    grad_term += node.w * u.grad(node.t, node.x).dot(v.grad(node.t, node.x));
    pde_term += node.w * (u.dt(node.t, node.x) - u.lap(node.t, node.x)) *
                v.value(node.t, node.x);
  }
  double trace_term = 0.0;
  for (const auto& [s, w] : vq.boundary_nodes) {
    const double g1 = u.grad(s.t, s.x).dot(s.n) + 0.5 * s.vn * u.value(s.t, s.x);
    trace_term += w * g1 * v.value(s.t, s.x);
  }
  double final_term = 0.0;
  for (const auto& [x, w] : vq.final_slice)
    final_term += w * u.value(vq.horizon, x) * v.value(vq.horizon, x);
  return std::abs(grad_term - bilinear_d(v, u, vq) + final_term - pde_term -
                  trace_term);
}

}  // namespace tubebem
