#pragma once

#include <string>

#include <Eigen/Dense>

#include "tubebem/common.hpp"
#include "tubebem/mesh.hpp"
#include "tubebem/operators.hpp"
#include "tubebem/potentials.hpp"

namespace tubebem {

enum class Problem { dirichlet, neumann };
enum class Variant { i, ii, iii, iv };

struct Formulation {
  Problem problem = Problem::dirichlet;
  Variant variant = Variant::i;
};

inline Variant variant_from_name(const std::string& s) {
  if (s == "i") return Variant::i;
  if (s == "ii") return Variant::ii;
  if (s == "iii") return Variant::iii;
  if (s == "iv") return Variant::iv;
  throw config_error("unknown variant '" + s + "' (use i, ii, iii, iv)");
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::i: return "i";
    case Variant::ii: return "ii";
    case Variant::iii: return "iii";
    case Variant::iv: return "iv";
  }
  return "?";
}

/// Exact block-triangular solve by marching over the slabs.
inline Eigen::VectorXd forward_substitute(const CausalMatrix& a,
                                          const Eigen::VectorXd& rhs) {
  if (rhs.size() != a.rows())
    throw solver_error("forward_substitute: rhs size mismatch");
  const int m = a.num_slabs();
  const int n = a.block_size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd r = rhs.segment(i * n, n);
    for (int j = 0; j < i; ++j)
      r.noalias() -= a.block(i, j) * x.segment(j * n, n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a.block(i, i));
    if (!lu.isInvertible())
      throw solver_error("forward_substitute: singular diagonal block at slab " +
                         std::to_string(i));
    x.segment(i * n, n) = lu.solve(r);
  }
  return x;
}

inline double relative_residual(const CausalMatrix& a, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& rhs) {
  const double nb = rhs.norm();
  if (nb == 0.0) return 0.0;
  return (a.apply(x) - rhs).norm() / nb;
}

/// Solution of one boundary integral formulation. The Cauchy pair is the
/// reconstructed (gamma_0 u, gamma_1^- u); single/double densities feed
/// the representation u = V~ single - K~ double for interior values.
struct BieSolution {
  Formulation formulation;
  Eigen::VectorXd density;
  CauchyPair pair;
  double residual = 0.0;
  Eigen::VectorXd single_density;
  Eigen::VectorXd double_density;
};

/// Dirichlet problem with data g = gamma_0 u. Variants:
///   i   V psi = (I/2 + K) g          (psi = gamma_1^- u)
///   ii  (I/2 - K') psi = D g         (psi = gamma_1^- u)
///   iii V psi = g                    (u = V~ psi)
///   iv  (I/2 - K) w = -g             (u = K~ w)
inline BieSolution solve_dirichlet(const CalderonBlocks& ops,
                                   const Eigen::VectorXd& g, Variant variant) {
  BieSolution sol;
  sol.formulation = {Problem::dirichlet, variant};
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.size());
  switch (variant) {
    case Variant::i: {
      const Eigen::VectorXd rhs = 0.5 * g + ops.K.apply(g);
      sol.density = forward_substitute(ops.V, rhs);
      sol.residual = relative_residual(ops.V, sol.density, rhs);
      sol.pair = {g, sol.density};
      sol.single_density = sol.density;
      sol.double_density = g;
      break;
    }
    case Variant::ii: {
      const CausalMatrix sys = ops.Kp.lincomb(0.5, -1.0);
      const Eigen::VectorXd rhs = ops.D.apply(g);
      sol.density = forward_substitute(sys, rhs);
      sol.residual = relative_residual(sys, sol.density, rhs);
      sol.pair = {g, sol.density};
      sol.single_density = sol.density;
      sol.double_density = g;
      break;
    }
    case Variant::iii: {
      sol.density = forward_substitute(ops.V, g);
      sol.residual = relative_residual(ops.V, sol.density, g);
      sol.pair = {ops.V.apply(sol.density),
                  0.5 * sol.density + ops.Kp.apply(sol.density)};
      sol.single_density = sol.density;
      sol.double_density = zero;
      break;
    }
    case Variant::iv: {
      const CausalMatrix sys = ops.K.lincomb(0.5, -1.0);
      const Eigen::VectorXd rhs = -g;
      sol.density = forward_substitute(sys, rhs);
      sol.residual = relative_residual(sys, sol.density, rhs);
      sol.pair = {-0.5 * sol.density + ops.K.apply(sol.density),
                  -ops.D.apply(sol.density)};
      sol.single_density = zero;
      sol.double_density = -sol.density;
      break;
    }
  }
  return sol;
}

/// Neumann problem with data h = gamma_1^- u. Variants:
///   i   (I/2 + K) w = V h            (w = gamma_0 u)
///   ii  D w = (I/2 - K') h           (w = gamma_0 u)
///   iii (I/2 + K') psi = h           (u = V~ psi)
///   iv  D w = -h                     (u = K~ w)
inline BieSolution solve_neumann(const CalderonBlocks& ops,
                                 const Eigen::VectorXd& h, Variant variant) {
  BieSolution sol;
  sol.formulation = {Problem::neumann, variant};
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(h.size());
  switch (variant) {
    case Variant::i: {
      const CausalMatrix sys = ops.K.lincomb(0.5, 1.0);
      const Eigen::VectorXd rhs = ops.V.apply(h);
      sol.density = forward_substitute(sys, rhs);
      sol.residual = relative_residual(sys, sol.density, rhs);
      sol.pair = {sol.density, h};
      sol.single_density = h;
      sol.double_density = sol.density;
      break;
    }
    case Variant::ii: {
      const Eigen::VectorXd rhs = 0.5 * h - ops.Kp.apply(h);
      sol.density = forward_substitute(ops.D, rhs);
      sol.residual = relative_residual(ops.D, sol.density, rhs);
      sol.pair = {sol.density, h};
      sol.single_density = h;
      sol.double_density = sol.density;
      break;
    }
    case Variant::iii: {
      const CausalMatrix sys = ops.Kp.lincomb(0.5, 1.0);
      sol.density = forward_substitute(sys, h);
      sol.residual = relative_residual(sys, sol.density, h);
      sol.pair = {ops.V.apply(sol.density),
                  0.5 * sol.density + ops.Kp.apply(sol.density)};
      sol.single_density = sol.density;
      sol.double_density = zero;
      break;
    }
    case Variant::iv: {
      const Eigen::VectorXd rhs = -h;
      sol.density = forward_substitute(ops.D, rhs);
      sol.residual = relative_residual(ops.D, sol.density, rhs);
      sol.pair = {-0.5 * sol.density + ops.K.apply(sol.density),
                  -ops.D.apply(sol.density)};
      sol.single_density = zero;
      sol.double_density = -sol.density;
      break;
    }
  }
  return sol;
}

/// Interior value of the solution via its own representation.
inline FieldEval interior_value(const SpaceTimeMesh& mesh,
                                const BieSolution& sol, double t0,
                                const Vec2& x0) {
  const FieldEval s = eval_single_layer(mesh, sol.single_density, t0, x0);
  const FieldEval d = eval_double_layer(mesh, sol.double_density, t0, x0);
  return {s.value - d.value, s.near_boundary || d.near_boundary};
}

}  // namespace tubebem
