#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tubebem/common.hpp"
#include "tubebem/kernels.hpp"
#include "tubebem/mesh.hpp"
#include "tubebem/quadrature.hpp"

namespace tubebem {

/// Block-lower-triangular (in the slab index) dense operator matrix.
/// Block (i,j) maps densities on slab j to collocation values on slab i;
/// blocks with j > i are identically zero by causality of the heat kernel
/// and are not stored.
class CausalMatrix {
 public:
  CausalMatrix() = default;
  CausalMatrix(int num_slabs, int block_size)
      : num_slabs_(num_slabs),
        block_size_(block_size),
        blocks_(std::size_t(num_slabs) * (num_slabs + 1) / 2,
                Eigen::MatrixXd::Zero(block_size, block_size)) {}

  int num_slabs() const { return num_slabs_; }
  int block_size() const { return block_size_; }
  int rows() const { return num_slabs_ * block_size_; }

  Eigen::MatrixXd& block(int i, int j) { return blocks_[offset(i, j)]; }
  const Eigen::MatrixXd& block(int i, int j) const {
    return blocks_[offset(i, j)];
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != rows())
      throw solver_error("CausalMatrix::apply: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(rows());
    const int n = block_size_;
    for (int i = 0; i < num_slabs_; ++i)
      for (int j = 0; j <= i; ++j)
        y.segment(i * n, n).noalias() += block(i, j) * x.segment(j * n, n);
    return y;
  }

  /// alpha*I + beta*this.
  CausalMatrix lincomb(double alpha, double beta) const {
    CausalMatrix r(*this);
    for (auto& b : r.blocks_) b *= beta;
    for (int i = 0; i < num_slabs_; ++i)
      r.block(i, i).diagonal().array() += alpha;
    return r;
  }

  CausalMatrix& axpy(double alpha, const CausalMatrix& other) {
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      blocks_[k] += alpha * other.blocks_[k];
    return *this;
  }

  /// Block product; the result is causal again.
  CausalMatrix multiply(const CausalMatrix& other) const {
    CausalMatrix r(num_slabs_, block_size_);
    for (int i = 0; i < num_slabs_; ++i)
      for (int j = 0; j <= i; ++j)
        for (int k = j; k <= i; ++k)
          r.block(i, j).noalias() += block(i, k) * other.block(k, j);
    return r;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows(), rows());
    const int n = block_size_;
    for (int i = 0; i < num_slabs_; ++i)
      for (int j = 0; j <= i; ++j)
        d.block(i * n, j * n, n, n) = block(i, j);
    return d;
  }

  double frobenius_norm() const {
    double sum = 0.0;
    for (const auto& b : blocks_) sum += b.squaredNorm();
    return std::sqrt(sum);
  }

  bool all_finite() const {
    for (const auto& b : blocks_)
      if (!b.allFinite()) return false;
    return true;
  }

 private:
  std::size_t offset(int i, int j) const {
    return std::size_t(i) * (i + 1) / 2 + j;
  }

  int num_slabs_ = 0;
  int block_size_ = 0;
  std::vector<Eigen::MatrixXd> blocks_;
};

/// Fills the causal blocks in parallel; entry(target, slab, panel) gives
/// the value at one collocation target against one source element.
/// Workers own disjoint blocks, so the result is thread-count independent.
template <class EntryFn>
CausalMatrix assemble_blocks(const SpaceTimeMesh& mesh, EntryFn&& entry) {
  const int m = mesh.num_slabs;
  const int n = mesh.num_panels;
  CausalMatrix a(m, n);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(std::size_t(m) * (m + 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) pairs.emplace_back(i, j);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < std::int64_t(pairs.size()); ++k) {
    const auto [i, j] = pairs[k];
    Eigen::MatrixXd& blk = a.block(i, j);
    for (int p = 0; p < n; ++p) {
      const BoundarySample& target = mesh.collocation[mesh.index(i, p)];
      for (int q = 0; q < n; ++q) blk(p, q) = entry(target, j, q);
    }
  }
  if (!a.all_finite()) throw assembly_error("assemble_blocks: non-finite entry");
  return a;
}

inline CausalMatrix assemble_single_layer(const SpaceTimeMesh& mesh) {
  return assemble_blocks(
      mesh, [&](const BoundarySample& t, int slab, int panel) {
        return panel_integral(TracedKernel::single_layer, t, slab, panel,
                              mesh);
      });
}

inline CausalMatrix assemble_double_layer(const SpaceTimeMesh& mesh) {
  return assemble_blocks(
      mesh, [&](const BoundarySample& t, int slab, int panel) {
        return panel_integral(TracedKernel::double_layer, t, slab, panel,
                              mesh);
      });
}

inline CausalMatrix assemble_adjoint_double_layer(const SpaceTimeMesh& mesh) {
  return assemble_blocks(
      mesh, [&](const BoundarySample& t, int slab, int panel) {
        return panel_integral(TracedKernel::adjoint_double_layer, t, slab,
                              panel, mesh);
      });
}

/// Default offsets for one-sided and two-sided trace extrapolation,
/// {1/2, 1/4, 1/8}*h*R0 with h the panel width. Boundary traces of the
/// potentials reach their one-sided limits only for distances well below
/// the panel width; extrapolating from multiples of h recovers only part
/// of the near-diagonal values.
inline std::vector<double> default_trace_offsets(const SpaceTimeMesh& mesh) {
  const double h = mesh.panel_width() * mesh.geom.radius();
  return {0.5 * h, 0.25 * h, 0.125 * h};
}

struct HypersingularDirect {
  CausalMatrix matrix;
  int flagged = 0;  // entries whose offset extrapolation did not settle
};

/// D by its definition as -gamma_1^- of the double layer potential,
/// realized as an interior limit: evaluate the velocity-corrected trace at
/// x - eps*n for a decreasing offset sequence and Richardson-extrapolate.
/// Never uses the Calderon identity, so it cross-validates the derived D.
inline HypersingularDirect assemble_hypersingular_direct(
    const SpaceTimeMesh& mesh, std::vector<double> offsets = {},
    double extrapolation_tol = 5e-2) {
  if (offsets.empty()) offsets = default_trace_offsets(mesh);
  if (offsets.size() < 3)
    throw config_error("hypersingular direct: need at least 3 offsets");
  for (std::size_t k = 0; k + 1 < offsets.size(); ++k)
    if (offsets[k + 1] >= offsets[k])
      throw config_error("hypersingular direct: offsets must decrease");

  int flagged = 0;
  CausalMatrix matrix = assemble_blocks(mesh, [&](const BoundarySample& t,
                                                  int slab, int panel) {
    std::vector<double> traces;
    traces.reserve(offsets.size());
    for (double eps : offsets) {
      const Vec2 xe = t.x - eps * t.n;
      const value_grad vg = integrate_element<value_grad>(
          mesh, slab, panel, t.t, t.theta,
          [&](const BoundarySample& src) {
            return double_layer_value_grad(t.t, xe, src);
          },
          trace_quadrature());
      traces.push_back(vg.grad.dot(t.n) + 0.5 * t.vn * vg.value);
    }
    // Successive first-order Richardson steps.
    double prev = 0.0, cur = 0.0;
    for (std::size_t k = 0; k + 1 < traces.size(); ++k) {
      const double ratio = offsets[k] / offsets[k + 1];
      const double extrap =
          (ratio * traces[k + 1] - traces[k]) / (ratio - 1.0);
      prev = cur;
      cur = extrap;
      if (k + 2 == traces.size() &&
          std::abs(cur - prev) > extrapolation_tol * (1.0 + std::abs(cur))) {
#pragma omp atomic
        ++flagged;
      }
    }
    return -cur;
  });
  return {std::move(matrix), flagged};
}

/// D derived from the Calderon involution: D = V^{-1} (I/4 - K^2).
/// The causal solve uses dense LU per diagonal block of V.
inline CausalMatrix derive_hypersingular_calderon(const CausalMatrix& v,
                                                  const CausalMatrix& k) {
  const int m = v.num_slabs();
  const int n = v.block_size();
  CausalMatrix rhs = k.multiply(k).lincomb(0.25, -1.0);  // I/4 - K^2
  CausalMatrix x(m, n);
  std::vector<Eigen::FullPivLU<Eigen::MatrixXd>> lus;
  lus.reserve(m);
  for (int i = 0; i < m; ++i) {
    lus.emplace_back(v.block(i, i));
    if (!lus.back().isInvertible())
      throw assembly_error(
          "derive_hypersingular_calderon: singular diagonal block at slab " +
          std::to_string(i));
  }
  for (int jc = 0; jc < m; ++jc) {
    for (int i = jc; i < m; ++i) {
      Eigen::MatrixXd r = rhs.block(i, jc);
      for (int j = jc; j < i; ++j)
        r.noalias() -= v.block(i, j) * x.block(j, jc);
      x.block(i, jc) = lus[i].solve(r);
    }
  }
  return x;
}

/// Cauchy data vector (w, psi) = (Dirichlet trace, gamma_1^- trace) on the
/// mesh, slab-major like the matrices.
struct CauchyPair {
  Eigen::VectorXd w;
  Eigen::VectorXd psi;

  double norm() const { return std::sqrt(w.squaredNorm() + psi.squaredNorm()); }
};

enum class DOperator { calderon, direct };

/// The four operators plus the Calderon block actions. A acts on (w, psi)
/// as [[-K, V], [D, K']]; C = I/2 + A.
struct CalderonBlocks {
  CausalMatrix V, K, Kp, D;

  CauchyPair apply_A(const CauchyPair& p) const {
    return {V.apply(p.psi) - K.apply(p.w), D.apply(p.w) + Kp.apply(p.psi)};
  }

  CauchyPair apply_C(const CauchyPair& p) const {
    CauchyPair a = apply_A(p);
    a.w += 0.5 * p.w;
    a.psi += 0.5 * p.psi;
    return a;
  }
};

inline CalderonBlocks calderon_blocks(const SpaceTimeMesh& mesh,
                                      DOperator d_op = DOperator::calderon) {
  CalderonBlocks b;
  b.V = assemble_single_layer(mesh);
  b.K = assemble_double_layer(mesh);
  b.Kp = assemble_adjoint_double_layer(mesh);
  b.D = d_op == DOperator::calderon
            ? derive_hypersingular_calderon(b.V, b.K)
            : assemble_hypersingular_direct(mesh).matrix;
  return b;
}

// -- Binary dump --------------------------------------------------------------
//
// Little-endian header: magic "THBM", version u32, M u32, N u32, followed
// by the lower-triangular blocks (i = 0..M-1, j = 0..i) as row-major f64.

inline void save_causal_matrix(const std::string& path,
                               const CausalMatrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open '" + path + "' for writing");
  out.write("THBM", 4);
  const std::uint32_t header[3] = {1u, std::uint32_t(a.num_slabs()),
                                   std::uint32_t(a.block_size())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const int n = a.block_size();
  std::vector<double> row(n);
  for (int i = 0; i < a.num_slabs(); ++i)
    for (int j = 0; j <= i; ++j)
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) row[q] = a.block(i, j)(p, q);
        out.write(reinterpret_cast<const char*>(row.data()),
                  std::streamsize(sizeof(double)) * n);
      }
}

inline CausalMatrix load_causal_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "THBM")
    throw config_error("'" + path + "' is not a THBM matrix dump");
  std::uint32_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[0] != 1u)
    throw config_error("unsupported THBM version in '" + path + "'");
  const int m = int(header[1]), n = int(header[2]);
  CausalMatrix a(m, n);
  std::vector<double> row(n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j)
      for (int p = 0; p < n; ++p) {
        in.read(reinterpret_cast<char*>(row.data()),
                std::streamsize(sizeof(double)) * n);
        if (!in) throw config_error("truncated THBM dump '" + path + "'");
        for (int q = 0; q < n; ++q) a.block(i, j)(p, q) = row[q];
      }
  return a;
}

}  // namespace tubebem
