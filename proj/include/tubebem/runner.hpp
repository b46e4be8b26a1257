#pragma once

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "tubebem/config.hpp"
#include "tubebem/mesh.hpp"
#include "tubebem/operators.hpp"
#include "tubebem/potentials.hpp"
#include "tubebem/reporting.hpp"
#include "tubebem/solve.hpp"
#include "tubebem/verify.hpp"

namespace tubebem {

/// 20 interior probe points: five per quarter-horizon snapshot, placed on
/// a fixed radial fan well inside the moving domain.
inline std::vector<std::pair<double, Vec2>> interior_probes(
    const TubeGeometry& geom) {
  std::vector<std::pair<double, Vec2>> probes;
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    const double t = frac * geom.horizon;
    const Vec2 c = domain_center(geom, t);
    probes.emplace_back(t, c);
    for (double ang : {0.0, 0.5 * pi, pi, 1.5 * pi})
      probes.emplace_back(t, Vec2(c + 0.45 * (curve_jet(geom, t, ang).x - c)));
  }
  return probes;
}

inline Eigen::VectorXd boundary_data_vector(const RunConfig& cfg,
                                            const SpaceTimeMesh& mesh,
                                            const ManufacturedData* mdata) {
  Eigen::VectorXd data(mesh.size());
  if (cfg.data == "manufactured") {
    return cfg.problem == Problem::dirichlet ? mdata->g : mdata->psi_exact;
  }
  for (int e = 0; e < mesh.size(); ++e)
    data[e] =
        expression_datum(cfg.expression, mesh.collocation[e], cfg.horizon);
  return data;
}

inline BieSolution run_formulation(const RunConfig& cfg,
                                   const CalderonBlocks& ops,
                                   const Eigen::VectorXd& data) {
  BieSolution sol = cfg.problem == Problem::dirichlet
                        ? solve_dirichlet(ops, data, cfg.variant)
                        : solve_neumann(ops, data, cfg.variant);
  if (sol.residual > 1e-10)
    throw solver_error("linear-system residual " + format_real(sol.residual) +
                       " exceeds 1e-10");
  return sol;
}

/// Variant i touches only V and K; the other variants (and the verify
/// checks) need the full block set.
inline CalderonBlocks assemble_for(const SpaceTimeMesh& mesh, Variant variant,
                                   DOperator d_op) {
  if (variant == Variant::i) {
    CalderonBlocks ops;
    ops.V = assemble_single_layer(mesh);
    ops.K = assemble_double_layer(mesh);
    return ops;
  }
  return calderon_blocks(mesh, d_op);
}

inline void write_density_csv(const std::string& path,
                              const SpaceTimeMesh& mesh,
                              const Eigen::VectorXd& density) {
  CsvWriter csv(path);
  csv.comment("tubebem density v1: slab,panel,t,theta,value");
  csv.raw_row("slab,panel,t,theta,value");
  for (int i = 0; i < mesh.num_slabs; ++i)
    for (int j = 0; j < mesh.num_panels; ++j) {
      const auto& s = mesh.collocation[mesh.index(i, j)];
      csv.begin_row();
      csv.field(i).field(j).field(s.t).field(s.theta).field(
          density[mesh.index(i, j)]);
      csv.end_row();
    }
}

inline void write_interior_csv(const std::string& path,
                               const SpaceTimeMesh& mesh,
                               const BieSolution& sol) {
  CsvWriter csv(path);
  csv.comment("tubebem interior field v1: t,x1,x2,value,flag");
  csv.raw_row("t,x1,x2,value,flag");
  for (const auto& [t, p] : interior_probes(mesh.geom)) {
    const FieldEval fe = interior_value(mesh, sol, t, p);
    csv.begin_row();
    csv.field(t).field(p.x()).field(p.y()).field(fe.value).field(
        fe.near_boundary ? 1 : 0);
    csv.end_row();
  }
}

inline int run_solve(const RunConfig& cfg, DOperator d_op,
                     bool dump_operators = false) {
  const TubeGeometry geom = cfg.geometry();
  const SpaceTimeMesh mesh = build_mesh(geom, cfg.num_slabs, cfg.num_panels,
                                        cfg.time_order, cfg.space_order);
  ManufacturedData mdata;
  if (cfg.data == "manufactured")
    mdata = manufactured_cauchy_data(geom, mesh, cfg.source);
  const Eigen::VectorXd data = boundary_data_vector(
      cfg, mesh, cfg.data == "manufactured" ? &mdata : nullptr);
  const CalderonBlocks ops = dump_operators
                                 ? calderon_blocks(mesh, d_op)
                                 : assemble_for(mesh, cfg.variant, d_op);
  const BieSolution sol = run_formulation(cfg, ops, data);

  ensure_directory(cfg.out_dir);
  if (dump_operators) {
    save_causal_matrix(cfg.out_dir + "/V.thbm", ops.V);
    save_causal_matrix(cfg.out_dir + "/K.thbm", ops.K);
    save_causal_matrix(cfg.out_dir + "/Kp.thbm", ops.Kp);
    save_causal_matrix(cfg.out_dir + "/D.thbm", ops.D);
  }
  write_density_csv(cfg.out_dir + "/density.csv", mesh, sol.density);
  write_interior_csv(cfg.out_dir + "/interior.csv", mesh, sol);
  {
    CsvWriter csv(cfg.out_dir + "/summary.csv");
    csv.comment("tubebem solve summary v1: key,value");
    csv.raw_row("key,value");
    auto kv = [&](const std::string& k, const std::string& v) {
      csv.begin_row();
      csv.field(k).field(v);
      csv.end_row();
    };
    kv("problem", cfg.problem == Problem::dirichlet ? "dirichlet" : "neumann");
    kv("variant", variant_name(cfg.variant));
    kv("geometry", family_name(cfg.kind));
    kv("M", std::to_string(cfg.num_slabs));
    kv("N", std::to_string(cfg.num_panels));
    kv("d_operator", d_op == DOperator::calderon ? "calderon" : "direct");
    kv("residual", format_real(sol.residual));
    kv("seed", std::to_string(cfg.seed));
  }
  std::cout << "solve: " << family_name(cfg.kind) << " "
            << (cfg.problem == Problem::dirichlet ? "dirichlet" : "neumann")
            << " variant " << variant_name(cfg.variant) << " at M="
            << cfg.num_slabs << " N=" << cfg.num_panels
            << ", residual " << format_real(sol.residual) << "\n";
  return 0;
}

struct VerifyRow {
  std::string check;
  std::string name;
  double value;
  double threshold;
  bool pass;
};

inline std::vector<VerifyRow> verify_rows(const RunConfig& cfg,
                                          DOperator d_op) {
  const TubeGeometry geom = cfg.geometry();
  const SpaceTimeMesh mesh = build_mesh(geom, cfg.num_slabs, cfg.num_panels,
                                        cfg.time_order, cfg.space_order);
  std::vector<VerifyRow> rows;
  std::mt19937_64 rng(cfg.seed);

  const bool want_operators = cfg.checks.count("jumps") ||
                              cfg.checks.count("calderon") ||
                              cfg.checks.count("coercivity");
  CalderonBlocks ops;
  if (want_operators) ops = calderon_blocks(mesh, d_op);

  if (cfg.checks.count("jumps")) {
    const Eigen::VectorXd density = random_smooth_density(mesh, rng);
    const struct {
      PotentialKind pk;
      TraceKind tk;
      const char* name;
    } probes[] = {
        {PotentialKind::single_layer, TraceKind::dirichlet, "V-dirichlet"},
        {PotentialKind::single_layer, TraceKind::neumann_minus, "V-neumann"},
        {PotentialKind::double_layer, TraceKind::dirichlet, "K-dirichlet"},
        {PotentialKind::double_layer, TraceKind::neumann_minus, "K-neumann"},
    };
    for (const auto& probe : probes) {
      const auto report = jump_probe(mesh, density, probe.pk, probe.tk);
      rows.push_back({"jumps", probe.name, report.max_deviation, cfg.jump_tol,
                      report.max_deviation <= cfg.jump_tol});
    }
  }

  if (cfg.checks.count("calderon")) {
    const auto mdata =
        manufactured_cauchy_data(geom, mesh, cfg.source);
    const CauchyPair pair{mdata.g, mdata.psi_exact};
    const CauchyPair q{random_smooth_density(mesh, rng),
                       random_smooth_density(mesh, rng)};
    const auto res = calderon_residuals(ops, pair, q);
    rows.push_back({"calderon", "projector", res.projector, cfg.projector_tol,
                    res.projector <= cfg.projector_tol});
    rows.push_back({"calderon", "involution", res.involution,
                    cfg.projector_tol, res.involution <= cfg.projector_tol});
  }

  if (cfg.checks.count("coercivity")) {
    const auto rep = coercivity_report(ops, mesh, cfg.random_pairs, cfg.seed);
    rows.push_back({"coercivity", "min_eig_V", rep.min_eig_V, 0.0,
                    rep.min_eig_V > 0.0});
    rows.push_back({"coercivity", "min_eig_D", rep.min_eig_D, 0.0,
                    rep.min_eig_D > 0.0});
    rows.push_back({"coercivity", "min_eig_D_complement",
                    rep.min_eig_D_complement, 0.0,
                    rep.min_eig_D_complement > 0.0});
    rows.push_back({"coercivity", "positive_pairs",
                    double(rep.positive_pairs), double(rep.total_pairs),
                    rep.all_pairs_positive()});
  }

  if (cfg.checks.count("bilinear")) {
    const auto vq = build_volume_quadrature(geom, cfg.resolution);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double horizon = geom.horizon;
    auto field = [&](double a, double b, double c, double d) {
      SmoothField f;
      auto eta = [horizon](double t) {
        const double s = std::sin(pi * t / horizon);
        return s * s;
      };
      auto deta = [horizon](double t) {
        return 2.0 * pi / horizon * std::sin(pi * t / horizon) *
               std::cos(pi * t / horizon);
      };
      f.value = [=](double t, const Vec2& x) {
        return eta(t) * (a + b * x.x() + c * x.y() + d * x.x() * x.y());
      };
      f.dt = [=](double t, const Vec2& x) {
        return deta(t) * (a + b * x.x() + c * x.y() + d * x.x() * x.y());
      };
      f.grad = [=](double t, const Vec2& x) {
        return Vec2(eta(t) * (b + d * x.y()), eta(t) * (c + d * x.x()));
      };
      f.lap = [](double, const Vec2&) { return 0.0; };
      return f;
    };
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const SmoothField u = field(coef(rng), coef(rng), coef(rng), coef(rng));
      const SmoothField v = field(coef(rng), coef(rng), coef(rng), coef(rng));
      const double duv = bilinear_d(u, v, vq);
      const double dvu = bilinear_d(v, u, vq);
      worst = std::max(worst,
                       std::abs(duv + dvu) / (std::abs(duv) + 1.0));
    }
    rows.push_back(
        {"bilinear", "antisymmetry", worst, cfg.antisym_tol,
         worst <= cfg.antisym_tol});
  }

  if (cfg.checks.count("green")) {
    const auto vq = build_volume_quadrature(geom, cfg.resolution);
    const ManufacturedSolution m{0.0, cfg.source};
    const SmoothField u = manufactured_field(m);
    SmoothField v;
    const double horizon = geom.horizon;
    v.value = [horizon](double t, const Vec2& x) {
      const double q = 1.0 - t / horizon;
      return q * q * std::exp(-0.5 * x.squaredNorm());
    };
    v.dt = [horizon](double t, const Vec2& x) {
      return -2.0 * (1.0 - t / horizon) / horizon *
             std::exp(-0.5 * x.squaredNorm());
    };
    v.grad = [horizon](double t, const Vec2& x) {
      const double q = 1.0 - t / horizon;
      return Vec2(-q * q * std::exp(-0.5 * x.squaredNorm()) * x);
    };
    v.lap = [horizon](double t, const Vec2& x) {
      const double q = 1.0 - t / horizon;
      return q * q * std::exp(-0.5 * x.squaredNorm()) *
             (x.squaredNorm() - 2.0);
    };
    const double residual = greens_first_residual(u, v, vq);
    rows.push_back({"green", "first_formula", residual, cfg.green_tol,
                    residual <= cfg.green_tol});
  }
  return rows;
}

inline int run_verify(const RunConfig& cfg, DOperator d_op) {
  const auto rows = verify_rows(cfg, d_op);
  ensure_directory(cfg.out_dir);
  {
    CsvWriter csv(cfg.out_dir + "/report.csv");
    csv.comment("tubebem verification report v1: check,name,value,threshold,pass");
    csv.comment("seed " + std::to_string(cfg.seed));
    csv.raw_row("check,name,value,threshold,pass");
    for (const auto& r : rows) {
      csv.begin_row();
      csv.field(r.check).field(r.name).field(r.value).field(r.threshold)
          .field(r.pass ? 1 : 0);
      csv.end_row();
    }
  }
  bool all_pass = true;
  for (const auto& r : rows) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << "/" << r.name
              << ": " << format_real(r.value) << " (threshold "
              << format_real(r.threshold) << ", seed " << cfg.seed << ")\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

inline int run_converge(const RunConfig& cfg, DOperator d_op) {
  if (cfg.data != "manufactured")
    throw config_error("converge requires data = manufactured");
  const TubeGeometry geom = cfg.geometry();
  ensure_directory(cfg.out_dir);
  CsvWriter csv(cfg.out_dir + "/converge.csv");
  csv.comment(
      "tubebem convergence study v1: "
      "level,M,N,density_err,interior_err,density_order,interior_order");
  csv.raw_row("level,M,N,density_err,interior_err,density_order,interior_order");

  double prev_density = 0.0, prev_interior = 0.0;
  bool monotone = true;
  int level_index = 0;
  for (int level : {8, 16, 32, 64}) {
    const SpaceTimeMesh mesh =
        build_mesh(geom, level, level, cfg.time_order, cfg.space_order);
    const auto mdata = manufactured_cauchy_data(geom, mesh, cfg.source);
    const Eigen::VectorXd data = boundary_data_vector(cfg, mesh, &mdata);
    const CalderonBlocks ops = assemble_for(mesh, cfg.variant, d_op);
    const BieSolution sol = run_formulation(cfg, ops, data);

    const Eigen::VectorXd& exact_density =
        cfg.problem == Problem::dirichlet ? mdata.psi_exact : mdata.g;
    const double scale = exact_density.cwiseAbs().maxCoeff();
    const double density_err =
        (sol.density - exact_density).cwiseAbs().maxCoeff() / scale;
    double interior_err = 0.0;
    for (const auto& [t, p] : interior_probes(geom))
      interior_err = std::max(
          interior_err, std::abs(interior_value(mesh, sol, t, p).value -
                                 mdata.oracle.value(t, p)));
    const double dord =
        level_index > 0 ? std::log2(prev_density / density_err) : 0.0;
    const double iord =
        level_index > 0 ? std::log2(prev_interior / interior_err) : 0.0;
    csv.begin_row();
    csv.field(level_index).field(level).field(level).field(density_err)
        .field(interior_err).field(dord).field(iord);
    csv.end_row();
    std::cout << "level " << level << ": density err "
              << format_real(density_err) << ", interior err "
              << format_real(interior_err) << "\n";
    if (level_index > 0 && density_err >= prev_density) monotone = false;
    prev_density = density_err;
    prev_interior = interior_err;
    ++level_index;
  }
  std::cout << (monotone ? "PASS" : "FAIL")
            << " monotone density-error decrease across levels\n";
  return monotone ? 0 : 1;
}

}  // namespace tubebem
