#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "tubebem/config.hpp"
#include "tubebem/runner.hpp"

namespace {

void apply_thread_count(int threads) {
  // The environment variables win over the flag.
  if (std::getenv("OMP_NUM_THREADS") != nullptr) return;
  if (const char* env = std::getenv("TUBEBEM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      omp_set_num_threads(n);
      return;
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tubebem - boundary integral solver for the heat equation on moving "
      "planar domains"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string d_operator = "calderon";
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool dump_operators = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration file")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", threads, "worker thread count");
    cmd->add_option("--d-operator", d_operator,
                    "hypersingular operator route: calderon or direct")
        ->check(CLI::IsMember({"calderon", "direct"}));
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& v) {
          seed = v;
          seed_set = true;
        },
        "random seed (overrides config)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one formulation");
  solve->add_flag("--dump-operators", dump_operators,
                  "write V/K/Kp/D as THBM binary dumps into the output dir");
  CLI::App* verify =
      app.add_subcommand("verify", "run the operator identity checks");
  CLI::App* converge =
      app.add_subcommand("converge", "manufactured convergence study");
  add_common(solve);
  add_common(verify);
  add_common(converge);

  CLI11_PARSE(app, argc, argv);

  try {
    tubebem::RunConfig cfg = tubebem::parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) cfg.seed = seed;
    apply_thread_count(threads);
    const tubebem::DOperator d_op = d_operator == "direct"
                                        ? tubebem::DOperator::direct
                                        : tubebem::DOperator::calderon;
    if (app.got_subcommand(solve))
      return tubebem::run_solve(cfg, d_op, dump_operators);
    if (app.got_subcommand(verify)) return tubebem::run_verify(cfg, d_op);
    return tubebem::run_converge(cfg, d_op);
  } catch (const tubebem::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
