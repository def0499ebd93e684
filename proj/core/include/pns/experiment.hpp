#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pns/config.hpp"
#include "pns/grid.hpp"
#include "pns/landau.hpp"
#include "pns/mild_solver.hpp"

namespace pns::experiment {

// Exit code convention shared with the CLI: 0 pass, 1 assertion failure,
// 2 configuration refusal.
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitRefusal = 2;

struct ExperimentConfig {
  std::string scenario = "verify";

  // grid
  int n = 64;
  double box_len = 16.0;

  // background: none or mollified Landau
  bool landau_background = false;
  double landau_a = 8.0;
  double landau_r_cut = 0.5;
  bool landau_corrupt = false;  // verification fault hook (sign flip)

  // data
  std::string data_kind = "bump";  // bump | dss | snapshot | zero
  double data_norm = 0.05;         // target ||u0|| in the scenario norm
  double bump_width = 1.0;
  std::string snapshot_path;
  double dss_lambda = 2.0;
  int dss_k_min = 9999;  // sentinel: derive from the grid
  int dss_k_max = 9999;

  // solver
  solver::SolverConfig solver;
  double t0 = 1.0;  // counterexample window start

  // thresholds (calibrated defaults; see configs/)
  double eps1 = 2.2;
  double eps2 = 0.35;
  bool use_halved_gates = true;
  double decay_target = 0.5;

  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  static ExperimentConfig from(const config::Config& c);
};

struct RunResult {
  int exit_code = kExitPass;
  std::string summary_json;
  std::vector<std::string> written_files;
};

/// Divergence-free compactly supported bump (curl of a Gaussian-bump
/// potential), rescaled so the requested Lorentz norm is met exactly.
VectorField3 make_bump_data(const Grid& grid, double width, double target_norm,
                            const lorentz::LorentzIndex& idx, std::uint64_t seed);

RunResult run_stability(const ExperimentConfig& cfg);
RunResult run_counterexample(const ExperimentConfig& cfg);
RunResult run_verify(const ExperimentConfig& cfg);
RunResult run_simulate(const ExperimentConfig& cfg);
RunResult run_fixedpoint_demo(const ExperimentConfig& cfg);
RunResult run_norms(const ExperimentConfig& cfg);
RunResult run_landau_gen(const ExperimentConfig& cfg);
RunResult run_dss_gen(const ExperimentConfig& cfg);

RunResult run_scenario(const ExperimentConfig& cfg);

}  // namespace pns::experiment
