#pragma once

// The run / sweep / coarse experiments behind the command-line tool. Each
// writes its artifacts under an output directory.

#include <filesystem>
#include <string>
#include <vector>

#include "fbpinn/config.hpp"
#include "fbpinn/trainer.hpp"

namespace fbpinn::experiments {

struct RunResult {
  RunReport report;
  std::filesystem::path directory;
};

/// One training run; writes loss_history.csv, solution.csv, summary.json,
/// decomposition.json and checkpoints/. Throws NumericalFailure after writing
/// partial artifacts.
RunResult run(const config::RunConfig& cfg, const std::filesystem::path& out);

struct SweepCell {
  int subdomains = 0;
  int p = 0;
  bool ok = false;
  std::string error;
  double final_loss = 0.0;
  double initial_loss = 0.0;
  double final_l2 = 0.0;
  long steps = 0;
  RunReport report;
};

/// Cartesian product sweep.subdomains x sweep.p with sweep.steps optimizer
/// steps per cell; cells go to J<J>_p<p>/ and the aggregate to
/// sweep_summary.csv. A failing cell is recorded and the sweep continues.
std::vector<SweepCell> sweep(const config::RunConfig& cfg, const std::filesystem::path& out);

struct CoarseResult {
  RunReport report;
  diffnet::MlpParams coarse_after_phase1;
  double coarse_low_frequency_l2 = 0.0; // c u_g against sin(omega1 x)
  double combined_l2 = 0.0;
  bool coarse_unchanged = false; // theta_g bitwise equal before and after phase 2
};

/// Coarse network first, then the local networks with the coarse network
/// frozen; additionally writes coarse_solution.csv and
/// coarse_loss_history.csv.
CoarseResult coarse(const config::RunConfig& cfg, const std::filesystem::path& out);

} // namespace fbpinn::experiments
