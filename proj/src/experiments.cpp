#include "fbpinn/experiments.hpp"

#include <cmath>
#include <fstream>

#include <omp.h>

#include "fbpinn/kernels.hpp"
#include "fbpinn/report_io.hpp"

namespace fbpinn::experiments {

namespace fs = std::filesystem;

namespace {

void apply_threads(const config::RunConfig& cfg) {
  if (cfg.training.threads > 0) omp_set_num_threads(cfg.training.threads);
}

nlohmann::json summary_json(const std::string& mode, const config::RunConfig& cfg,
                            const RunReport& report) {
  nlohmann::json j;
  j["mode"] = mode;
  j["config"] = config::to_json(cfg);
  j["failed"] = report.failed;
  if (report.failed) j["failure"] = report.failure;
  if (report.initial) j["initial_loss"] = io::loss_to_json(*report.initial);
  if (report.final) j["final_loss"] = io::loss_to_json(*report.final);
  j["initial_l2_error"] = report.initial_l2;
  j["final_l2_error"] = report.final_l2;
  j["steps"] = report.steps;
  j["rounds"] = report.rounds;
  j["records"] = report.history.size();
  j["wall_time_s"] = report.wall_time;
  return j;
}

void write_checkpoints(const FbpinnState& state, const fs::path& out) {
  const fs::path dir = out / "checkpoints";
  fs::create_directories(dir);
  for (std::size_t j = 0; j < state.params.size(); ++j)
    io::write_json(dir / ("subdomain_" + std::to_string(j) + ".json"),
                   io::params_to_json(state.params[j]));
  if (state.coarse_params) io::write_json(dir / "coarse.json", io::params_to_json(*state.coarse_params));
}

void write_run_artifacts(const std::string& mode, const config::RunConfig& cfg,
                         const FbpinnState& state, const RunReport& report, const fs::path& out,
                         int phase) {
  io::write_loss_history_csv(out / "loss_history.csv", report, phase);
  io::write_solution_csv(out / "solution.csv", report);
  io::write_json(out / "summary.json", summary_json(mode, cfg, report));
  io::write_json(out / "decomposition.json", io::decomposition_to_json(state.decomposition));
  write_checkpoints(state, out);
}

} // namespace

RunResult run(const config::RunConfig& cfg, const fs::path& out) {
  apply_threads(cfg);
  const auto problem = config::make_problem(cfg);
  auto fcfg = config::make_fbpinn_config(cfg);
  fcfg.coarse_network.reset();
  FbpinnState state = make_state(problem, fcfg);
  const auto sched = config::make_schedule(cfg);

  RunResult result{{}, out};
  fs::create_directories(out);
  try {
    train(state, sched, cfg.training.rounds, result.report);
  } catch (const NumericalFailure&) {
    write_run_artifacts("run", cfg, state, result.report, out, -1);
    throw;
  }
  write_run_artifacts("run", cfg, state, result.report, out, -1);
  return result;
}

std::vector<SweepCell> sweep(const config::RunConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  std::vector<SweepCell> cells;
  for (int J : cfg.sweep.subdomains) {
    for (int p : cfg.sweep.p) {
      SweepCell cell;
      cell.subdomains = J;
      cell.p = p;
      config::RunConfig c = cfg;
      c.decomposition.subdomains = J;
      c.training.p = p;
      c.training.rounds = cfg.sweep.steps / p;
      const fs::path dir = out / ("J" + std::to_string(J) + "_p" + std::to_string(p));
      try {
        auto r = run(c, dir);
        cell.report = std::move(r.report);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      if (cell.report.initial) cell.initial_loss = cell.report.initial->total;
      if (cell.report.final) cell.final_loss = cell.report.final->total;
      cell.final_l2 = cell.report.final_l2;
      cell.steps = cell.report.steps;
      cells.push_back(std::move(cell));
    }
  }
  std::ofstream csv(out / "sweep_summary.csv");
  csv << "J,p,final_loss,final_l2_error,steps,status\n";
  for (const auto& c : cells) {
    csv << c.subdomains << ',' << c.p << ',' << io::format_double(c.final_loss) << ','
        << io::format_double(c.final_l2) << ',' << c.steps << ','
        << (c.ok ? "ok" : "failed") << '\n';
  }
  io::write_json(out / "sweep_config.json", config::to_json(cfg));
  return cells;
}

CoarseResult coarse(const config::RunConfig& cfg, const fs::path& out) {
  if (!cfg.coarse.enabled) throw config::ConfigError("coarse.enabled", "must be true for the coarse experiment");
  apply_threads(cfg);
  const auto problem = config::make_problem(cfg);
  FbpinnState state = make_state(problem, config::make_fbpinn_config(cfg));
  const auto sched = config::make_schedule(cfg);

  CoarseResult result;
  fs::create_directories(out);
  auto write_all = [&] {
    io::write_loss_history_csv(out / "coarse_loss_history.csv", result.report, 1);
    write_run_artifacts("coarse", cfg, state, result.report, out, 2);
  };

  try {
    train_coarse_then_local(state, cfg.coarse.epochs, cfg.coarse.points, cfg.training.rounds,
                            sched, result.report, &result.coarse_after_phase1);
  } catch (const NumericalFailure&) {
    write_all();
    throw;
  }
  result.coarse_unchanged = diffnet::bitwise_equal(*state.coarse_params, result.coarse_after_phase1);

  // Coarse-only, local-only and combined constrained solutions.
  const auto& grid = state.eval_grid;
  const auto terms = subdomain_terms(state, grid);
  const auto local = kernels::serial::constrained_values(state, grid, terms, {});
  std::ofstream csv(out / "coarse_solution.csv");
  csv << "x,u_coarse,u_local,u_combined,u_exact\n";
  const double w1 = problem.frequencies.front();
  double num_low = 0.0, den_low = 0.0, num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.sets.points[i];
    const double uc = grid.c[i] * state.coarse_eval[i].u;
    const double ul = local[i];
    const double comb = grid.c[i] * kernels::assemble(grid, terms, state.coarse_eval, i).u;
    const double exact = problem.exact_solution(x);
    const double low = std::sin(w1 * x);
    num_low += (uc - low) * (uc - low);
    den_low += low * low;
    num += (comb - exact) * (comb - exact);
    den += exact * exact;
    csv << io::format_double(x) << ',' << io::format_double(uc) << ',' << io::format_double(ul)
        << ',' << io::format_double(comb) << ',' << io::format_double(exact) << '\n';
  }
  result.coarse_low_frequency_l2 = std::sqrt(num_low / den_low);
  result.combined_l2 = std::sqrt(num / den);

  write_all();
  auto summary = summary_json("coarse", cfg, result.report);
  summary["coarse_low_frequency_l2_error"] = result.coarse_low_frequency_l2;
  summary["combined_l2_error"] = result.combined_l2;
  summary["coarse_unchanged_in_local_phase"] = result.coarse_unchanged;
  io::write_json(out / "summary.json", summary);
  return result;
}

} // namespace fbpinn::experiments
