#pragma once

// FBPINN state, global evaluation, loss assembly, overlap cache and the
// round-based training loop, plus the plain-PINN path used for the coarse
// network and as the single-subdomain reference.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbpinn/decomp.hpp"
#include "fbpinn/diffnet.hpp"
#include "fbpinn/optimizer.hpp"
#include "fbpinn/problem.hpp"
#include "fbpinn/schedule.hpp"

namespace fbpinn {

enum class Execution { serial, openmp };

struct NetworkShape {
  int hidden_layers = 2;
  int hidden_width = 16;

  std::vector<int> layer_sizes() const { return diffnet::mlp_layer_sizes(hidden_layers, hidden_width); }
};

/// Affine map x -> x_hat = (x - center) / half_width onto [-1, 1].
struct InputMap {
  double center = 0.0;
  double half_width = 1.0;

  static InputMap onto_unit(double left, double right) {
    return {0.5 * (left + right), 0.5 * (right - left)};
  }
  double operator()(double x) const noexcept { return (x - center) / half_width; }
  double scale() const noexcept { return 1.0 / half_width; } // dx_hat/dx
};

/// One subdomain's share of a point set, with windows and normalised inputs
/// precomputed. Entries are aligned with CollocationSets::members[j].
struct LocalPoints {
  std::vector<std::size_t> point;
  std::vector<double> x_hat, window, dwindow;
  std::vector<std::size_t> overlap_local; // local positions of overlap points
  std::vector<double> overlap_x_hat;
};

/// A point set laid over the decomposition. c/dc are the constraint
/// multiplier and its derivative; f the right-hand side.
struct PointLayout {
  decomp::CollocationSets sets;
  std::vector<LocalPoints> local;
  std::vector<double> c, dc, f;

  std::size_t size() const noexcept { return sets.points.size(); }
};

/// Window-weighted contributions of one network per subdomain, aligned with
/// LocalPoints (value and x-derivative).
struct SubdomainTerms {
  std::vector<std::vector<double>> value, dvalue;
};

/// Frozen "everything except my own term" sums, per subdomain, aligned with
/// LocalPoints. Overlap entries hold neighbor contributions (plus the coarse
/// network when present); interior entries hold only the coarse term.
struct OverlapCache {
  SubdomainTerms collocation;
  SubdomainTerms boundary;
  /// Number of (subdomain, overlap point) entries; zero for J = 1.
  std::size_t overlap_entries = 0;
};

struct LossBreakdown {
  double total = 0.0;    // residual part over all points + boundary part
  double interior = 0.0; // residual part over X^int
  double overlap = 0.0;  // residual part over X^o
  double boundary = 0.0; // soft boundary loss (zero for hard constraints)
  std::vector<double> per_subdomain_interior;
};

struct LossRecord {
  long step = 0;
  long round = 0;
  int phase = 0; // 0 plain/local training, 1 coarse phase, 2 local phase after coarse
  LossBreakdown loss;
  double l2_error = 0.0;
};

struct SolutionSample {
  double x = 0.0;
  double u_pred = 0.0;
  double u_exact = 0.0;
};

struct RunReport {
  std::vector<LossRecord> history;
  std::optional<LossBreakdown> initial;
  std::optional<LossBreakdown> final;
  double initial_l2 = 0.0;
  double final_l2 = 0.0;
  std::vector<SolutionSample> solution;
  long steps = 0;
  long rounds = 0;
  double wall_time = 0.0;
  bool failed = false;
  std::string failure;
};

struct FbpinnConfig {
  int subdomains = 16;
  double overlap_fraction = 0.7;
  decomp::OverlapMode overlap_mode = decomp::OverlapMode::spacing;
  int collocation_points = 3000;
  NetworkShape network;
  std::optional<NetworkShape> coarse_network; // allocates theta_g when set
  OptimizerConfig optimizer;
  unsigned long long seed = 0;
  int p = 1;
  long record_interval = 100;
  int eval_factor = 10;
  Execution execution = Execution::openmp;
};

struct FbpinnState {
  problem::OdeProblem problem;
  decomp::Decomposition decomposition;
  std::vector<InputMap> input_maps;
  std::vector<diffnet::MlpParams> params;
  std::vector<OptimizerState> optimizers;

  std::optional<diffnet::MlpParams> coarse_params;
  InputMap coarse_map;
  bool coarse_active = false; // coarse term included in the solution
  // Frozen coarse contributions per point of each layout (empty when inactive).
  std::vector<problem::ResidualInput> coarse_collocation, coarse_boundary, coarse_eval;

  PointLayout collocation;
  PointLayout boundary; // soft-constraint points; empty for hard constraints
  std::vector<double> boundary_target, boundary_weight;
  PointLayout eval_grid;
  OverlapCache cache;

  int p = 1;
  long record_interval = 100;
  int eval_factor = 10;
  Execution execution = Execution::openmp;
  long round = 0;
  long step = 0;
  int phase = 0;
};

PointLayout make_layout(const FbpinnState& state, std::span<const double> points);

FbpinnState make_state(const problem::OdeProblem& problem, const FbpinnConfig& config);

/// Recompute the frozen coarse contributions after coarse_params changes.
void set_coarse(FbpinnState& state, std::optional<diffnet::MlpParams> coarse);

/// sum_j omega_j u_j (+ u_g) and its exact x-derivative, before the constraint.
problem::ResidualInput evaluate_global(const FbpinnState& state, double x);

/// Constraint applied to evaluate_global.
problem::ResidualInput evaluate_constrained(const FbpinnState& state, double x);

/// Window-weighted term of every subdomain at all its points of layout.
SubdomainTerms subdomain_terms(const FbpinnState& state, const PointLayout& layout);

LossBreakdown global_loss(const FbpinnState& state);

OverlapCache refresh_overlap_cache(const FbpinnState& state);

/// Loss seen by subdomain j with everything else frozen in cache.
double local_loss(const FbpinnState& state, int j, const OverlapCache& cache);

/// Residual contribution of each point of X_j to local_loss, aligned with
/// collocation.local[j] (boundary terms excluded).
std::vector<double> local_point_losses(const FbpinnState& state, int j, const OverlapCache& cache);

/// local_loss and its exact gradient with respect to theta_j.
double local_loss_gradient(const FbpinnState& state, int j, const OverlapCache& cache,
                           diffnet::ParamGradient& grad);

/// Relative L2 error of the constrained solution on the evaluation grid.
double relative_l2_error(const FbpinnState& state);

/// p optimizer steps for every active subdomain against the frozen cache,
/// then one cache refresh. Records into report (if given) every
/// record_interval global steps.
void train_round(FbpinnState& state, const schedule::ActiveSet& active,
                 RunReport* report = nullptr);

/// Runs rounds training rounds; the report keeps everything recorded so far
/// if a NumericalFailure propagates.
void train(FbpinnState& state, const schedule::Schedule& schedule, long rounds, RunReport& report);

/// Two phases: the coarse network alone on coarse_points equispaced points
/// for coarse_epochs steps, then frozen while the local networks train for
/// local_rounds rounds. coarse_snapshot, when given, receives theta_g as it
/// stood at the end of the coarse phase.
void train_coarse_then_local(FbpinnState& state, long coarse_epochs, int coarse_points,
                             long local_rounds, const schedule::Schedule& schedule,
                             RunReport& report, diffnet::MlpParams* coarse_snapshot = nullptr);

/// Samples of the constrained solution on n equispaced points.
std::vector<SolutionSample> solution_samples(const FbpinnState& state, int n);

// ---------------------------------------------------------------------------
// Plain PINN: one network on the whole domain, no windows.

struct PinnState {
  problem::OdeProblem problem;
  diffnet::MlpParams params;
  OptimizerState optimizer;
  InputMap input_map;
  std::vector<double> x, x_hat, c, dc, f;
  std::vector<double> boundary_x, boundary_x_hat, boundary_target, boundary_weight;
  std::vector<double> eval_x, eval_x_hat, eval_exact;
  long record_interval = 100;
  long step = 0;
};

PinnState make_pinn(const problem::OdeProblem& problem, int collocation_points,
                    const NetworkShape& shape, const OptimizerConfig& optimizer,
                    unsigned long long seed, long record_interval = 100, int eval_factor = 10);

/// As above, starting from the given parameters.
PinnState make_pinn(const problem::OdeProblem& problem, int collocation_points,
                    diffnet::MlpParams initial, const OptimizerConfig& optimizer,
                    long record_interval = 100, int eval_factor = 10);

problem::ResidualInput evaluate_pinn(const PinnState& state, double x);
LossBreakdown pinn_loss(const PinnState& state);
double pinn_loss_gradient(const PinnState& state, diffnet::ParamGradient& grad);
double pinn_relative_l2_error(const PinnState& state);

void train_pinn(PinnState& state, long steps, RunReport& report, int phase = 0);

} // namespace fbpinn
