#include "fbpinn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fbpinn/kernels.hpp"

namespace fbpinn {

namespace {

using problem::ResidualInput;

double multiplier(const problem::ConstraintSpec& c, double x) {
  return c.hard.multiplier ? c.hard.multiplier(x) : 1.0;
}
double multiplier_derivative(const problem::ConstraintSpec& c, double x) {
  return c.hard.multiplier_derivative ? c.hard.multiplier_derivative(x) : 0.0;
}

SubdomainTerms terms_for(const FbpinnState& state, const PointLayout& layout, bool overlap_only) {
  return state.execution == Execution::openmp ? kernels::omp::terms(state, layout, overlap_only)
                                              : kernels::serial::terms(state, layout, overlap_only);
}

std::vector<ResidualInput> coarse_terms(const diffnet::MlpParams& coarse, const InputMap& map,
                                        std::span<const double> points) {
  std::vector<double> xh(points.size()), v(points.size()), dv(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) xh[i] = map(points[i]);
  diffnet::Workspace ws;
  diffnet::eval_batch(coarse, xh, v, dv, ws);
  std::vector<ResidualInput> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = {v[i], map.scale() * dv[i]};
  return out;
}

void require_in_domain(const decomp::Interval& domain, double x) {
  if (!domain.contains(x)) {
    std::ostringstream os;
    os << "x = " << x << " lies outside the domain [" << domain.a << ", " << domain.b << "]";
    throw std::invalid_argument(os.str());
  }
}

void record(FbpinnState& state, RunReport& report) {
  LossRecord rec;
  rec.step = state.step;
  rec.round = state.round;
  rec.phase = state.phase;
  rec.loss = global_loss(state);
  rec.l2_error = relative_l2_error(state);
  report.history.push_back(std::move(rec));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

PointLayout make_layout(const FbpinnState& state, std::span<const double> points) {
  PointLayout layout;
  layout.sets = decomp::classify_points(state.decomposition, points);
  const auto J = std::size_t(state.decomposition.size());
  layout.local.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    LocalPoints& lp = layout.local[j];
    const auto& members = layout.sets.members[j];
    lp.point = members;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double x = points[members[k]];
      const auto w = decomp::window(state.decomposition, int(j), x);
      lp.x_hat.push_back(state.input_maps[j](x));
      lp.window.push_back(w.w);
      lp.dwindow.push_back(w.dw_dx);
      if (layout.sets.is_overlap(members[k])) {
        lp.overlap_local.push_back(k);
        lp.overlap_x_hat.push_back(lp.x_hat.back());
      }
    }
  }
  const auto& constraint = state.problem.constraint;
  for (double x : points) {
    layout.c.push_back(multiplier(constraint, x));
    layout.dc.push_back(multiplier_derivative(constraint, x));
    layout.f.push_back(state.problem.rhs(x));
  }
  return layout;
}

FbpinnState make_state(const problem::OdeProblem& prob, const FbpinnConfig& config) {
  if (config.p < 1) throw std::invalid_argument("communication interval p must be >= 1");
  if (config.record_interval < 1) throw std::invalid_argument("record_interval must be >= 1");
  if (config.eval_factor < 1) throw std::invalid_argument("eval_factor must be >= 1");
  if (!(config.optimizer.learning_rate >= 0.0))
    throw std::invalid_argument("learning rate must be non-negative");

  FbpinnState state{
      .problem = prob,
      .decomposition = decomp::Decomposition(prob.domain, config.subdomains,
                                             config.overlap_fraction, config.overlap_mode),
  };
  state.p = config.p;
  state.record_interval = config.record_interval;
  state.eval_factor = config.eval_factor;
  state.execution = config.execution;

  const auto sizes = config.network.layer_sizes();
  for (const auto& sd : state.decomposition.subdomains()) {
    state.input_maps.push_back(InputMap::onto_unit(sd.left, sd.right));
    state.params.push_back(diffnet::init_params(sizes, config.seed + unsigned(sd.index)));
    state.optimizers.emplace_back(config.optimizer, state.params.back().size());
  }
  state.coarse_map = InputMap::onto_unit(prob.domain.a, prob.domain.b);
  if (config.coarse_network)
    state.coarse_params = diffnet::init_params(config.coarse_network->layer_sizes(),
                                               config.seed + unsigned(config.subdomains));

  const auto points = decomp::sample_collocation(prob.domain, config.collocation_points);
  state.collocation = make_layout(state, points);
  if (prob.constraint.kind == problem::ConstraintSpec::Kind::soft) {
    std::vector<double> bx;
    for (const auto& bc : prob.constraint.soft) {
      if (bc.points.empty() || bc.points.size() != bc.targets.size())
        throw std::invalid_argument("boundary condition needs matching, non-empty points and targets");
      for (std::size_t k = 0; k < bc.points.size(); ++k) {
        bx.push_back(bc.points[k]);
        state.boundary_target.push_back(bc.targets[k]);
        state.boundary_weight.push_back(bc.weight / double(bc.points.size()));
      }
    }
    state.boundary = make_layout(state, bx);
  }
  const auto grid =
      decomp::sample_collocation(prob.domain, config.eval_factor * config.collocation_points);
  state.eval_grid = make_layout(state, grid);
  state.cache = refresh_overlap_cache(state);
  return state;
}

void set_coarse(FbpinnState& state, std::optional<diffnet::MlpParams> coarse) {
  state.coarse_collocation.clear();
  state.coarse_boundary.clear();
  state.coarse_eval.clear();
  state.coarse_active = coarse.has_value();
  if (coarse) {
    state.coarse_params = std::move(coarse);
    state.coarse_collocation =
        coarse_terms(*state.coarse_params, state.coarse_map, state.collocation.sets.points);
    state.coarse_boundary =
        coarse_terms(*state.coarse_params, state.coarse_map, state.boundary.sets.points);
    state.coarse_eval =
        coarse_terms(*state.coarse_params, state.coarse_map, state.eval_grid.sets.points);
  }
  state.cache = refresh_overlap_cache(state);
}

ResidualInput evaluate_global(const FbpinnState& state, double x) {
  require_in_domain(state.problem.domain, x);
  ResidualInput pair;
  if (state.coarse_active) {
    const auto e = diffnet::eval_with_input_derivative(*state.coarse_params, state.coarse_map(x));
    pair = {e.value, state.coarse_map.scale() * e.dvalue_dx};
  }
  for (int j : state.decomposition.containing(x)) {
    const auto& map = state.input_maps[std::size_t(j)];
    const auto w = decomp::window(state.decomposition, j, x);
    const auto e = diffnet::eval_with_input_derivative(state.params[std::size_t(j)], map(x));
    pair.u += w.w * e.value;
    pair.du_dx += w.dw_dx * e.value + w.w * map.scale() * e.dvalue_dx;
  }
  return pair;
}

ResidualInput evaluate_constrained(const FbpinnState& state, double x) {
  const auto raw = evaluate_global(state, x);
  const auto& c = state.problem.constraint;
  const double m = multiplier(c, x), dm = multiplier_derivative(c, x);
  return {m * raw.u, dm * raw.u + m * raw.du_dx};
}

SubdomainTerms subdomain_terms(const FbpinnState& state, const PointLayout& layout) {
  return terms_for(state, layout, false);
}

LossBreakdown global_loss(const FbpinnState& state) {
  const PointLayout& col = state.collocation;
  const auto terms = terms_for(state, col, false);
  const auto sq = state.execution == Execution::openmp
                      ? kernels::omp::squared_residuals(state, terms)
                      : kernels::serial::squared_residuals(state, terms);
  const double inv_n = 1.0 / double(col.size());

  LossBreakdown out;
  double total = 0.0, interior = 0.0, overlap = 0.0;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    if (!std::isfinite(sq[i]))
      throw NumericalFailure("non-finite residual", col.sets.points[i],
                             col.sets.memberships[i].front().subdomain, state.step);
    total += sq[i];
    (col.sets.is_overlap(i) ? overlap : interior) += sq[i];
  }
  out.total = total * inv_n;
  out.interior = interior * inv_n;
  out.overlap = overlap * inv_n;

  // Interior points see exactly one window (equal to one), so each
  // subdomain's interior residual only involves its own network.
  out.per_subdomain_interior.assign(col.local.size(), 0.0);
  for (std::size_t j = 0; j < col.local.size(); ++j) {
    const LocalPoints& lp = col.local[j];
    double sum = 0.0;
    for (std::size_t i = 0; i < lp.point.size(); ++i) {
      const std::size_t g = lp.point[i];
      if (col.sets.is_overlap(g)) continue;
      ResidualInput pair{terms.value[j][i], terms.dvalue[j][i]};
      if (state.coarse_active) {
        pair.u += state.coarse_collocation[g].u;
        pair.du_dx += state.coarse_collocation[g].du_dx;
      }
      const double r = col.dc[g] * pair.u + col.c[g] * pair.du_dx - col.f[g];
      sum += r * r;
    }
    out.per_subdomain_interior[j] = sum * inv_n;
  }

  if (state.boundary.size() > 0) {
    const auto bterms = terms_for(state, state.boundary, false);
    for (std::size_t i = 0; i < state.boundary.size(); ++i) {
      const auto pair = kernels::assemble(state.boundary, bterms, state.coarse_boundary, i);
      const double r = state.boundary.c[i] * pair.u - state.boundary_target[i];
      out.boundary += state.boundary_weight[i] * r * r;
    }
    out.total += out.boundary;
  }
  return out;
}

OverlapCache refresh_overlap_cache(const FbpinnState& state) {
  OverlapCache cache;
  auto fill = [&](const PointLayout& layout, std::span<const ResidualInput> coarse,
                  SubdomainTerms& out) {
    const auto J = layout.local.size();
    out.value.assign(J, {});
    out.dvalue.assign(J, {});
    if (layout.size() == 0) return;
    const auto terms = terms_for(state, layout, true);
    for (std::size_t j = 0; j < J; ++j) {
      const LocalPoints& lp = layout.local[j];
      out.value[j].assign(lp.point.size(), 0.0);
      out.dvalue[j].assign(lp.point.size(), 0.0);
      for (std::size_t i = 0; i < lp.point.size(); ++i) {
        const std::size_t g = lp.point[i];
        double v = coarse.empty() ? 0.0 : coarse[g].u;
        double d = coarse.empty() ? 0.0 : coarse[g].du_dx;
        for (const auto& m : layout.sets.memberships[g]) {
          if (m.subdomain == int(j)) continue;
          v += terms.value[std::size_t(m.subdomain)][m.local];
          d += terms.dvalue[std::size_t(m.subdomain)][m.local];
        }
        out.value[j][i] = v;
        out.dvalue[j][i] = d;
      }
      if (&layout == &state.collocation) cache.overlap_entries += lp.overlap_local.size();
    }
  };
  fill(state.collocation, state.coarse_collocation, cache.collocation);
  fill(state.boundary, state.coarse_boundary, cache.boundary);
  return cache;
}

double local_loss(const FbpinnState& state, int j, const OverlapCache& cache) {
  diffnet::Workspace ws;
  return kernels::local_loss_impl(state, j, cache, nullptr, ws);
}

std::vector<double> local_point_losses(const FbpinnState& state, int j,
                                       const OverlapCache& cache) {
  diffnet::Workspace ws;
  std::vector<double> out;
  kernels::local_loss_impl(state, j, cache, nullptr, ws, &out);
  return out;
}

double local_loss_gradient(const FbpinnState& state, int j, const OverlapCache& cache,
                           diffnet::ParamGradient& grad) {
  diffnet::Workspace ws;
  return kernels::local_loss_impl(state, j, cache, &grad, ws);
}

double relative_l2_error(const FbpinnState& state) {
  const PointLayout& grid = state.eval_grid;
  const auto terms = terms_for(state, grid, false);
  const auto u = state.execution == Execution::openmp
                     ? kernels::omp::constrained_values(state, grid, terms, state.coarse_eval)
                     : kernels::serial::constrained_values(state, grid, terms, state.coarse_eval);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double exact = state.problem.exact_solution(grid.sets.points[i]);
    num += (u[i] - exact) * (u[i] - exact);
    den += exact * exact;
  }
  return std::sqrt(num / den);
}

void train_round(FbpinnState& state, const schedule::ActiveSet& active, RunReport* report) {
  if (active.active.empty()) throw std::invalid_argument("active set must be non-empty");
  for (int j : active.active)
    if (j < 0 || j >= state.decomposition.size())
      throw std::invalid_argument("active set references an invalid subdomain");

  const long ri = state.record_interval;
  long remaining = state.p;
  while (remaining > 0) {
    long chunk = remaining;
    if (report) {
      // Stop right after the next step whose index is a multiple of ri.
      const long next = ((state.step + ri - 1) / ri) * ri;
      chunk = std::min(remaining, next - state.step + 1);
    }
    if (state.execution == Execution::openmp)
      kernels::omp::local_steps(state, active.active, int(chunk));
    else
      kernels::serial::local_steps(state, active.active, int(chunk));
    state.step += chunk;
    remaining -= chunk;
    if (report && (state.step - 1) % ri == 0) record(state, *report);
  }
  state.cache = refresh_overlap_cache(state);
  ++state.round;
}

void train(FbpinnState& state, const schedule::Schedule& schedule, long rounds, RunReport& report) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (schedule.subdomains() != state.decomposition.size())
    throw std::invalid_argument("schedule and decomposition disagree on the number of subdomains");
  const auto start = std::chrono::steady_clock::now();
  if (!report.initial) {
    report.initial = global_loss(state);
    report.initial_l2 = relative_l2_error(state);
  }
  try {
    for (long r = 0; r < rounds; ++r) {
      train_round(state, schedule.active_set(state.round), &report);
      ++report.rounds;
    }
  } catch (const NumericalFailure& e) {
    report.failed = true;
    report.failure = e.what();
    report.steps = state.step;
    report.wall_time += seconds_since(start);
    throw;
  }
  report.final = global_loss(state);
  report.final_l2 = relative_l2_error(state);
  report.steps = state.step;
  report.solution = solution_samples(state, int(state.collocation.size()));
  report.wall_time += seconds_since(start);
}

void train_coarse_then_local(FbpinnState& state, long coarse_epochs, int coarse_points,
                             long local_rounds, const schedule::Schedule& schedule,
                             RunReport& report, diffnet::MlpParams* coarse_snapshot) {
  if (!state.coarse_params) throw std::logic_error("state has no coarse network configured");
  if (coarse_epochs < 0) throw std::invalid_argument("coarse_epochs must be >= 0");

  if (coarse_epochs > 0) {
    PinnState coarse = make_pinn(state.problem, coarse_points, *state.coarse_params,
                                 state.optimizers.front().config(), state.record_interval,
                                 state.eval_factor);
    train_pinn(coarse, coarse_epochs, report, 1);
    state.coarse_params = coarse.params;
  }
  if (coarse_snapshot) *coarse_snapshot = *state.coarse_params;
  set_coarse(state, state.coarse_params);
  state.phase = 2;
  // Phase 2 reports its own starting point.
  report.initial = global_loss(state);
  report.initial_l2 = relative_l2_error(state);
  train(state, schedule, local_rounds, report);
}

std::vector<SolutionSample> solution_samples(const FbpinnState& state, int n) {
  std::vector<SolutionSample> out;
  for (double x : decomp::sample_collocation(state.problem.domain, n))
    out.push_back({x, evaluate_constrained(state, x).u, state.problem.exact_solution(x)});
  return out;
}

// ---------------------------------------------------------------------------

PinnState make_pinn(const problem::OdeProblem& prob, int collocation_points,
                    const NetworkShape& shape, const OptimizerConfig& optimizer,
                    unsigned long long seed, long record_interval, int eval_factor) {
  return make_pinn(prob, collocation_points, diffnet::init_params(shape.layer_sizes(), seed),
                   optimizer, record_interval, eval_factor);
}

PinnState make_pinn(const problem::OdeProblem& prob, int collocation_points,
                    diffnet::MlpParams initial, const OptimizerConfig& optimizer,
                    long record_interval, int eval_factor) {
  if (record_interval < 1) throw std::invalid_argument("record_interval must be >= 1");
  PinnState s{
      .problem = prob,
      .params = std::move(initial),
      .input_map = InputMap::onto_unit(prob.domain.a, prob.domain.b),
  };
  s.optimizer = OptimizerState(optimizer, s.params.size());
  s.record_interval = record_interval;
  s.x = decomp::sample_collocation(prob.domain, collocation_points);
  for (double x : s.x) {
    s.x_hat.push_back(s.input_map(x));
    s.c.push_back(multiplier(prob.constraint, x));
    s.dc.push_back(multiplier_derivative(prob.constraint, x));
    s.f.push_back(prob.rhs(x));
  }
  if (prob.constraint.kind == problem::ConstraintSpec::Kind::soft) {
    for (const auto& bc : prob.constraint.soft) {
      for (std::size_t k = 0; k < bc.points.size(); ++k) {
        s.boundary_x.push_back(bc.points[k]);
        s.boundary_x_hat.push_back(s.input_map(bc.points[k]));
        s.boundary_target.push_back(bc.targets.at(k));
        s.boundary_weight.push_back(bc.weight / double(bc.points.size()));
      }
    }
  }
  s.eval_x = decomp::sample_collocation(prob.domain, eval_factor * collocation_points);
  for (double x : s.eval_x) {
    s.eval_x_hat.push_back(s.input_map(x));
    s.eval_exact.push_back(prob.exact_solution(x));
  }
  return s;
}

ResidualInput evaluate_pinn(const PinnState& state, double x) {
  require_in_domain(state.problem.domain, x);
  const auto e = diffnet::eval_with_input_derivative(state.params, state.input_map(x));
  return {e.value, state.input_map.scale() * e.dvalue_dx};
}

LossBreakdown pinn_loss(const PinnState& state) {
  const std::size_t n = state.x.size();
  std::vector<double> v(n), dv(n);
  diffnet::Workspace ws;
  diffnet::eval_batch(state.params, state.x_hat, v, dv, ws);
  const double s = state.input_map.scale();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = state.dc[i] * v[i] + state.c[i] * (s * dv[i]) - state.f[i];
    if (!std::isfinite(r)) throw NumericalFailure("non-finite residual", state.x[i]);
    total += r * r;
  }
  LossBreakdown out;
  out.total = total * (1.0 / double(n));
  out.interior = out.total;
  out.per_subdomain_interior = {out.interior};
  if (!state.boundary_x.empty()) {
    std::vector<double> bv(state.boundary_x.size()), bdv(state.boundary_x.size());
    diffnet::eval_batch(state.params, state.boundary_x_hat, bv, bdv, ws);
    for (std::size_t i = 0; i < bv.size(); ++i) {
      const double r = multiplier(state.problem.constraint, state.boundary_x[i]) * bv[i] -
                       state.boundary_target[i];
      out.boundary += state.boundary_weight[i] * r * r;
    }
    out.total += out.boundary;
  }
  return out;
}

double pinn_loss_gradient(const PinnState& state, diffnet::ParamGradient& grad) {
  const double s = state.input_map.scale();
  const double inv_n = 1.0 / double(state.x.size());
  diffnet::Workspace ws;
  double loss = diffnet::loss_gradient(
      state.params, state.x_hat,
      [&](std::size_t i, diffnet::EvalResult e) {
        return kernels::residual_term(e.value, e.dvalue_dx, 1.0, 0.0, s, 0.0, 0.0, state.c[i],
                                      state.dc[i], state.f[i], inv_n);
      },
      grad, ws);
  if (!state.boundary_x.empty()) {
    diffnet::ParamGradient bgrad(state.params.layer_sizes());
    loss += diffnet::loss_gradient(
        state.params, state.boundary_x_hat,
        [&](std::size_t i, diffnet::EvalResult e) {
          return kernels::boundary_term(e.value, 1.0, 0.0,
                                        multiplier(state.problem.constraint, state.boundary_x[i]),
                                        state.boundary_target[i], state.boundary_weight[i]);
        },
        bgrad, ws);
    auto g = grad.values();
    auto b = bgrad.values();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += b[k];
  }
  return loss;
}

double pinn_relative_l2_error(const PinnState& state) {
  const std::size_t n = state.eval_x.size();
  std::vector<double> v(n), dv(n);
  diffnet::Workspace ws;
  diffnet::eval_batch(state.params, state.eval_x_hat, v, dv, ws);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = multiplier(state.problem.constraint, state.eval_x[i]) * v[i];
    num += (u - state.eval_exact[i]) * (u - state.eval_exact[i]);
    den += state.eval_exact[i] * state.eval_exact[i];
  }
  return std::sqrt(num / den);
}

void train_pinn(PinnState& state, long steps, RunReport& report, int phase) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  const auto start = std::chrono::steady_clock::now();
  if (!report.initial) {
    report.initial = pinn_loss(state);
    report.initial_l2 = pinn_relative_l2_error(state);
  }
  diffnet::ParamGradient grad(state.params.layer_sizes());
  try {
    for (long k = 0; k < steps; ++k) {
      pinn_loss_gradient(state, grad);
      state.optimizer.step(state.params.values(), grad.values());
      ++state.step;
      if ((state.step - 1) % state.record_interval == 0) {
        LossRecord rec;
        rec.step = state.step;
        rec.round = state.step;
        rec.phase = phase;
        rec.loss = pinn_loss(state);
        rec.l2_error = pinn_relative_l2_error(state);
        report.history.push_back(std::move(rec));
      }
    }
  } catch (const NumericalFailure& e) {
    report.failed = true;
    report.failure = e.with_context(std::nullopt, state.step).what();
    report.wall_time += seconds_since(start);
    throw e.with_context(std::nullopt, state.step);
  }
  report.final = pinn_loss(state);
  report.final_l2 = pinn_relative_l2_error(state);
  report.steps = state.step;
  report.wall_time += seconds_since(start);
}

} // namespace fbpinn
