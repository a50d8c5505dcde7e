#include "fbpinn/kernels.hpp"

#include <cmath>

namespace fbpinn::kernels {

void subdomain_terms_one(const FbpinnState& state, const PointLayout& layout, int j,
                         bool overlap_only, std::vector<double>& value,
                         std::vector<double>& dvalue, diffnet::Workspace& ws) {
  const LocalPoints& lp = layout.local[std::size_t(j)];
  const double s = state.input_maps[std::size_t(j)].scale();
  value.resize(lp.point.size(), 0.0);
  dvalue.resize(lp.point.size(), 0.0);
  const auto& params = state.params[std::size_t(j)];
  if (overlap_only) {
    diffnet::forward_batch(params, lp.overlap_x_hat, ws);
    for (std::size_t k = 0; k < lp.overlap_local.size(); ++k) {
      const std::size_t i = lp.overlap_local[k];
      const auto e = diffnet::forward_output(ws, k);
      value[i] = lp.window[i] * e.value;
      dvalue[i] = lp.dwindow[i] * e.value + lp.window[i] * s * e.dvalue_dx;
    }
    return;
  }
  diffnet::forward_batch(params, lp.x_hat, ws);
  for (std::size_t i = 0; i < lp.point.size(); ++i) {
    const auto e = diffnet::forward_output(ws, i);
    value[i] = lp.window[i] * e.value;
    dvalue[i] = lp.dwindow[i] * e.value + lp.window[i] * s * e.dvalue_dx;
  }
}

problem::ResidualInput assemble(const PointLayout& layout, const SubdomainTerms& terms,
                                std::span<const problem::ResidualInput> coarse, std::size_t i) {
  problem::ResidualInput pair = coarse.empty() ? problem::ResidualInput{} : coarse[i];
  for (const auto& m : layout.sets.memberships[i]) {
    pair.u += terms.value[std::size_t(m.subdomain)][m.local];
    pair.du_dx += terms.dvalue[std::size_t(m.subdomain)][m.local];
  }
  return pair;
}

double local_loss_impl(const FbpinnState& state, int j, const OverlapCache& cache,
                       diffnet::ParamGradient* grad, diffnet::Workspace& ws,
                       std::vector<double>* per_point) {
  const auto ju = std::size_t(j);
  const auto& params = state.params[ju];
  const double s = state.input_maps[ju].scale();
  const PointLayout& col = state.collocation;
  const LocalPoints& lp = col.local[ju];
  const auto& cv = cache.collocation.value[ju];
  const auto& cd = cache.collocation.dvalue[ju];
  const double inv_n = 1.0 / double(col.size());

  if (grad) {
    if (!grad->same_shape(params)) *grad = diffnet::ParamGradient(params.layer_sizes());
    diffnet::zero(*grad);
  }

  double loss = 0.0;
  if (per_point) per_point->assign(lp.point.size(), 0.0);
  diffnet::forward_batch(params, lp.x_hat, ws);
  for (std::size_t i = 0; i < lp.point.size(); ++i) {
    const std::size_t g = lp.point[i];
    const auto e = diffnet::forward_output(ws, i);
    const auto pl = residual_term(e.value, e.dvalue_dx, lp.window[i], lp.dwindow[i], s, cv[i],
                                  cd[i], col.c[g], col.dc[g], col.f[g], inv_n);
    if (!std::isfinite(pl.loss) || !std::isfinite(pl.d_value) || !std::isfinite(pl.d_dvalue_dx))
      throw NumericalFailure("non-finite residual", col.sets.points[g], j, state.step);
    loss += pl.loss;
    if (per_point) (*per_point)[i] = pl.loss;
    ws.seed_value[i] = pl.d_value;
    ws.seed_dvalue[i] = pl.d_dvalue_dx;
  }
  if (grad) diffnet::backward_batch(params, lp.x_hat, ws, *grad);

  if (!state.boundary.local.empty() && !state.boundary.local[ju].point.empty()) {
    const PointLayout& bnd = state.boundary;
    const LocalPoints& bp = bnd.local[ju];
    const auto& bv = cache.boundary.value[ju];
    diffnet::forward_batch(params, bp.x_hat, ws);
    for (std::size_t i = 0; i < bp.point.size(); ++i) {
      const std::size_t g = bp.point[i];
      const auto e = diffnet::forward_output(ws, i);
      const auto pl = boundary_term(e.value, bp.window[i], bv[i], bnd.c[g],
                                    state.boundary_target[g], state.boundary_weight[g]);
      if (!std::isfinite(pl.loss) || !std::isfinite(pl.d_value))
        throw NumericalFailure("non-finite boundary residual", bnd.sets.points[g], j, state.step);
      loss += pl.loss;
      ws.seed_value[i] = pl.d_value;
      ws.seed_dvalue[i] = 0.0;
    }
    if (grad) diffnet::backward_batch(params, bp.x_hat, ws, *grad);
  }
  return loss;
}

void local_steps_one(FbpinnState& state, int j, int steps, diffnet::Workspace& ws,
                     diffnet::ParamGradient& grad) {
  auto& params = state.params[std::size_t(j)];
  auto& opt = state.optimizers[std::size_t(j)];
  for (int k = 0; k < steps; ++k) {
    local_loss_impl(state, j, state.cache, &grad, ws);
    opt.step(params.values(), grad.values());
  }
}

namespace serial {

SubdomainTerms terms(const FbpinnState& state, const PointLayout& layout, bool overlap_only) {
  SubdomainTerms t;
  const auto J = layout.local.size();
  t.value.resize(J);
  t.dvalue.resize(J);
  diffnet::Workspace ws;
  for (std::size_t j = 0; j < J; ++j)
    subdomain_terms_one(state, layout, int(j), overlap_only, t.value[j], t.dvalue[j], ws);
  return t;
}

void local_steps(FbpinnState& state, std::span<const int> active, int steps) {
  diffnet::Workspace ws;
  diffnet::ParamGradient grad;
  for (int j : active) {
    try {
      local_steps_one(state, j, steps, ws, grad);
    } catch (const NumericalFailure& e) {
      throw e.with_context(j, state.step);
    }
  }
}

std::vector<double> squared_residuals(const FbpinnState& state, const SubdomainTerms& terms) {
  const PointLayout& col = state.collocation;
  std::vector<double> sq(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    const auto pair = assemble(col, terms, state.coarse_collocation, i);
    const double r = col.dc[i] * pair.u + col.c[i] * pair.du_dx - col.f[i];
    sq[i] = r * r;
  }
  return sq;
}

std::vector<double> constrained_values(const FbpinnState&, const PointLayout& layout,
                                       const SubdomainTerms& terms,
                                       std::span<const problem::ResidualInput> coarse) {
  std::vector<double> out(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i)
    out[i] = layout.c[i] * assemble(layout, terms, coarse, i).u;
  return out;
}

} // namespace serial
} // namespace fbpinn::kernels
