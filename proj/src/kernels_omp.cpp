#include "fbpinn/kernels.hpp"

#include <exception>

#include <omp.h>

namespace fbpinn::kernels::omp {

SubdomainTerms terms(const FbpinnState& state, const PointLayout& layout, bool overlap_only) {
  SubdomainTerms t;
  const auto J = static_cast<long>(layout.local.size());
  t.value.resize(std::size_t(J));
  t.dvalue.resize(std::size_t(J));
#pragma omp parallel
  {
    diffnet::Workspace ws;
#pragma omp for schedule(dynamic, 1)
    for (long j = 0; j < J; ++j)
      subdomain_terms_one(state, layout, int(j), overlap_only, t.value[std::size_t(j)],
                          t.dvalue[std::size_t(j)], ws);
  }
  return t;
}

void local_steps(FbpinnState& state, std::span<const int> active, int steps) {
  const auto n = static_cast<long>(active.size());
  std::vector<std::exception_ptr> errors(active.size());
#pragma omp parallel
  {
    diffnet::Workspace ws;
    diffnet::ParamGradient grad;
#pragma omp for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
      try {
        local_steps_one(state, active[std::size_t(k)], steps, ws, grad);
      } catch (...) {
        errors[std::size_t(k)] = std::current_exception();
      }
    }
  }
  // Report the lowest-indexed failure so the error does not depend on timing.
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const NumericalFailure& e) {
      throw e.with_context(active[k], state.step);
    }
  }
}

std::vector<double> squared_residuals(const FbpinnState& state, const SubdomainTerms& terms) {
  const PointLayout& col = state.collocation;
  const auto n = static_cast<long>(col.size());
  std::vector<double> sq(col.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto iu = std::size_t(i);
    const auto pair = assemble(col, terms, state.coarse_collocation, iu);
    const double r = col.dc[iu] * pair.u + col.c[iu] * pair.du_dx - col.f[iu];
    sq[iu] = r * r;
  }
  return sq;
}

std::vector<double> constrained_values(const FbpinnState&, const PointLayout& layout,
                                       const SubdomainTerms& terms,
                                       std::span<const problem::ResidualInput> coarse) {
  const auto n = static_cast<long>(layout.size());
  std::vector<double> out(layout.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i)
    out[std::size_t(i)] = layout.c[std::size_t(i)] * assemble(layout, terms, coarse, std::size_t(i)).u;
  return out;
}

} // namespace fbpinn::kernels::omp
