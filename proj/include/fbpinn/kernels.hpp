#pragma once

// Data-parallel kernels behind the trainer. serial:: is the reference
// implementation; omp:: distributes the same per-subdomain / per-point work
// over OpenMP threads. Both produce bitwise-identical results: every
// reduction runs serially in a fixed order after the parallel part.

#include <span>
#include <vector>

#include "fbpinn/trainer.hpp"

namespace fbpinn::kernels {

/// Loss of one residual term and its seeds for the network value and the
/// network derivative with respect to its normalised input.
///   pre-constraint pair:  P = (w u + cv,  dw u + w s du + cd)
///   constrained slope:    D = dc P.u + c P.du,  r = D - f,  loss = r^2 / n
inline diffnet::PointLoss residual_term(double u, double du_hat, double w, double dw, double s,
                                        double cv, double cd, double c, double dc, double f,
                                        double inv_n) {
  const double pv = w * u + cv;
  const double pd = dw * u + w * s * du_hat + cd;
  const double r = dc * pv + c * pd - f;
  const double g_pv = 2.0 * r * dc * inv_n;
  const double g_pd = 2.0 * r * c * inv_n;
  return {r * r * inv_n, g_pv * w + g_pd * dw, g_pd * w * s};
}

/// Soft boundary term weight * (c (w u + cv) - target)^2.
inline diffnet::PointLoss boundary_term(double u, double w, double cv, double c, double target,
                                        double weight) {
  const double r = c * (w * u + cv) - target;
  return {weight * r * r, 2.0 * weight * r * c * w, 0.0};
}

/// Terms of subdomain j at its points of layout (all of them, or only its
/// overlap points when overlap_only; other entries are left untouched).
void subdomain_terms_one(const FbpinnState& state, const PointLayout& layout, int j,
                         bool overlap_only, std::vector<double>& value,
                         std::vector<double>& dvalue, diffnet::Workspace& ws);

/// Pre-constraint global pair at point i of layout.
problem::ResidualInput assemble(const PointLayout& layout, const SubdomainTerms& terms,
                                std::span<const problem::ResidualInput> coarse, std::size_t i);

/// steps optimizer steps on theta_j against state.cache.
void local_steps_one(FbpinnState& state, int j, int steps, diffnet::Workspace& ws,
                     diffnet::ParamGradient& grad);

namespace serial {
SubdomainTerms terms(const FbpinnState& state, const PointLayout& layout, bool overlap_only);
void local_steps(FbpinnState& state, std::span<const int> active, int steps);
/// Squared residual (before 1/N) at every collocation point.
std::vector<double> squared_residuals(const FbpinnState& state, const SubdomainTerms& terms);
/// Constrained solution at every point of layout.
std::vector<double> constrained_values(const FbpinnState& state, const PointLayout& layout,
                                       const SubdomainTerms& terms,
                                       std::span<const problem::ResidualInput> coarse);
} // namespace serial

namespace omp {
SubdomainTerms terms(const FbpinnState& state, const PointLayout& layout, bool overlap_only);
void local_steps(FbpinnState& state, std::span<const int> active, int steps);
std::vector<double> squared_residuals(const FbpinnState& state, const SubdomainTerms& terms);
std::vector<double> constrained_values(const FbpinnState& state, const PointLayout& layout,
                                       const SubdomainTerms& terms,
                                       std::span<const problem::ResidualInput> coarse);
} // namespace omp

} // namespace fbpinn::kernels

namespace fbpinn::kernels {

/// local_loss (and, when grad is non-null, its gradient) using a caller-owned
/// workspace. per_point, when non-null, receives each collocation point's
/// contribution aligned with LocalPoints.
double local_loss_impl(const FbpinnState& state, int j, const OverlapCache& cache,
                       diffnet::ParamGradient* grad, diffnet::Workspace& ws,
                       std::vector<double>* per_point = nullptr);

} // namespace fbpinn::kernels
