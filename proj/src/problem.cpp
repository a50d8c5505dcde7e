#include "fbpinn/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace fbpinn::problem {

ConstraintSpec ConstraintSpec::tanh_hard() {
  ConstraintSpec c;
  c.kind = Kind::hard;
  c.hard.multiplier = [](double x) { return std::tanh(x); };
  c.hard.multiplier_derivative = [](double x) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  };
  return c;
}

ConstraintSpec ConstraintSpec::identity() {
  ConstraintSpec c;
  c.kind = Kind::hard;
  c.hard.multiplier = [](double) { return 1.0; };
  c.hard.multiplier_derivative = [](double) { return 0.0; };
  return c;
}

ConstraintSpec ConstraintSpec::soft_origin(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("boundary weight must be positive");
  ConstraintSpec c = identity();
  c.kind = Kind::soft;
  c.soft.push_back({{0.0}, {0.0}, lambda});
  return c;
}

namespace {
void require_origin(const decomp::Interval& domain) {
  if (!domain.contains(0.0))
    throw std::invalid_argument("domain must contain x = 0 where u(0) = 0 is imposed");
}
} // namespace

OdeProblem make_single_frequency(double omega, decomp::Interval domain) {
  if (omega == 0.0 || !std::isfinite(omega)) throw std::invalid_argument("omega must be nonzero");
  require_origin(domain);
  OdeProblem p;
  p.domain = domain;
  p.frequencies = {omega};
  p.rhs = [omega](double x) { return std::cos(omega * x); };
  p.exact_solution = [omega](double x) { return std::sin(omega * x) / omega; };
  p.exact_derivative = [omega](double x) { return std::cos(omega * x); };
  p.constraint = ConstraintSpec::tanh_hard();
  return p;
}

OdeProblem make_two_frequency(double omega1, double omega2, decomp::Interval domain) {
  if (omega1 == 0.0 || omega2 == 0.0 || !std::isfinite(omega1) || !std::isfinite(omega2))
    throw std::invalid_argument("frequencies must be nonzero");
  require_origin(domain);
  OdeProblem p;
  p.domain = domain;
  p.frequencies = {omega1, omega2};
  p.rhs = [=](double x) { return omega1 * std::cos(omega1 * x) + omega2 * std::cos(omega2 * x); };
  p.exact_solution = [=](double x) { return std::sin(omega1 * x) + std::sin(omega2 * x); };
  p.exact_derivative = p.rhs;
  p.constraint = ConstraintSpec::tanh_hard();
  return p;
}

ResidualInput apply_constraint(const ConstraintSpec& constraint, double x, ResidualInput raw) {
  if (constraint.kind != ConstraintSpec::Kind::hard)
    throw std::logic_error("apply_constraint requires a hard constraint");
  const double c = constraint.hard.multiplier(x);
  const double dc = constraint.hard.multiplier_derivative(x);
  return {c * raw.u, dc * raw.u + c * raw.du_dx};
}

double residual(const OdeProblem& problem, double x, ResidualInput constrained) {
  return constrained.du_dx - problem.rhs(x);
}

double soft_boundary_loss(const ConstraintSpec& constraint,
                          std::span<const std::vector<BoundarySample>> boundary_evals) {
  if (constraint.kind != ConstraintSpec::Kind::soft)
    throw std::logic_error("soft_boundary_loss requires a soft constraint");
  if (boundary_evals.empty() || boundary_evals.size() != constraint.soft.size())
    throw std::invalid_argument("one boundary sample set per boundary condition is required");
  double loss = 0.0;
  for (std::size_t k = 0; k < boundary_evals.size(); ++k) {
    const auto& samples = boundary_evals[k];
    if (samples.empty()) throw std::invalid_argument("empty boundary point set");
    double sum = 0.0;
    for (const auto& s : samples) sum += (s.value - s.target) * (s.value - s.target);
    loss += constraint.soft[k].weight / double(samples.size()) * sum;
  }
  return loss;
}

} // namespace fbpinn::problem
