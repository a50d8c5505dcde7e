#pragma once

// First-order 1D ODE instances du/dx = f(x), their constraining operators and
// residuals.

#include <functional>
#include <span>
#include <vector>

#include "fbpinn/decomp.hpp"

namespace fbpinn::problem {

/// Value and x-derivative of a (pre- or post-constraint) solution at a point.
struct ResidualInput {
  double u = 0.0;
  double du_dx = 0.0;
};

/// Hard constraint [Cu](x) = c(x) u(x).
struct HardConstraint {
  std::function<double(double)> multiplier;
  std::function<double(double)> multiplier_derivative;
};

/// One soft boundary condition: sum over its points of
/// (weight / n_points) * (u(x) - target)^2.
struct BoundaryCondition {
  std::vector<double> points;
  std::vector<double> targets;
  double weight = 1.0;
};

struct ConstraintSpec {
  enum class Kind { hard, soft };
  Kind kind = Kind::hard;
  HardConstraint hard;
  std::vector<BoundaryCondition> soft;

  static ConstraintSpec tanh_hard();
  /// c(x) = 1: the ansatz is the raw network.
  static ConstraintSpec identity();
  /// u(0) = 0 imposed through the boundary loss with weight lambda.
  static ConstraintSpec soft_origin(double lambda);
};

struct OdeProblem {
  decomp::Interval domain;
  std::function<double(double)> rhs;
  std::vector<double> frequencies;
  std::function<double(double)> exact_solution;
  std::function<double(double)> exact_derivative;
  ConstraintSpec constraint;
};

/// du/dx = cos(omega x), u(0) = 0; u*(x) = sin(omega x) / omega.
OdeProblem make_single_frequency(double omega, decomp::Interval domain);

/// du/dx = w1 cos(w1 x) + w2 cos(w2 x), u(0) = 0; u*(x) = sin(w1 x) + sin(w2 x).
OdeProblem make_two_frequency(double omega1, double omega2, decomp::Interval domain);

/// Value and exact derivative of c(x) u(x) by the product rule. Only valid
/// for hard constraints.
ResidualInput apply_constraint(const ConstraintSpec& constraint, double x, ResidualInput raw);

/// N[u](x) - f(x) with N = d/dx.
double residual(const OdeProblem& problem, double x, ResidualInput constrained);

struct BoundarySample {
  double value = 0.0;
  double target = 0.0;
};

/// sum_k lambda_k / N_k sum_j (value - target)^2, one inner span per
/// boundary condition of the soft constraint.
double soft_boundary_loss(const ConstraintSpec& constraint,
                          std::span<const std::vector<BoundarySample>> boundary_evals);

} // namespace fbpinn::problem
