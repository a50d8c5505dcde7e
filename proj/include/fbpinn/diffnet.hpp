#pragma once

// Small dense tanh networks R -> R with exact input derivatives and exact
// parameter gradients of losses that depend on both u and du/dx.
//
// Differentiation is forward-mode in the input (a value/tangent pair carried
// through every layer) nested inside a hand-written reverse sweep over the
// parameters. The reverse sweep differentiates the tangent path too, so the
// mixed derivative d2u/(dx dtheta) is exact.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fbpinn/errors.hpp"

namespace fbpinn::diffnet {

struct LayerShape {
  int in = 0;
  int out = 0;
  std::size_t weight_offset = 0; // row-major out x in
  std::size_t bias_offset = 0;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Parameters of one network, stored flat: layer by layer, weights
/// (row-major, out x in) followed by biases. Hidden layers use tanh, the
/// output layer is affine.
class MlpParams {
public:
  MlpParams() = default;
  explicit MlpParams(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  const std::vector<LayerShape>& layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;

  bool same_shape(const MlpParams& other) const noexcept { return sizes_ == other.sizes_; }
  bool all_finite() const noexcept;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;

private:
  std::vector<int> sizes_;
  std::vector<LayerShape> layers_;
  std::vector<double> values_;
};

/// Same shape and identical bit patterns in every entry.
bool bitwise_equal(const MlpParams& a, const MlpParams& b) noexcept;

/// dL/dtheta, laid out exactly like the MlpParams it differentiates.
using ParamGradient = MlpParams;

struct EvalResult {
  double value = 0.0;
  double dvalue_dx = 0.0;
};

/// Loss contribution of one point, and its partial derivatives with
/// respect to the network value and the network input derivative.
struct PointLoss {
  double loss = 0.0;
  double d_value = 0.0;
  double d_dvalue_dx = 0.0;
};

struct LossGradient {
  double loss = 0.0;
  ParamGradient grad;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// layer_sizes must start and end with 1 and contain at least one hidden layer,
/// except for the degenerate affine map [1, 1].
MlpParams init_params(const std::vector<int>& layer_sizes, unsigned long long seed);

/// Hidden layer sizes -> full size list [1, h, ..., h, 1].
std::vector<int> mlp_layer_sizes(int hidden_layers, int hidden_width);

/// Reusable scratch for batched passes. Not shareable between threads.
class Workspace {
public:
  void reserve(const MlpParams& params, std::size_t points);

  std::size_t points = 0;
  /// Per layer, out x 2n row-major: [activation | d activation / d x_hat].
  std::vector<std::vector<double>> state;
  /// Per hidden layer, out x n: d(pre-activation) / d x_hat.
  std::vector<std::vector<double>> pre_tangent;
  std::vector<double> adjoint, adjoint_prev; // widest x 2n
  std::vector<double> seed_value, seed_dvalue;
};

EvalResult eval_with_input_derivative(const MlpParams& params, double x_hat);

/// Batched forward pass. value and dvalue_dx must have x_hat.size() entries.
void eval_batch(const MlpParams& params, std::span<const double> x_hat,
                std::span<double> value, std::span<double> dvalue_dx, Workspace& ws);

/// Forward pass that keeps intermediates in ws for a following backward_batch.
void forward_batch(const MlpParams& params, std::span<const double> x_hat, Workspace& ws);

/// Output value / input derivative of point i after forward_batch.
inline EvalResult forward_output(const Workspace& ws, std::size_t i) {
  return {ws.state.back()[i], ws.state.back()[ws.points + i]};
}

/// Accumulates into grad the parameter gradient of sum_i
/// (seed_value[i] * u_i + seed_dvalue[i] * du_i/dx_hat), using the
/// intermediates of the last forward_batch.
void backward_batch(const MlpParams& params, std::span<const double> x_hat, Workspace& ws,
                    ParamGradient& grad);

void zero(ParamGradient& grad);

/// Accumulated loss over x_hat and its exact parameter gradient (written to
/// grad, overwriting). per_point(i, EvalResult) -> PointLoss is called once per
/// point, in order. Non-finite contributions raise NumericalFailure carrying
/// the offending input.
template <class PerPoint>
double loss_gradient(const MlpParams& params, std::span<const double> x_hat, PerPoint&& per_point,
                     ParamGradient& grad, Workspace& ws) {
  forward_batch(params, x_hat, ws);
  double loss = 0.0;
  for (std::size_t i = 0; i < x_hat.size(); ++i) {
    const PointLoss pl = per_point(i, forward_output(ws, i));
    if (!std::isfinite(pl.loss) || !std::isfinite(pl.d_value) || !std::isfinite(pl.d_dvalue_dx))
      throw NumericalFailure("non-finite loss contribution", x_hat[i]);
    loss += pl.loss;
    ws.seed_value[i] = pl.d_value;
    ws.seed_dvalue[i] = pl.d_dvalue_dx;
  }
  if (!std::isfinite(loss))
    throw NumericalFailure("non-finite accumulated loss", x_hat.empty() ? 0.0 : x_hat.back());
  if (!grad.same_shape(params)) grad = ParamGradient(params.layer_sizes());
  zero(grad);
  backward_batch(params, x_hat, ws, grad);
  return loss;
}

template <class PerPoint>
LossGradient loss_gradient(const MlpParams& params, std::span<const double> x_hat,
                           PerPoint&& per_point) {
  Workspace ws;
  LossGradient out{0.0, ParamGradient(params.layer_sizes())};
  out.loss = loss_gradient(params, x_hat, per_point, out.grad, ws);
  return out;
}

} // namespace fbpinn::diffnet
