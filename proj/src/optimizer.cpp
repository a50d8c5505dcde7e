#include "fbpinn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace fbpinn {

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "gd" || name == "sgd") return OptimizerKind::gradient_descent;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected adam or gd)");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "gd";
}

OptimizerState::OptimizerState(const OptimizerConfig& config, std::size_t parameters)
    : config_(config) {
  if (config.kind == OptimizerKind::adam) {
    m_.assign(parameters, 0.0);
    v_.assign(parameters, 0.0);
  }
}

void OptimizerState::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw std::invalid_argument("gradient/parameter size mismatch");
  ++t_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::gradient_descent) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    return;
  }
  if (m_.size() != params.size()) throw std::invalid_argument("optimizer state shape mismatch");
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(t_));
  const double c2 = 1.0 - std::pow(b2, double(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
  }
}

} // namespace fbpinn
