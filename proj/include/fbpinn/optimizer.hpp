#pragma once

#include <span>
#include <string>
#include <vector>

namespace fbpinn {

enum class OptimizerKind { gradient_descent, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);

/// Per-network optimizer memory. Gradient descent ignores the moments.
class OptimizerState {
public:
  OptimizerState() = default;
  OptimizerState(const OptimizerConfig& config, std::size_t parameters);

  /// One update of params in place from grad.
  void step(std::span<double> params, std::span<const double> grad);

  long steps() const noexcept { return t_; }
  std::size_t size() const noexcept { return m_.size(); }
  const OptimizerConfig& config() const noexcept { return config_; }

private:
  OptimizerConfig config_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

} // namespace fbpinn
