#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "fbpinn/diffnet.hpp"
#include "fbpinn/problem.hpp"
#include "fbpinn/trainer.hpp"

namespace testing {

inline double rel_err(double a, double b, double floor = 0.0) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Overwrites every weight and bias with U(-scale, scale), so biases are not
/// left at their zero initialisation.
inline void randomize(fbpinn::diffnet::MlpParams& params, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : params.values()) v = u(rng);
}

inline fbpinn::FbpinnConfig small_config(int J, int points, unsigned long long seed = 0) {
  fbpinn::FbpinnConfig cfg;
  cfg.subdomains = J;
  cfg.overlap_fraction = 0.5;
  cfg.collocation_points = points;
  cfg.network = {2, 4};
  cfg.seed = seed;
  cfg.record_interval = 1;
  cfg.eval_factor = 2;
  cfg.execution = fbpinn::Execution::serial;
  return cfg;
}

/// Small FBPINN on du/dx = cos(3x) over [-2, 2] with fully random parameters.
inline fbpinn::FbpinnState random_state(int J, int points, unsigned long long seed,
                                        fbpinn::Execution exec = fbpinn::Execution::serial) {
  auto cfg = small_config(J, points, seed);
  cfg.execution = exec;
  auto state = fbpinn::make_state(fbpinn::problem::make_single_frequency(3.0, {-2.0, 2.0}), cfg);
  std::mt19937_64 rng(seed + 1000);
  for (auto& p : state.params) randomize(p, rng);
  state.cache = fbpinn::refresh_overlap_cache(state);
  return state;
}

} // namespace testing
