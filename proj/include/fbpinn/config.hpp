#pragma once

// JSON run configuration for the command-line experiments.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbpinn/problem.hpp"
#include "fbpinn/schedule.hpp"
#include "fbpinn/trainer.hpp"

namespace fbpinn::config {

/// Validation failure; what() names the offending key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(key) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

struct ProblemBlock {
  std::string kind = "single_frequency"; // or two_frequency
  double omega = 15.0;
  double omega1 = 1.0;
  double omega2 = 15.0;
  double domain_a = -6.283185307179586;
  double domain_b = 6.283185307179586;
  std::string constraint = "hard"; // or soft
  double boundary_weight = 1.0;
};

struct DecompositionBlock {
  int subdomains = 16;
  double overlap_fraction = 0.7;
  std::string overlap_mode = "spacing"; // or width
  int collocation_points = 3000;
};

struct NetworkBlock {
  int hidden_layers = 2;
  int hidden_width = 16;
};

struct TrainingBlock {
  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  int p = 1;
  long rounds = 20000;
  long record_interval = 100;
  unsigned long long seed = 0;
  int eval_factor = 10;
  std::string execution = "openmp"; // or serial
  int threads = 0;                  // 0 keeps the OpenMP default
};

struct ScheduleBlock {
  std::string kind = "parallel"; // alternating, colored, explicit
  std::vector<std::vector<int>> colors;
  std::vector<std::vector<int>> sets;
};

struct CoarseBlock {
  bool enabled = false;
  int points = 500;
  long epochs = 3000;
  int hidden_layers = 2;
  int hidden_width = 16;
};

struct SweepBlock {
  std::vector<int> subdomains{8, 16, 32};
  std::vector<int> p{1, 10, 100, 1000};
  long steps = 20000;
};

struct RunConfig {
  ProblemBlock problem;
  DecompositionBlock decomposition;
  NetworkBlock network;
  TrainingBlock training;
  ScheduleBlock schedule;
  CoarseBlock coarse;
  SweepBlock sweep;
  std::optional<std::string> output_dir;
};

/// Parses and validates; unknown keys and invalid values raise ConfigError.
RunConfig parse(const nlohmann::json& j);
RunConfig load(const std::filesystem::path& path);

/// Every effective value, defaults included.
nlohmann::json to_json(const RunConfig& c);

problem::OdeProblem make_problem(const RunConfig& c);
FbpinnConfig make_fbpinn_config(const RunConfig& c);
schedule::Schedule make_schedule(const RunConfig& c);

/// Output directory: override, else config, else $FBPINN_OUTPUT_ROOT, else
/// "fbpinn_out".
std::filesystem::path resolve_output_dir(const RunConfig& c,
                                         const std::optional<std::string>& override_dir);

} // namespace fbpinn::config
