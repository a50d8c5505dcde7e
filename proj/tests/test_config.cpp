#include <doctest.h>

#include <cstdlib>

#include "fbpinn/config.hpp"

using namespace fbpinn;
using nlohmann::json;

namespace {

std::string error_key(const json& j) {
  try {
    config::parse(j);
  } catch (const config::ConfigError& e) {
    return e.key();
  }
  return "";
}

} // namespace

TEST_CASE("empty config yields the documented defaults") {
  const auto c = config::parse(json::object());
  CHECK(c.problem.kind == "single_frequency");
  CHECK(c.problem.omega == 15.0);
  CHECK(c.problem.domain_a == doctest::Approx(-6.283185307179586));
  CHECK(c.decomposition.subdomains == 16);
  CHECK(c.decomposition.overlap_fraction == 0.7);
  CHECK(c.decomposition.collocation_points == 3000);
  CHECK(c.network.hidden_layers == 2);
  CHECK(c.network.hidden_width == 16);
  CHECK(c.training.optimizer == "adam");
  CHECK(c.training.learning_rate == 1e-3);
  CHECK(c.coarse.points == 500);
  CHECK(c.coarse.epochs == 3000);
  CHECK(c.sweep.subdomains == std::vector<int>{8, 16, 32});
  CHECK(c.sweep.p == std::vector<int>{1, 10, 100, 1000});
}

TEST_CASE("unknown keys are rejected by full name") {
  CHECK(error_key({{"trainig", json::object()}}) == "trainig");
  CHECK(error_key({{"training", {{"lr", 0.1}}}}) == "training.lr");
  CHECK(error_key({{"coarse", {{"enable", true}}}}) == "coarse.enable");
}

TEST_CASE("invalid values name the offending key") {
  CHECK(error_key({{"training", {{"learning_rate", -1e-3}}}}) == "training.learning_rate");
  CHECK(error_key({{"training", {{"p", 0}}}}) == "training.p");
  CHECK(error_key({{"training", {{"rounds", "many"}}}}) == "training.rounds");
  CHECK(error_key({{"training", {{"optimizer", "rmsprop"}}}}) == "training.optimizer");
  CHECK(error_key({{"problem", {{"omega", 0.0}}}}) == "problem.omega");
  CHECK(error_key({{"problem", {{"domain", {1.0, 2.0}}}}}) == "problem.domain");
  CHECK(error_key({{"decomposition", {{"subdomains", 0}}}}) == "decomposition.subdomains");
  CHECK(error_key({{"decomposition", {{"overlap_fraction", 1.2}}}}) ==
        "decomposition.overlap_fraction");
  CHECK(error_key({{"decomposition", {{"overlap_mode", "width"}}}}) ==
        "decomposition.overlap_fraction");
  CHECK(error_key({{"schedule", {{"kind", "colored"}, {"colors", {{0, 1}}}}}}) ==
        "schedule.colors");
  CHECK(error_key({{"sweep", {{"steps", 1001}}}}) == "sweep.steps");
  CHECK(error_key({{"coarse", {{"points", 1}}}}) == "coarse.points");
}

TEST_CASE("config echo round-trips") {
  json in = {{"problem", {{"kind", "two_frequency"}, {"omega2", 9.0}}},
             {"decomposition", {{"subdomains", 5}}},
             {"schedule", {{"kind", "colored"}, {"colors", {{0, 2, 4}, {1, 3}}}}},
             {"training", {{"seed", 12}, {"p", 5}}},
             {"sweep", {{"steps", 10}, {"p", {1, 5}}}}};
  const auto c = config::parse(in);
  const auto echo = config::to_json(c);
  const auto again = config::parse(echo);
  CHECK(config::to_json(again) == echo);
  CHECK(echo["training"]["seed"] == 12);
  CHECK(echo["training"]["record_interval"] == 100);
  CHECK(echo["problem"]["omega2"] == 9.0);
}

TEST_CASE("output directory precedence") {
  auto c = config::parse(json::object());
  ::unsetenv("FBPINN_OUTPUT_ROOT");
  CHECK(config::resolve_output_dir(c, std::nullopt) == "fbpinn_out");
  ::setenv("FBPINN_OUTPUT_ROOT", "/tmp/from_env", 1);
  CHECK(config::resolve_output_dir(c, std::nullopt) == "/tmp/from_env");
  c.output_dir = "from_config";
  CHECK(config::resolve_output_dir(c, std::nullopt) == "from_config");
  CHECK(config::resolve_output_dir(c, std::string("from_flag")) == "from_flag");
  ::unsetenv("FBPINN_OUTPUT_ROOT");
}

TEST_CASE("config maps onto the trainer") {
  const auto c = config::parse({{"problem", {{"constraint", "soft"}, {"boundary_weight", 3.0}}},
                                {"training", {{"optimizer", "gd"}, {"execution", "serial"}}},
                                {"schedule", {{"kind", "alternating"}}},
                                {"decomposition", {{"subdomains", 4}}}});
  const auto p = config::make_problem(c);
  CHECK(p.constraint.kind == problem::ConstraintSpec::Kind::soft);
  CHECK(p.constraint.soft.at(0).weight == 3.0);
  const auto f = config::make_fbpinn_config(c);
  CHECK(f.optimizer.kind == OptimizerKind::gradient_descent);
  CHECK(f.execution == Execution::serial);
  CHECK_FALSE(f.coarse_network.has_value());
  CHECK(config::make_schedule(c).kind() == schedule::Kind::alternating);
}
