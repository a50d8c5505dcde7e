#include "fbpinn/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace fbpinn::config {

namespace {

using nlohmann::json;

class Reader {
public:
  Reader(const json& j, std::string path, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, value] : j_.items())
      if (!allowed.count(key)) throw ConfigError(name(key), "unknown key");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& at(const std::string& key) const { return j_.at(key); }

  template <class T>
  void get(const std::string& key, T& out) const {
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(name(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(name(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.get<long long>() < 0) throw ConfigError(name(key), "must be non-negative");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(name(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(name(key), "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name(key), e.what());
    }
  }

private:
  const json& j_;
  std::string path_;
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

std::vector<std::vector<int>> int_sets(const json& v, const std::string& key) {
  try {
    return v.get<std::vector<std::vector<int>>>();
  } catch (const json::exception&) {
    throw ConfigError(key, "expected an array of integer arrays");
  }
}

} // namespace

RunConfig parse(const json& j) {
  RunConfig c;
  Reader root(j, "", {"problem", "decomposition", "network", "training", "schedule", "coarse",
                      "sweep", "output_dir"});

  if (root.has("problem")) {
    Reader r(root.at("problem"), "problem",
             {"kind", "omega", "omega1", "omega2", "domain", "constraint", "boundary_weight"});
    auto& b = c.problem;
    r.get("kind", b.kind);
    r.get("omega", b.omega);
    r.get("omega1", b.omega1);
    r.get("omega2", b.omega2);
    r.get("constraint", b.constraint);
    r.get("boundary_weight", b.boundary_weight);
    if (r.has("domain")) {
      const auto& d = r.at("domain");
      require(d.is_array() && d.size() == 2 && d[0].is_number() && d[1].is_number(),
              "problem.domain", "expected [a, b]");
      b.domain_a = d[0].get<double>();
      b.domain_b = d[1].get<double>();
    }
  }
  {
    const auto& b = c.problem;
    require(b.kind == "single_frequency" || b.kind == "two_frequency", "problem.kind",
            "expected single_frequency or two_frequency");
    require(std::isfinite(b.omega) && b.omega != 0.0, "problem.omega", "must be nonzero");
    require(std::isfinite(b.omega1) && b.omega1 != 0.0, "problem.omega1", "must be nonzero");
    require(std::isfinite(b.omega2) && b.omega2 != 0.0, "problem.omega2", "must be nonzero");
    require(std::isfinite(b.domain_a) && std::isfinite(b.domain_b) && b.domain_a < b.domain_b,
            "problem.domain", "need finite a < b");
    require(b.domain_a <= 0.0 && 0.0 <= b.domain_b, "problem.domain",
            "must contain x = 0 where u(0) = 0 is imposed");
    require(b.constraint == "hard" || b.constraint == "soft", "problem.constraint",
            "expected hard or soft");
    require(b.boundary_weight > 0.0, "problem.boundary_weight", "must be positive");
  }

  if (root.has("decomposition")) {
    Reader r(root.at("decomposition"), "decomposition",
             {"subdomains", "overlap_fraction", "overlap_mode", "collocation_points"});
    r.get("subdomains", c.decomposition.subdomains);
    r.get("overlap_fraction", c.decomposition.overlap_fraction);
    r.get("overlap_mode", c.decomposition.overlap_mode);
    r.get("collocation_points", c.decomposition.collocation_points);
  }
  require(c.decomposition.subdomains >= 1, "decomposition.subdomains", "must be >= 1");
  require(c.decomposition.overlap_fraction > 0.0 && c.decomposition.overlap_fraction < 1.0,
          "decomposition.overlap_fraction", "must lie in (0, 1)");
  require(c.decomposition.overlap_mode == "spacing" || c.decomposition.overlap_mode == "width",
          "decomposition.overlap_mode", "expected spacing or width");
  require(c.decomposition.collocation_points >= 2, "decomposition.collocation_points",
          "must be >= 2");

  if (root.has("network")) {
    Reader r(root.at("network"), "network", {"hidden_layers", "hidden_width"});
    r.get("hidden_layers", c.network.hidden_layers);
    r.get("hidden_width", c.network.hidden_width);
  }
  require(c.network.hidden_layers >= 1, "network.hidden_layers", "must be >= 1");
  require(c.network.hidden_width >= 1, "network.hidden_width", "must be >= 1");

  if (root.has("training")) {
    Reader r(root.at("training"), "training",
             {"optimizer", "learning_rate", "p", "rounds", "record_interval", "seed",
              "eval_factor", "execution", "threads"});
    auto& b = c.training;
    r.get("optimizer", b.optimizer);
    r.get("learning_rate", b.learning_rate);
    r.get("p", b.p);
    r.get("rounds", b.rounds);
    r.get("record_interval", b.record_interval);
    r.get("seed", b.seed);
    r.get("eval_factor", b.eval_factor);
    r.get("execution", b.execution);
    r.get("threads", b.threads);
  }
  {
    const auto& b = c.training;
    require(b.optimizer == "adam" || b.optimizer == "gd", "training.optimizer",
            "expected adam or gd");
    require(std::isfinite(b.learning_rate) && b.learning_rate >= 0.0, "training.learning_rate",
            "must be finite and non-negative");
    require(b.p >= 1, "training.p", "must be >= 1");
    require(b.rounds >= 1, "training.rounds", "must be >= 1");
    require(b.record_interval >= 1, "training.record_interval", "must be >= 1");
    require(b.eval_factor >= 1, "training.eval_factor", "must be >= 1");
    require(b.execution == "openmp" || b.execution == "serial", "training.execution",
            "expected openmp or serial");
    require(b.threads >= 0, "training.threads", "must be >= 0");
  }

  if (root.has("schedule")) {
    Reader r(root.at("schedule"), "schedule", {"kind", "colors", "sets"});
    r.get("kind", c.schedule.kind);
    if (r.has("colors")) c.schedule.colors = int_sets(r.at("colors"), "schedule.colors");
    if (r.has("sets")) c.schedule.sets = int_sets(r.at("sets"), "schedule.sets");
  }
  require(c.schedule.kind == "parallel" || c.schedule.kind == "alternating" ||
              c.schedule.kind == "colored" || c.schedule.kind == "explicit",
          "schedule.kind", "expected parallel, alternating, colored or explicit");
  if (c.schedule.kind == "colored" || c.schedule.kind == "explicit") {
    try {
      make_schedule(c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(c.schedule.kind == "colored" ? "schedule.colors" : "schedule.sets",
                        e.what());
    }
  }

  if (root.has("coarse")) {
    Reader r(root.at("coarse"), "coarse",
             {"enabled", "points", "epochs", "hidden_layers", "hidden_width"});
    r.get("enabled", c.coarse.enabled);
    r.get("points", c.coarse.points);
    r.get("epochs", c.coarse.epochs);
    r.get("hidden_layers", c.coarse.hidden_layers);
    r.get("hidden_width", c.coarse.hidden_width);
  }
  require(c.coarse.points >= 2, "coarse.points", "must be >= 2");
  require(c.coarse.epochs >= 0, "coarse.epochs", "must be >= 0");
  require(c.coarse.hidden_layers >= 1, "coarse.hidden_layers", "must be >= 1");
  require(c.coarse.hidden_width >= 1, "coarse.hidden_width", "must be >= 1");

  if (root.has("sweep")) {
    Reader r(root.at("sweep"), "sweep", {"subdomains", "p", "steps"});
    if (r.has("subdomains")) {
      try {
        c.sweep.subdomains = r.at("subdomains").get<std::vector<int>>();
      } catch (const json::exception&) {
        throw ConfigError("sweep.subdomains", "expected an array of integers");
      }
    }
    if (r.has("p")) {
      try {
        c.sweep.p = r.at("p").get<std::vector<int>>();
      } catch (const json::exception&) {
        throw ConfigError("sweep.p", "expected an array of integers");
      }
    }
    r.get("steps", c.sweep.steps);
  }
  require(!c.sweep.subdomains.empty(), "sweep.subdomains", "must be non-empty");
  for (int v : c.sweep.subdomains) require(v >= 1, "sweep.subdomains", "entries must be >= 1");
  require(!c.sweep.p.empty(), "sweep.p", "must be non-empty");
  for (int v : c.sweep.p) {
    require(v >= 1, "sweep.p", "entries must be >= 1");
    require(c.sweep.steps % v == 0, "sweep.steps", "must be divisible by every sweep.p entry");
  }
  require(c.sweep.steps >= 1, "sweep.steps", "must be >= 1");

  if (root.has("output_dir")) {
    std::string dir;
    root.get("output_dir", dir);
    c.output_dir = dir;
  }

  // Geometry is checked last so the message names the decomposition keys.
  try {
    decomp::Decomposition(decomp::Interval(c.problem.domain_a, c.problem.domain_b),
                          c.decomposition.subdomains, c.decomposition.overlap_fraction,
                          c.decomposition.overlap_mode == "spacing" ? decomp::OverlapMode::spacing
                                                                    : decomp::OverlapMode::width);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("decomposition.overlap_fraction", e.what());
  }
  return c;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse(j);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["problem"] = {{"kind", c.problem.kind},
                  {"omega", c.problem.omega},
                  {"omega1", c.problem.omega1},
                  {"omega2", c.problem.omega2},
                  {"domain", {c.problem.domain_a, c.problem.domain_b}},
                  {"constraint", c.problem.constraint},
                  {"boundary_weight", c.problem.boundary_weight}};
  j["decomposition"] = {{"subdomains", c.decomposition.subdomains},
                        {"overlap_fraction", c.decomposition.overlap_fraction},
                        {"overlap_mode", c.decomposition.overlap_mode},
                        {"collocation_points", c.decomposition.collocation_points}};
  j["network"] = {{"hidden_layers", c.network.hidden_layers},
                  {"hidden_width", c.network.hidden_width}};
  j["training"] = {{"optimizer", c.training.optimizer},
                   {"learning_rate", c.training.learning_rate},
                   {"p", c.training.p},
                   {"rounds", c.training.rounds},
                   {"record_interval", c.training.record_interval},
                   {"seed", c.training.seed},
                   {"eval_factor", c.training.eval_factor},
                   {"execution", c.training.execution},
                   {"threads", c.training.threads}};
  j["schedule"] = {{"kind", c.schedule.kind},
                   {"colors", c.schedule.colors},
                   {"sets", c.schedule.sets}};
  j["coarse"] = {{"enabled", c.coarse.enabled},
                 {"points", c.coarse.points},
                 {"epochs", c.coarse.epochs},
                 {"hidden_layers", c.coarse.hidden_layers},
                 {"hidden_width", c.coarse.hidden_width}};
  j["sweep"] = {{"subdomains", c.sweep.subdomains}, {"p", c.sweep.p}, {"steps", c.sweep.steps}};
  if (c.output_dir) j["output_dir"] = *c.output_dir;
  return j;
}

problem::OdeProblem make_problem(const RunConfig& c) {
  const decomp::Interval domain(c.problem.domain_a, c.problem.domain_b);
  auto p = c.problem.kind == "two_frequency"
               ? problem::make_two_frequency(c.problem.omega1, c.problem.omega2, domain)
               : problem::make_single_frequency(c.problem.omega, domain);
  if (c.problem.constraint == "soft")
    p.constraint = problem::ConstraintSpec::soft_origin(c.problem.boundary_weight);
  return p;
}

FbpinnConfig make_fbpinn_config(const RunConfig& c) {
  FbpinnConfig f;
  f.subdomains = c.decomposition.subdomains;
  f.overlap_fraction = c.decomposition.overlap_fraction;
  f.overlap_mode = c.decomposition.overlap_mode == "spacing" ? decomp::OverlapMode::spacing
                                                             : decomp::OverlapMode::width;
  f.collocation_points = c.decomposition.collocation_points;
  f.network = {c.network.hidden_layers, c.network.hidden_width};
  if (c.coarse.enabled) f.coarse_network = NetworkShape{c.coarse.hidden_layers, c.coarse.hidden_width};
  f.optimizer.kind = parse_optimizer_kind(c.training.optimizer);
  f.optimizer.learning_rate = c.training.learning_rate;
  f.seed = c.training.seed;
  f.p = c.training.p;
  f.record_interval = c.training.record_interval;
  f.eval_factor = c.training.eval_factor;
  f.execution = c.training.execution == "serial" ? Execution::serial : Execution::openmp;
  return f;
}

schedule::Schedule make_schedule(const RunConfig& c) {
  const int J = c.decomposition.subdomains;
  if (c.schedule.kind == "alternating") return schedule::Schedule::alternating(J);
  if (c.schedule.kind == "colored") return schedule::Schedule::colored(J, c.schedule.colors);
  if (c.schedule.kind == "explicit") return schedule::Schedule::explicit_sets(J, c.schedule.sets);
  return schedule::Schedule::parallel(J);
}

std::filesystem::path resolve_output_dir(const RunConfig& c,
                                         const std::optional<std::string>& override_dir) {
  if (override_dir) return *override_dir;
  if (c.output_dir) return *c.output_dir;
  if (const char* root = std::getenv("FBPINN_OUTPUT_ROOT"); root && *root) return root;
  return "fbpinn_out";
}

} // namespace fbpinn::config
