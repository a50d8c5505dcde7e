// fbpinn: run, sweep and coarse-correction experiments from a JSON config.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fbpinn/config.hpp"
#include "fbpinn/experiments.hpp"

namespace {

int report_failure(const std::exception& e) {
  std::cerr << "fbpinn: " << e.what() << '\n';
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite basis PINNs trained as an overlapping Schwarz method"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    return sub;
  };
  auto* run_cmd = add("run", "one training run");
  auto* sweep_cmd = add("sweep", "subdomain count x communication interval grid");
  auto* coarse_cmd = add("coarse", "coarse network, then local networks");

  CLI11_PARSE(app, argc, argv);

  using namespace fbpinn;
  try {
    const auto cfg = config::load(config_path);
    const auto out = config::resolve_output_dir(cfg, out_dir);
    if (run_cmd->parsed()) {
      const auto r = experiments::run(cfg, out);
      std::cout << "final loss " << r.report.final->total << ", relative L2 error "
                << r.report.final_l2 << ", " << r.report.steps << " steps in "
                << r.report.wall_time << " s -> " << out.string() << '\n';
    } else if (sweep_cmd->parsed()) {
      const auto cells = experiments::sweep(cfg, out);
      int failed = 0;
      for (const auto& c : cells) {
        std::cout << "J=" << c.subdomains << " p=" << c.p << ": ";
        if (c.ok)
          std::cout << "final loss " << c.final_loss << ", L2 " << c.final_l2 << '\n';
        else {
          std::cout << "failed (" << c.error << ")\n";
          ++failed;
        }
      }
      std::cout << cells.size() - failed << "/" << cells.size() << " cells -> "
                << (out / "sweep_summary.csv").string() << '\n';
      return failed == 0 ? 0 : 2;
    } else if (coarse_cmd->parsed()) {
      const auto r = experiments::coarse(cfg, out);
      std::cout << "coarse vs low frequency L2 " << r.coarse_low_frequency_l2
                << ", combined L2 " << r.combined_l2 << " -> " << out.string() << '\n';
    }
  } catch (const config::ConfigError& e) {
    return report_failure(e);
  } catch (const NumericalFailure& e) {
    return report_failure(e);
  } catch (const std::exception& e) {
    return report_failure(e);
  }
  return 0;
}
