#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fbpinn/decomp.hpp"
#include "fbpinn/diffnet.hpp"
#include "fbpinn/trainer.hpp"

namespace fbpinn::io {

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// [{"in": n, "out": m, "weights": [row-major], "bias": [...]}, ...]
nlohmann::json params_to_json(const diffnet::MlpParams& params);
/// Inverse of params_to_json; rejects non-chaining layers and non-finite values.
diffnet::MlpParams params_from_json(const nlohmann::json& j);

nlohmann::json decomposition_to_json(const decomp::Decomposition& d);
nlohmann::json loss_to_json(const LossBreakdown& loss);

/// step,round,total,interior,overlap,l2_error; only records with the given
/// phase (or all when phase < 0).
void write_loss_history_csv(const std::filesystem::path& path, const RunReport& report,
                            int phase = -1);
/// x,u_pred,u_exact
void write_solution_csv(const std::filesystem::path& path, const RunReport& report);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace fbpinn::io
