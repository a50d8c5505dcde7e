#include "fbpinn/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fbpinn::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json params_to_json(const diffnet::MlpParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < params.layers().size(); ++l) {
    const auto& s = params.layers()[l];
    const auto w = params.weights(l);
    const auto b = params.bias(l);
    layers.push_back({{"in", s.in},
                      {"out", s.out},
                      {"weights", std::vector<double>(w.begin(), w.end())},
                      {"bias", std::vector<double>(b.begin(), b.end())}});
  }
  return layers;
}

diffnet::MlpParams params_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("parameters: expected a non-empty array of layers");
  std::vector<int> sizes;
  for (std::size_t l = 0; l < j.size(); ++l) {
    const int in = j[l].at("in").get<int>();
    const int out = j[l].at("out").get<int>();
    if (l == 0) sizes.push_back(in);
    else if (sizes.back() != in)
      throw std::invalid_argument("parameters: layer " + std::to_string(l) + " does not chain");
    sizes.push_back(out);
  }
  diffnet::MlpParams params(sizes);
  for (std::size_t l = 0; l < j.size(); ++l) {
    const auto w = j[l].at("weights").get<std::vector<double>>();
    const auto b = j[l].at("bias").get<std::vector<double>>();
    auto pw = params.weights(l);
    auto pb = params.bias(l);
    if (w.size() != pw.size() || b.size() != pb.size())
      throw std::invalid_argument("parameters: layer " + std::to_string(l) + " has wrong sizes");
    std::copy(w.begin(), w.end(), pw.begin());
    std::copy(b.begin(), b.end(), pb.begin());
  }
  if (!params.all_finite()) throw std::invalid_argument("parameters: non-finite entry");
  return params;
}

nlohmann::json decomposition_to_json(const decomp::Decomposition& d) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : d.subdomains()) {
    subs.push_back({{"index", s.index},
                    {"left", s.left},
                    {"right", s.right},
                    {"center", s.center},
                    {"clipped_left", s.clipped_left},
                    {"clipped_right", s.clipped_right},
                    {"neighbors", s.neighbors}});
  }
  return {{"domain", {d.domain().a, d.domain().b}},
          {"overlap_fraction", d.overlap_fraction()},
          {"overlap_mode", d.overlap_mode() == decomp::OverlapMode::spacing ? "spacing" : "width"},
          {"spacing", d.spacing()},
          {"width", d.width()},
          {"window", {{"kind", "normalized_cosine_ramp"}, {"ramp_width", d.ramp_width()}}},
          {"subdomains", subs}};
}

nlohmann::json loss_to_json(const LossBreakdown& loss) {
  return {{"total", loss.total},
          {"interior", loss.interior},
          {"overlap", loss.overlap},
          {"boundary", loss.boundary}};
}

namespace {
std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}
} // namespace

void write_loss_history_csv(const std::filesystem::path& path, const RunReport& report, int phase) {
  auto out = open_out(path);
  out << "step,round,total,interior,overlap,l2_error\n";
  for (const auto& r : report.history) {
    if (phase >= 0 && r.phase != phase) continue;
    out << r.step << ',' << r.round << ',' << format_double(r.loss.total) << ','
        << format_double(r.loss.interior) << ',' << format_double(r.loss.overlap) << ','
        << format_double(r.l2_error) << '\n';
  }
}

void write_solution_csv(const std::filesystem::path& path, const RunReport& report) {
  auto out = open_out(path);
  out << "x,u_pred,u_exact\n";
  for (const auto& s : report.solution)
    out << format_double(s.x) << ',' << format_double(s.u_pred) << ',' << format_double(s.u_exact)
        << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

} // namespace fbpinn::io
