#include "fbpinn/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fbpinn::schedule {

namespace {

void normalise_group(std::vector<int>& g, int subdomains, const char* what) {
  if (g.empty()) throw std::invalid_argument(std::string(what) + " contains an empty set");
  std::sort(g.begin(), g.end());
  if (std::adjacent_find(g.begin(), g.end()) != g.end())
    throw std::invalid_argument(std::string(what) + " repeats a subdomain index");
  if (g.front() < 0 || g.back() >= subdomains)
    throw std::invalid_argument(std::string(what) + " references an invalid subdomain index");
}

} // namespace

Schedule::Schedule(Kind kind, int subdomains, std::vector<std::vector<int>> groups)
    : kind_(kind), subdomains_(subdomains), groups_(std::move(groups)) {}

Schedule Schedule::parallel(int subdomains) {
  if (subdomains < 1) throw std::invalid_argument("schedule needs at least one subdomain");
  std::vector<int> all(static_cast<std::size_t>(subdomains));
  std::iota(all.begin(), all.end(), 0);
  return Schedule(Kind::parallel, subdomains, {all});
}

Schedule Schedule::alternating(int subdomains) {
  if (subdomains < 1) throw std::invalid_argument("schedule needs at least one subdomain");
  std::vector<std::vector<int>> groups;
  for (int j = 0; j < subdomains; ++j) groups.push_back({j});
  return Schedule(Kind::alternating, subdomains, std::move(groups));
}

Schedule Schedule::colored(int subdomains, std::vector<std::vector<int>> colors) {
  if (subdomains < 1) throw std::invalid_argument("schedule needs at least one subdomain");
  if (colors.empty()) throw std::invalid_argument("colored schedule needs at least one color");
  std::vector<int> seen(static_cast<std::size_t>(subdomains), 0);
  for (auto& c : colors) {
    normalise_group(c, subdomains, "color");
    for (int j : c) ++seen[std::size_t(j)];
  }
  for (int count : seen)
    if (count != 1)
      throw std::invalid_argument("colors must be pairwise disjoint and cover every subdomain");
  return Schedule(Kind::colored, subdomains, std::move(colors));
}

Schedule Schedule::explicit_sets(int subdomains, std::vector<std::vector<int>> sets) {
  if (subdomains < 1) throw std::invalid_argument("schedule needs at least one subdomain");
  if (sets.empty()) throw std::invalid_argument("explicit schedule needs at least one set");
  for (auto& s : sets) normalise_group(s, subdomains, "explicit schedule");
  return Schedule(Kind::explicit_sets, subdomains, std::move(sets));
}

ActiveSet Schedule::active_set(long round) const {
  if (round < 0) throw std::invalid_argument("round must be non-negative");
  const auto n = static_cast<long>(groups_.size());
  return {round, groups_[std::size_t(round % n)]};
}

} // namespace fbpinn::schedule
