#pragma once

// Active-set policies for subdomain training rounds. Subdomain indices are
// zero-based.

#include <vector>

namespace fbpinn::schedule {

enum class Kind { parallel, alternating, colored, explicit_sets };

struct ActiveSet {
  long round = 0;
  std::vector<int> active; // ascending
};

class Schedule {
public:
  /// Every subdomain active every round (additive).
  static Schedule parallel(int subdomains);
  /// One subdomain per round, ascending, cycling (multiplicative).
  static Schedule alternating(int subdomains);
  /// Colors processed in the given order, cycling. Colors must be disjoint,
  /// non-empty and cover 0..J-1.
  static Schedule colored(int subdomains, std::vector<std::vector<int>> colors);
  /// Round r uses sets[r mod sets.size()]. Sets must be non-empty.
  static Schedule explicit_sets(int subdomains, std::vector<std::vector<int>> sets);

  Kind kind() const noexcept { return kind_; }
  int subdomains() const noexcept { return subdomains_; }
  const std::vector<std::vector<int>>& groups() const noexcept { return groups_; }

  ActiveSet active_set(long round) const;

private:
  Schedule(Kind kind, int subdomains, std::vector<std::vector<int>> groups);

  Kind kind_;
  int subdomains_;
  std::vector<std::vector<int>> groups_;
};

inline ActiveSet active_set(const Schedule& s, long round) { return s.active_set(round); }

} // namespace fbpinn::schedule
