#pragma once

// Overlapping 1D decompositions, partition-of-unity windows and collocation
// point classification.

#include <cstddef>
#include <span>
#include <vector>

namespace fbpinn::decomp {

struct Interval {
  double a = 0.0;
  double b = 1.0;

  Interval() = default;
  Interval(double a_, double b_);
  double length() const noexcept { return b - a; }
  bool contains(double x) const noexcept { return a <= x && x <= b; }
};

/// How overlap_fraction maps to the subdomain width w given the center
/// spacing h = (b - a) / J.
enum class OverlapMode {
  spacing, // overlap width w - h = fraction * h
  width,   // overlap width w - h = fraction * w
};

struct Subdomain {
  int index = 0;
  double left = 0.0;
  double right = 0.0;
  double center = 0.0;   // unclipped center a + (j + 1/2) h
  bool clipped_left = false;
  bool clipped_right = false;
  std::vector<int> neighbors;

  bool contains(double x) const noexcept { return left <= x && x <= right; }
};

class Decomposition {
public:
  Decomposition(Interval domain, int subdomains, double overlap_fraction,
                OverlapMode mode = OverlapMode::spacing);

  const Interval& domain() const noexcept { return domain_; }
  int size() const noexcept { return static_cast<int>(subdomains_.size()); }
  const Subdomain& subdomain(int j) const { return subdomains_.at(std::size_t(j)); }
  const std::vector<Subdomain>& subdomains() const noexcept { return subdomains_; }
  double overlap_fraction() const noexcept { return overlap_fraction_; }
  OverlapMode overlap_mode() const noexcept { return mode_; }
  double spacing() const noexcept { return spacing_; }
  double width() const noexcept { return width_; }
  /// Length of the cosine ramp at each non-clipped subdomain edge; equals the
  /// pairwise overlap width.
  double ramp_width() const noexcept { return width_ - spacing_; }

  /// Subdomains whose closed interval contains x, ascending.
  std::vector<int> containing(double x) const;

private:
  Interval domain_;
  double overlap_fraction_;
  OverlapMode mode_;
  double spacing_;
  double width_;
  std::vector<Subdomain> subdomains_;
};

inline Decomposition build_decomposition(Interval domain, int subdomains, double overlap_fraction,
                                         OverlapMode mode = OverlapMode::spacing) {
  return Decomposition(domain, subdomains, overlap_fraction, mode);
}

/// C1 cosine ramp: 0 for t <= 0, 1 for t >= 1, (1 - cos(pi t)) / 2 between.
struct Ramp {
  double value;
  double derivative; // d/dt
};
Ramp cosine_ramp(double t) noexcept;

struct WindowValue {
  double w = 0.0;
  double dw_dx = 0.0;
};

/// Unnormalised window of subdomain j: product of the left and right ramps.
WindowValue raw_window(const Decomposition& d, int j, double x);

/// Normalised window omega_j(x) and its exact x-derivative. Zero (with zero
/// derivative) outside the closed subdomain; sums to one over j everywhere on
/// the domain.
WindowValue window(const Decomposition& d, int j, double x);

/// N equispaced points including both endpoints.
std::vector<double> sample_collocation(const Interval& domain, int n);

struct Membership {
  int subdomain = 0;
  std::size_t local = 0; // position in CollocationSets::members[subdomain]
};

struct CollocationSets {
  std::vector<double> points;
  /// X_j, X_j^int and X_j^o as indices into points (ascending).
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::vector<std::size_t>> interior;
  std::vector<std::vector<std::size_t>> overlap;
  /// For each point, the subdomains containing it.
  std::vector<std::vector<Membership>> memberships;

  /// True if the point lies in some X_j^o (equivalently, in two or more X_j).
  bool is_overlap(std::size_t point) const { return memberships[point].size() > 1; }
};

CollocationSets classify_points(const Decomposition& d, std::span<const double> points);

} // namespace fbpinn::decomp
