#include "fbpinn/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fbpinn::decomp {

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw std::invalid_argument("interval requires finite a < b");
}

Decomposition::Decomposition(Interval domain, int subdomains, double overlap_fraction,
                             OverlapMode mode)
    : domain_(domain), overlap_fraction_(overlap_fraction), mode_(mode) {
  if (subdomains < 1) throw std::invalid_argument("number of subdomains must be >= 1");
  if (!(overlap_fraction > 0.0 && overlap_fraction < 1.0))
    throw std::invalid_argument("overlap_fraction must lie in (0, 1)");

  spacing_ = domain.length() / subdomains;
  width_ = mode == OverlapMode::spacing ? spacing_ * (1.0 + overlap_fraction)
                                        : spacing_ / (1.0 - overlap_fraction);
  if (subdomains > 1 && width_ > 2.0 * spacing_) {
    std::ostringstream os;
    os << "triple overlap: overlap_fraction " << overlap_fraction
       << " gives subdomain width " << width_ << " > twice the spacing " << spacing_;
    throw std::invalid_argument(os.str());
  }

  subdomains_.resize(std::size_t(subdomains));
  for (int j = 0; j < subdomains; ++j) {
    Subdomain& s = subdomains_[std::size_t(j)];
    s.index = j;
    s.center = domain.a + (j + 0.5) * spacing_;
    s.clipped_left = j == 0;
    s.clipped_right = j == subdomains - 1;
    s.left = s.clipped_left ? domain.a : s.center - 0.5 * width_;
    s.right = s.clipped_right ? domain.b : s.center + 0.5 * width_;
  }
  for (auto& s : subdomains_) {
    for (const auto& o : subdomains_) {
      if (o.index == s.index) continue;
      if (std::max(s.left, o.left) <= std::min(s.right, o.right)) s.neighbors.push_back(o.index);
    }
  }
}

std::vector<int> Decomposition::containing(double x) const {
  std::vector<int> out;
  for (const auto& s : subdomains_)
    if (s.contains(x)) out.push_back(s.index);
  return out;
}

Ramp cosine_ramp(double t) noexcept {
  if (t <= 0.0) return {0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0};
  return {0.5 * (1.0 - std::cos(std::numbers::pi * t)),
          0.5 * std::numbers::pi * std::sin(std::numbers::pi * t)};
}

WindowValue raw_window(const Decomposition& d, int j, double x) {
  const Subdomain& s = d.subdomain(j);
  if (!s.contains(x)) return {};
  const double delta = d.ramp_width();
  Ramp left{1.0, 0.0};
  Ramp right{1.0, 0.0};
  if (!s.clipped_left) {
    left = cosine_ramp((x - s.left) / delta);
    left.derivative /= delta;
  }
  if (!s.clipped_right) {
    right = cosine_ramp((s.right - x) / delta);
    right.derivative = -right.derivative / delta;
  }
  return {left.value * right.value, left.derivative * right.value + left.value * right.derivative};
}

WindowValue window(const Decomposition& d, int j, double x) {
  const WindowValue own = raw_window(d, j, x);
  if (own.w == 0.0) return {};
  double sum = own.w;
  double dsum = own.dw_dx;
  for (int l : d.subdomain(j).neighbors) {
    const WindowValue r = raw_window(d, l, x);
    sum += r.w;
    dsum += r.dw_dx;
  }
  return {own.w / sum, (own.dw_dx * sum - own.w * dsum) / (sum * sum)};
}

std::vector<double> sample_collocation(const Interval& domain, int n) {
  if (n < 2) throw std::invalid_argument("need at least 2 collocation points");
  std::vector<double> x(static_cast<std::size_t>(n));
  const double step = domain.length() / (n - 1);
  for (int i = 0; i < n; ++i) x[std::size_t(i)] = domain.a + i * step;
  x.back() = domain.b;
  return x;
}

CollocationSets classify_points(const Decomposition& d, std::span<const double> points) {
  CollocationSets sets;
  sets.points.assign(points.begin(), points.end());
  const auto J = std::size_t(d.size());
  sets.members.resize(J);
  sets.interior.resize(J);
  sets.overlap.resize(J);
  sets.memberships.resize(points.size());

  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i];
    if (!d.domain().contains(x)) {
      std::ostringstream os;
      os << "collocation point " << x << " lies outside the domain [" << d.domain().a << ", "
         << d.domain().b << "]";
      throw std::invalid_argument(os.str());
    }
    for (int j : d.containing(x)) {
      sets.memberships[i].push_back({j, sets.members[std::size_t(j)].size()});
      sets.members[std::size_t(j)].push_back(i);
    }
  }
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t i : sets.members[j])
      (sets.is_overlap(i) ? sets.overlap[j] : sets.interior[j]).push_back(i);
  }
  return sets;
}

} // namespace fbpinn::decomp
