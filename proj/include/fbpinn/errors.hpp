#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace fbpinn {

/// Raised when a loss, residual or gradient entry stops being finite.
/// Carries as much location information as the raising layer knows; outer
/// layers rethrow with the subdomain and step attached.
class NumericalFailure : public std::runtime_error {
public:
  explicit NumericalFailure(std::string what, double point,
                            std::optional<int> subdomain = std::nullopt,
                            std::optional<long> step = std::nullopt);

  double point() const noexcept { return point_; }
  std::optional<int> subdomain() const noexcept { return subdomain_; }
  std::optional<long> step() const noexcept { return step_; }

  NumericalFailure with_context(std::optional<int> subdomain,
                                std::optional<long> step) const;

private:
  std::string base_;
  double point_;
  std::optional<int> subdomain_;
  std::optional<long> step_;
};

} // namespace fbpinn
