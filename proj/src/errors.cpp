#include "fbpinn/errors.hpp"

#include <sstream>

namespace fbpinn {

namespace {
std::string describe(const std::string& what, double point, std::optional<int> subdomain,
                     std::optional<long> step) {
  std::ostringstream os;
  os << what << " at x=" << point;
  if (subdomain) os << " (subdomain " << *subdomain << ")";
  if (step) os << " (step " << *step << ")";
  return os.str();
}
} // namespace

NumericalFailure::NumericalFailure(std::string what, double point, std::optional<int> subdomain,
                                   std::optional<long> step)
    : std::runtime_error(describe(what, point, subdomain, step)), base_(std::move(what)),
      point_(point), subdomain_(subdomain), step_(step) {}

NumericalFailure NumericalFailure::with_context(std::optional<int> subdomain,
                                                std::optional<long> step) const {
  return NumericalFailure(base_, point_, subdomain ? subdomain : subdomain_, step ? step : step_);
}

} // namespace fbpinn
