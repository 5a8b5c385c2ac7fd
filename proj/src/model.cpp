#include "frailty_vb/model.hpp"

#include <cmath>
#include <string>

#include "frailty_vb/error.hpp"

namespace frailty_vb {

Hyperparameters Hyperparameters::defaults(std::size_t p) {
  Hyperparameters h;
  h.mu0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  return h;
}

void Hyperparameters::validate(std::size_t p) const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0.0))
      throw ValidationError(ValidationKind::InvalidHyperparameter, std::string(name) + " must be positive and finite");
  };
  check(v0, "v0");
  check(alpha0, "alpha0");
  check(omega0, "omega0");
  check(lambda0, "lambda0");
  check(eta0, "eta0");
  if (static_cast<std::size_t>(mu0.size()) != p)
    throw ValidationError(ValidationKind::DimensionMismatch,
                          "mu0 has length " + std::to_string(mu0.size()) + " but the design has " +
                              std::to_string(p) + " columns");
  if (!mu0.allFinite()) throw ValidationError(ValidationKind::InvalidHyperparameter, "mu0 must be finite");
}

}  // namespace frailty_vb
