#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace frailty_vb {

/// Prior constants: beta ~ N(mu0, I/v0), b ~ IG(alpha0, omega0),
/// sigma2_gamma ~ IG(lambda0, eta0).
struct Hyperparameters {
  Eigen::VectorXd mu0;
  double v0 = 0.1;
  double alpha0 = 3.0;
  double omega0 = 2.0;
  double lambda0 = 3.0;
  double eta0 = 2.0;

  /// Weak-prior setting used throughout the simulation study.
  static Hyperparameters defaults(std::size_t p);

  /// Throws ValidationError unless every scalar is > 0 and mu0 has length p.
  void validate(std::size_t p) const;
};

}  // namespace frailty_vb
