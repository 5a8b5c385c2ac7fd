#pragma once

#include <array>
#include <span>

namespace frailty_vb {

struct QuadCoeffs {
  double rho = 0.0;
  double zeta = 0.0;
};

struct LinCoeff {
  double phi = 0.0;
};

/// Piecewise-constant coefficients of the two softplus surrogates
///   log(1 + e^z) ~ rho(z) z + zeta(z) z^2   and   log(1 + e^z) ~ phi(z) z.
/// Intervals are right-closed: a point on a break takes the left interval.
struct ApproximationTable {
  std::array<double, 4> quad_breaks;
  std::array<double, 5> rho;
  std::array<double, 5> zeta;
  std::array<double, 5> lin_breaks;
  std::array<double, 6> phi;

  static const ApproximationTable& standard();

  /// Throws ValidationError unless breaks are finite and strictly increasing.
  void validate() const;

  QuadCoeffs quad(double z) const;
  LinCoeff lin(double z) const;
};

/// Standard-table lookups. Non-finite z throws ValidationError.
QuadCoeffs quad_coeffs(double z);
LinCoeff lin_coeff(double z);

/// log(1 + e^z) without overflow.
double softplus(double z);

}  // namespace frailty_vb
