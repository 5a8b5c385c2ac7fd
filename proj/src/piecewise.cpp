#include "frailty_vb/piecewise.hpp"

#include <cmath>

#include "frailty_vb/error.hpp"

namespace frailty_vb {

const ApproximationTable& ApproximationTable::standard() {
  static const ApproximationTable table{
      {-5.0, -1.7, 1.7, 5.0},
      {0.0, 0.1696, 0.5, 0.8303, 1.0},
      {0.0, 0.0189, 0.1138, 0.0190, 0.0},
      {-5.0, -1.701, 0.0, 1.702, 5.0},
      {0.0, 0.0426, 0.3052, 0.6950, 0.9574, 1.0},
  };
  return table;
}

namespace {

template <std::size_t N>
std::size_t interval_of(const std::array<double, N>& breaks, double z) {
  std::size_t k = 0;
  while (k < N && z > breaks[k]) ++k;
  return k;
}

template <std::size_t N>
void check_breaks(const std::array<double, N>& breaks) {
  for (std::size_t k = 0; k < N; ++k) {
    if (!std::isfinite(breaks[k]) || (k > 0 && !(breaks[k] > breaks[k - 1])))
      throw ValidationError(ValidationKind::MalformedInput, "approximation breaks must be finite and increasing");
  }
}

void check_finite(double z) {
  if (!std::isfinite(z)) throw ValidationError(ValidationKind::NonFiniteValue, "approximation argument is not finite");
}

}  // namespace

void ApproximationTable::validate() const {
  check_breaks(quad_breaks);
  check_breaks(lin_breaks);
}

QuadCoeffs ApproximationTable::quad(double z) const {
  check_finite(z);
  const std::size_t k = interval_of(quad_breaks, z);
  return {rho[k], zeta[k]};
}

LinCoeff ApproximationTable::lin(double z) const {
  check_finite(z);
  return {phi[interval_of(lin_breaks, z)]};
}

QuadCoeffs quad_coeffs(double z) { return ApproximationTable::standard().quad(z); }

LinCoeff lin_coeff(double z) { return ApproximationTable::standard().lin(z); }

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace frailty_vb
