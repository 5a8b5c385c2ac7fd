#include <doctest.h>

#include <cmath>
#include <limits>

#include "frailty_vb/error.hpp"
#include "frailty_vb/piecewise.hpp"

using namespace frailty_vb;

namespace {

void check_quad(double z, double rho, double zeta) {
  CAPTURE(z);
  const QuadCoeffs q = quad_coeffs(z);
  CHECK(q.rho == rho);
  CHECK(q.zeta == zeta);
}

}  // namespace

TEST_CASE("quadratic coefficients by interval") {
  check_quad(0.0, 0.5, 0.1138);
  check_quad(-6.0, 0.0, 0.0);
  check_quad(2.0, 0.8303, 0.0190);
  check_quad(-3.0, 0.1696, 0.0189);
  check_quad(7.0, 1.0, 0.0);
}

TEST_CASE("quadratic boundaries take the left interval") {
  check_quad(-5.0, 0.0, 0.0);
  check_quad(-1.7, 0.1696, 0.0189);
  check_quad(1.7, 0.5, 0.1138);
  check_quad(5.0, 0.8303, 0.0190);
  check_quad(std::nextafter(-5.0, 0.0), 0.1696, 0.0189);
  check_quad(std::nextafter(-1.7, 0.0), 0.5, 0.1138);
  check_quad(std::nextafter(1.7, 2.0), 0.8303, 0.0190);
  check_quad(std::nextafter(5.0, 6.0), 1.0, 0.0);
}

TEST_CASE("linear coefficient by interval and boundary") {
  CHECK(lin_coeff(-10.0).phi == 0.0);
  CHECK(lin_coeff(0.5).phi == 0.6950);
  CHECK(lin_coeff(10.0).phi == 1.0);
  CHECK(lin_coeff(-3.0).phi == 0.0426);
  CHECK(lin_coeff(-1.0).phi == 0.3052);
  CHECK(lin_coeff(3.0).phi == 0.9574);

  CHECK(lin_coeff(-5.0).phi == 0.0);
  CHECK(lin_coeff(-1.701).phi == 0.0426);
  CHECK(lin_coeff(0.0).phi == 0.3052);
  CHECK(lin_coeff(1.702).phi == 0.6950);
  CHECK(lin_coeff(5.0).phi == 0.9574);
  CHECK(lin_coeff(std::nextafter(0.0, 1.0)).phi == 0.6950);
  CHECK(lin_coeff(std::nextafter(1.7, 2.0)).phi == 0.6950);  // the linear table breaks at 1.702, not 1.7
}

TEST_CASE("coefficients are constant inside an interval") {
  const double breaks[] = {-1e9, -5.0, -1.7, 1.7, 5.0, 1e9};
  for (int k = 0; k + 1 < 6; ++k) {
    const QuadCoeffs ref = quad_coeffs(0.5 * (breaks[k] + breaks[k + 1]));
    for (int t = 1; t < 50; ++t) {
      const double z = breaks[k] + (breaks[k + 1] - breaks[k]) * t / 50.0;
      CHECK(quad_coeffs(z).rho == ref.rho);
      CHECK(quad_coeffs(z).zeta == ref.zeta);
    }
  }
}

TEST_CASE("non-finite arguments are rejected") {
  CHECK_THROWS_AS(quad_coeffs(std::numeric_limits<double>::quiet_NaN()), ValidationError);
  CHECK_THROWS_AS(lin_coeff(std::numeric_limits<double>::infinity()), ValidationError);
}

TEST_CASE("softplus is stable at both ends") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) == 0.0);
  CHECK(softplus(-10.0) == doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-15));
  for (double z = -30.0; z <= 30.0; z += 0.37) CHECK(softplus(z) - softplus(-z) == doctest::Approx(z).epsilon(1e-12));
}

TEST_CASE("table validation") {
  ApproximationTable t = ApproximationTable::standard();
  CHECK_NOTHROW(t.validate());
  t.quad_breaks[2] = -2.0;
  CHECK_THROWS_AS(t.validate(), ValidationError);
}
