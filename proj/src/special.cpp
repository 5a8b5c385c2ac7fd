#include "frailty_vb/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace frailty_vb {

namespace {

// Positive root of psi, split into a double and its residual.
constexpr double kRootHi = 1.4616321449683622;
constexpr double kRootLo = 9.549995429965697e-17;

// psi^(k)(root) / k!, k = 1..18
constexpr double kRootTaylor[] = {
    0.96767224544762117043,   -0.44276316898359210609,   0.25849976095565101062,
    -0.1639427054424065275,   0.10782405069126236576,    -0.072199561256454710926,
    0.048804288164143107225,  -0.033161126474847359292,  0.02259764823221810466,
    -0.015424765904948959139, 0.010538791616612175388,   -0.007204534386356868241,
    0.0049267813957298534464, -0.0033698016554393280828, 0.0023051263267349278369,
    -0.0015769367714301972593, 0.0010788252019162965807, -0.00073807093899600512957,
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error(std::string(what) + " must be positive and finite");
}

double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

constexpr int kMaxTerms = 100000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

// Modified Lentz on the continued fraction of Q(a, x).
double upper_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double step = d * c;
    h *= step;
    if (std::fabs(step - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

// Starting guesses only.
double normal_quantile_coarse(double prob) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < prob) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("digamma requires a positive finite argument");

  const double dx = (x - kRootHi) - kRootLo;
  if (std::fabs(dx) <= 0.1) {
    double acc = 0.0;
    for (int k = 17; k >= 0; --k) acc = acc * dx + kRootTaylor[k];
    return acc * dx;
  }

  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  const double tail =
      r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12))))));
  return shift + std::log(x) - 0.5 / x - tail;
}

double invgamma_mean_inv(double shape, double scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  return shape / scale;
}

double invgamma_mean_inv_sq(double shape, double scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  return (shape + shape * shape) / (scale * scale);
}

double invgamma_mean_log(double shape, double scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  return std::log(scale) - digamma(shape);
}

double regularized_gamma_p(double a, double x) {
  require_positive(a, "shape");
  if (std::isnan(x) || x < 0.0) throw std::domain_error("incomplete gamma requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? lower_series(a, x) : 1.0 - upper_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  require_positive(a, "shape");
  if (std::isnan(x) || x < 0.0) throw std::domain_error("incomplete gamma requires x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - lower_series(a, x) : upper_fraction(a, x);
}

double gamma_quantile(double shape, double prob) {
  require_positive(shape, "shape");
  if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("quantile probability must lie in (0, 1)");

  // Wilson-Hilferty start, then Newton steps kept inside a shrinking bracket.
  const double z = normal_quantile_coarse(prob);
  const double c = 1.0 / (9.0 * shape);
  double x = shape * std::pow(1.0 - c + z * std::sqrt(c), 3);
  if (!(x > 0.0) || !std::isfinite(x)) x = shape;

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 500; ++it) {
    const double f = regularized_gamma_p(shape, x) - prob;
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;
    const double density = std::exp((shape - 1.0) * std::log(x) - x - std::lgamma(shape));
    double next = x - f / density;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 4.0 * kEps * x) return next;
    x = next;
  }
  return x;
}

double invgamma_cdf(double shape, double scale, double x) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_q(shape, scale / x);
}

double invgamma_quantile(double shape, double scale, double prob) {
  require_positive(scale, "scale");
  return scale / gamma_quantile(shape, 1.0 - prob);
}

}  // namespace frailty_vb
