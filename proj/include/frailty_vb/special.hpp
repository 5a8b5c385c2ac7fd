#pragma once

namespace frailty_vb {

/// psi(x) for x > 0.
double digamma(double x);

// Moments of b ~ Inverse-Gamma(shape, scale).
double invgamma_mean_inv(double shape, double scale);     // E[1/b]
double invgamma_mean_inv_sq(double shape, double scale);  // E[1/b^2]
double invgamma_mean_log(double shape, double scale);     // E[log b]

/// Regularized lower / upper incomplete gamma P(a, x), Q(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// x with P(shape, x) = prob, unit scale.
double gamma_quantile(double shape, double prob);

double invgamma_cdf(double shape, double scale, double x);
double invgamma_quantile(double shape, double scale, double prob);

}  // namespace frailty_vb
