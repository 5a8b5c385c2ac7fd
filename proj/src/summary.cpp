#include "frailty_vb/summary.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

#include "frailty_vb/special.hpp"

namespace frailty_vb {

double intraclass_correlation(double sigma2_gamma, double b) {
  return sigma2_gamma / (sigma2_gamma + b * b * std::numbers::pi * std::numbers::pi / 3.0);
}

Estimate normal_estimate(std::string name, double mean, double variance) {
  const double half = kNormalQuantile975 * std::sqrt(std::max(variance, 0.0));
  return {std::move(name), mean, {mean - half, mean + half}, true};
}

Estimate invgamma_estimate(std::string name, double shape, double scale) {
  Estimate e;
  e.name = std::move(name);
  e.interval = {invgamma_quantile(shape, scale, 0.025), invgamma_quantile(shape, scale, 0.975)};
  if (shape > 1.0) {
    e.mean = scale / (shape - 1.0);
  } else {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    e.available = false;
  }
  return e;
}

PosteriorSummary summarize(const FitResult& result, const std::vector<std::string>& coefficient_names,
                           const std::vector<std::string>& cluster_labels) {
  const VariationalState& s = result.state;
  PosteriorSummary out;
  for (Eigen::Index k = 0; k < s.mu.size(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    std::string name = uk < coefficient_names.size() ? coefficient_names[uk] : "beta_" + std::to_string(k);
    out.coefficients.push_back(normal_estimate(std::move(name), s.mu[k], s.Sigma(k, k)));
  }
  out.b = invgamma_estimate("b", s.alpha, s.omega);
  out.sigma2_gamma = invgamma_estimate("sigma2_gamma", s.lambda, s.eta);
  for (Eigen::Index i = 0; i < s.tau.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    std::string name = ui < cluster_labels.size() ? cluster_labels[ui] : std::to_string(i);
    out.random_effects.push_back(normal_estimate(std::move(name), s.tau[i], s.sigma2[i]));
  }
  out.icc_available = out.b.available && out.sigma2_gamma.available;
  out.icc = out.icc_available ? intraclass_correlation(out.sigma2_gamma.mean, out.b.mean)
                              : std::numeric_limits<double>::quiet_NaN();
  return out;
}

PosteriorSummary summarize(const FitResult& result, const ClusteredDataset& data) {
  return summarize(result, data.covariate_names(), data.cluster_labels());
}

}  // namespace frailty_vb
