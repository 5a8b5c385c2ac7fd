#pragma once

#include <string>
#include <vector>

#include "frailty_vb/cavi.hpp"

namespace frailty_vb {

inline constexpr double kNormalQuantile975 = 1.959963984540054;

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Posterior mean with a 95% credible interval. Inverse-Gamma entries with
/// shape <= 1 have no mean and are marked unavailable.
struct Estimate {
  std::string name;
  double mean = 0.0;
  Interval interval;
  bool available = true;
};

struct PosteriorSummary {
  std::vector<Estimate> coefficients;
  Estimate b;
  Estimate sigma2_gamma;
  std::vector<Estimate> random_effects;
  double icc = 0.0;
  bool icc_available = true;
};

double intraclass_correlation(double sigma2_gamma, double b);

Estimate normal_estimate(std::string name, double mean, double variance);
Estimate invgamma_estimate(std::string name, double shape, double scale);

/// Names default to beta_0.. and the cluster index when not supplied.
PosteriorSummary summarize(const FitResult& result, const std::vector<std::string>& coefficient_names = {},
                           const std::vector<std::string>& cluster_labels = {});

PosteriorSummary summarize(const FitResult& result, const ClusteredDataset& data);

}  // namespace frailty_vb
