#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "frailty_vb/dataset.hpp"
#include "frailty_vb/model.hpp"

namespace frailty_vb {

/// log T = x'beta + gamma_i + b * eps, eps standard logistic,
/// x = (1, x1 ~ N(1, 0.2^2), x2 ~ Bernoulli(0.5)), gamma_i ~ N(0, sigma2),
/// C ~ U(0, d), t = min(T, C).
struct ScenarioSpec {
  std::size_t K = 80;
  std::size_t n = 50;
  Eigen::VectorXd beta_true = Eigen::Vector3d(0.5, 0.2, 0.8);
  double b_true = 0.8;
  double sigma2_true = 1.0;
  double censor_upper = 48.0;
  std::uint64_t seed = 1;
  std::size_t replicates = 100;

  /// Throws ValidationError. beta_true must have length 3 (intercept, x1, x2).
  void validate() const;
};

struct GeneratedSample {
  std::vector<RawRow> rows;
  std::vector<double> event_times;   // T
  std::vector<double> censor_times;  // C
  std::vector<double> frailties;     // gamma_i, one per cluster
};

GeneratedSample generate_sample(const ScenarioSpec& spec, std::size_t replicate);
ClusteredDataset generate_dataset(const ScenarioSpec& spec, std::size_t replicate);

/// Seed of grid cell (K, n) derived from the base seed.
std::uint64_t scenario_seed(std::uint64_t seed, std::size_t K, std::size_t n);

struct ParameterMetrics {
  std::string name;
  double truth = 0.0;
  double bias = 0.0;
  double sd = 0.0;  // NaN when fewer than two replicates
  double mse = 0.0;
  double cr = 0.0;
  std::size_t count = 0;
};

/// Empirical bias, sample SD, MSE and coverage from per-replicate estimates.
ParameterMetrics aggregate_parameter(std::string name, double truth, const std::vector<double>& estimates,
                                     const std::vector<bool>& covered);

struct ReplicateOutcome {
  bool ok = false;
  bool converged = false;
  std::size_t iterations = 0;
  double seconds = 0.0;
  std::string error;
  std::vector<double> estimates;  // beta_1, beta_2, b, sigma2_gamma
  std::vector<bool> covered;
};

struct ReplicateMetrics {
  std::size_t K = 0;
  std::size_t n = 0;
  std::vector<ParameterMetrics> parameters;  // beta_1, beta_2, b, sigma2_gamma
  std::vector<ReplicateOutcome> outcomes;
  std::size_t failed = 0;
  std::size_t converged = 0;
  double total_seconds = 0.0;
};

struct SimulationOptions {
  double delta = 0.01;
  std::size_t max_iter = 100;
  std::size_t threads = 0;  // 0: FRAILTY_VB_THREADS or hardware concurrency
};

/// Worker count: FRAILTY_VB_THREADS if set, else hardware concurrency, capped by `work`.
std::size_t worker_count(std::size_t requested, std::size_t work);

/// Replicates run on a thread pool; results are aggregated in replicate order.
ReplicateMetrics run_replicates(const ScenarioSpec& spec, const Hyperparameters& hyper,
                                const SimulationOptions& options = {});

/// Cross product of K and n values; each cell uses scenario_seed(base.seed, K, n).
std::vector<ReplicateMetrics> scenario_grid(const std::vector<std::size_t>& K_set,
                                            const std::vector<std::size_t>& n_set, const ScenarioSpec& base,
                                            const Hyperparameters& hyper, const SimulationOptions& options = {});

/// Header `K,n,parameter,bias,sd,mse,cr,seconds`. `seconds` is NA unless with_timing.
void write_metrics_csv(std::ostream& os, const std::vector<ReplicateMetrics>& table, bool with_timing);

}  // namespace frailty_vb
