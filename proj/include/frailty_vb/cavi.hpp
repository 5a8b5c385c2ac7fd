#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "frailty_vb/dataset.hpp"
#include "frailty_vb/kernels.hpp"
#include "frailty_vb/model.hpp"
#include "frailty_vb/piecewise.hpp"

namespace frailty_vb {

/// q(beta) = N(mu, Sigma), q(gamma_i) = N(tau_i, sigma2_i),
/// q(b) = IG(alpha, omega), q(sigma2_gamma) = IG(lambda, eta).
struct VariationalState {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  Eigen::VectorXd tau;
  Eigen::VectorXd sigma2;
  double alpha = 0.0;
  double omega = 0.0;
  double lambda = 0.0;
  double eta = 0.0;
};

struct Expectations {
  double inv_b = 0.0;
  double inv_b_sq = 0.0;
  double log_b = 0.0;
  double inv_sigma2 = 0.0;
  double log_sigma2 = 0.0;

  static Expectations of(const VariationalState& state);
};

/// Surrogate coefficients evaluated at z = residual * scale with
/// residual = y - x'mu - tau. Held fixed while one block is updated.
struct SurrogateCoefficients {
  double scale = 0.0;
  std::vector<double> rho;
  std::vector<double> zeta;
  std::vector<double> phi;
};

/// E[1/b] under the current q(b), or the prior value alpha0 / omega0 while
/// q(b) still holds its initial values.
double plugin_scale(const VariationalState& state, const Hyperparameters& hyper, bool b_updated);

/// y - X mu - tau per observation.
std::vector<double> state_residuals(const ClusteredDataset& data, const VariationalState& state,
                                    const KernelSet& kernels = active_kernels());

SurrogateCoefficients plugin_coefficients(const ClusteredDataset& data, const VariationalState& state,
                                      double scale,
                                      const ApproximationTable& table = ApproximationTable::standard(),
                                      const KernelSet& kernels = active_kernels());

VariationalState init_state(const ClusteredDataset& data, const Hyperparameters& hyper);

struct BetaUpdate {
  Eigen::MatrixXd Sigma;
  Eigen::VectorXd mu;
};

/// Throws NumericalError(iteration) if the precision is not SPD.
BetaUpdate update_beta(const ClusteredDataset& data, const Hyperparameters& hyper,
                       const VariationalState& state, const Expectations& ex,
                       const SurrogateCoefficients& coeffs, std::size_t iteration = 0,
                       const KernelSet& kernels = active_kernels());

/// (tau_i, sigma2_i) given the current mu.
std::pair<double, double> update_gamma(const ClusteredDataset& data, const VariationalState& state,
                                       const Expectations& ex, const SurrogateCoefficients& coeffs,
                                       std::size_t cluster);

/// Throws NumericalError(iteration) when the new omega is not positive.
double update_b(const ClusteredDataset& data, const Hyperparameters& hyper,
                const VariationalState& state, const SurrogateCoefficients& coeffs,
                std::size_t iteration = 0, const KernelSet& kernels = active_kernels());

double update_sigma_gamma(const Hyperparameters& hyper, const VariationalState& state);

enum class Block { Beta, Gamma, B, SigmaGamma };

const char* to_string(Block block);

/// Applies one block update in place. Expectations are recomputed from state.
void apply_block(Block block, const ClusteredDataset& data, const Hyperparameters& hyper,
                 VariationalState& state, const SurrogateCoefficients& coeffs, std::size_t iteration = 0,
                 const KernelSet& kernels = active_kernels());

struct ElboTerms {
  double likelihood = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double b = 0.0;
  double sigma_gamma = 0.0;

  double total() const { return likelihood + beta + gamma + b + sigma_gamma; }
};

/// ELBO up to additive constants. The likelihood term uses the linear
/// surrogate with phi evaluated at residual * alpha / omega.
ElboTerms elbo_terms(const ClusteredDataset& data, const Hyperparameters& hyper,
                     const VariationalState& state,
                     const ApproximationTable& table = ApproximationTable::standard(),
                     const KernelSet& kernels = active_kernels());

/// Same, with phi held fixed.
ElboTerms elbo_terms(const ClusteredDataset& data, const Hyperparameters& hyper,
                     const VariationalState& state, const std::vector<double>& phi,
                     const KernelSet& kernels = active_kernels());

double compute_elbo(const ClusteredDataset& data, const Hyperparameters& hyper,
                    const VariationalState& state,
                    const ApproximationTable& table = ApproximationTable::standard());

struct FitOptions {
  double delta = 0.01;
  std::size_t max_iter = 100;
  const ApproximationTable* table = nullptr;  // standard when null
  const KernelSet* kernels = nullptr;         // active_kernels() when null
};

struct FitResult {
  VariationalState state;
  std::vector<double> elbo_trace;
  std::size_t iterations = 0;
  bool converged = false;
  double delta_used = 0.0;
  std::size_t event_count = 0;
};

/// Coordinate ascent. Each sweep updates beta, every gamma_i, b and
/// sigma2_gamma in turn, refreshing the surrogate coefficients before each
/// block, then evaluates the ELBO. Stops once |ELBO_m - ELBO_{m-1}| <= delta
/// (ELBO_0 = 0) or after max_iter sweeps.
FitResult fit(const ClusteredDataset& data, const Hyperparameters& hyper, const FitOptions& options = {});

}  // namespace frailty_vb
