#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "frailty_vb/cavi.hpp"
#include "frailty_vb/dataset.hpp"
#include "frailty_vb/model.hpp"
#include "frailty_vb/piecewise.hpp"

namespace frailty_vb {

enum class Integrand { InvB, InvBSq, LogB };

const char* to_string(Integrand f);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// E[f(b)] for b ~ IG(shape, scale) by adaptive Gauss-Kronrod over log b.
/// Throws std::runtime_error when the error estimate exceeds 1e-10.
QuadratureResult quadrature_invgamma(double shape, double scale, Integrand f);

enum class ApproxKind { Linear, Quadratic };

struct ScanResult {
  double max_abs_error = 0.0;
  double argmax = 0.0;
};

/// sup |softplus(z) - surrogate(z)| over `points` equally spaced z in [lo, hi].
/// A single point is allowed when lo == hi.
ScanResult approx_error_scan(ApproxKind kind, double lo, double hi, std::size_t points,
                             const ApproximationTable& table = ApproximationTable::standard());

/// Reference scans of the standard table on [-5, 5] with 10^6 points.
inline constexpr double kQuadScanMaxError = 0.6996374493781253;
inline constexpr double kQuadScanArgmax = -1.0975060975060975;
inline constexpr double kLinScanMaxError = 0.6931462065620962;
inline constexpr double kLinScanArgmax = -5.000005000255214e-06;

struct TinyGridOptions {
  double beta_step = 0.12;
  double beta_sds = 4.0;  // half-width in prior standard deviations beyond data and prior mean
  std::size_t b_points = 60;
  double b_lo = 0.05;
  double b_hi = 20.0;
  std::size_t sigma2_points = 40;
  double sigma2_lo = 1e-3;
  double sigma2_hi = 1e2;
  double edge_tolerance = 1e-4;
  bool keep_density = true;
};

/// Exact posterior of (beta, b, sigma2_gamma) on a grid, random intercepts
/// integrated out numerically on the beta lattice.
struct TinyPosteriorGrid {
  std::vector<double> beta_axis;
  std::vector<double> b_axis;
  std::vector<double> sigma2_axis;
  std::vector<double> log_density;  // unnormalized, index (s * nb + j) * nbeta + k
  double log_normalizer = 0.0;
  double total_mass = 0.0;  // normalized grid mass, ~1
  double edge_mass = 0.0;   // normalized mass on the outermost cells of every axis
  double beta_mean = 0.0;
  double b_mean = 0.0;
  double sigma2_mean = 0.0;
  bool mass_contained = false;
};

/// Requires p == 1, K <= 2, n_i <= 3 and an uncensored observation in each
/// cluster. `mass_contained` is false when more than edge_tolerance of the
/// mass sits on the outermost cells.
TinyPosteriorGrid tiny_exact_posterior(const ClusteredDataset& data, const Hyperparameters& hyper,
                                       const TinyGridOptions& options = {});

/// Single cluster, intercept only, uncensored times e^1.5 and e^2.5.
ClusteredDataset designed_tiny_dataset();

/// Default priors except a diffuse coefficient prior (v0 = 0.01).
Hyperparameters designed_tiny_hyperparameters();

/// Fit settings for comparing against the grid: run to the fixed point.
FitOptions tiny_fit_options();

/// Objective maximized by the beta and gamma updates: the ELBO with the
/// quadratic surrogate in the likelihood, coefficients frozen.
double quadratic_surrogate(const ClusteredDataset& data, const Hyperparameters& hyper,
                           const VariationalState& state, const SurrogateCoefficients& coeffs);

/// compute_elbo with phi frozen; maximized by the b update.
double linear_surrogate(const ClusteredDataset& data, const Hyperparameters& hyper,
                        const VariationalState& state, const SurrogateCoefficients& coeffs);

struct BlockDelta {
  std::size_t sweep = 0;
  Block block = Block::Beta;
  double quadratic = 0.0;
  double linear = 0.0;
};

struct MonotonicityReport {
  bool ok = true;
  std::string failed_block;
  std::vector<BlockDelta> deltas;
};

/// Runs `sweeps` sweeps from `start`. Before each block the coefficients are
/// frozen at the plug-in values; the block must not lower its own objective
/// by more than 1e-9 * max(1, |objective|).
MonotonicityReport frozen_sweep_monotonicity(const ClusteredDataset& data, const Hyperparameters& hyper,
                                             const VariationalState& start, bool start_is_initial,
                                             std::size_t sweeps,
                                             const ApproximationTable& table = ApproximationTable::standard());

MonotonicityReport frozen_sweep_monotonicity(const ClusteredDataset& data, const Hyperparameters& hyper,
                                             std::size_t sweeps,
                                             const ApproximationTable& table = ApproximationTable::standard());

/// K in [1, 5], n_i in [1, 5], p = 3, drawn from the simulation model with
/// parameters varied by seed.
ClusteredDataset random_small_dataset(std::uint64_t seed);

}  // namespace frailty_vb
