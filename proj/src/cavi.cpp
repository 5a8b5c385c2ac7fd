#include "frailty_vb/cavi.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "frailty_vb/error.hpp"
#include "frailty_vb/special.hpp"

namespace frailty_vb {

Expectations Expectations::of(const VariationalState& s) {
  Expectations e;
  e.inv_b = invgamma_mean_inv(s.alpha, s.omega);
  e.inv_b_sq = invgamma_mean_inv_sq(s.alpha, s.omega);
  e.log_b = invgamma_mean_log(s.alpha, s.omega);
  e.inv_sigma2 = invgamma_mean_inv(s.lambda, s.eta);
  e.log_sigma2 = invgamma_mean_log(s.lambda, s.eta);
  return e;
}

double plugin_scale(const VariationalState& state, const Hyperparameters& hyper, bool b_updated) {
  return b_updated ? state.alpha / state.omega : hyper.alpha0 / hyper.omega0;
}

namespace {

std::vector<double> fixed_effect_residuals(const ClusteredDataset& data, const Eigen::VectorXd& mu,
                                           const KernelSet& kernels) {
  std::vector<double> r(data.size());
  kernels.residuals(data.log_times().data(), data.design().data(), data.size(), data.dimension(), mu.data(),
                    r.data());
  return r;
}

void subtract_intercepts(const ClusteredDataset& data, const Eigen::VectorXd& tau, std::vector<double>& r) {
  for (std::size_t i = 0; i < data.clusters(); ++i)
    for (std::size_t j = data.cluster_begin(i); j < data.cluster_end(i); ++j) r[j] -= tau[static_cast<Eigen::Index>(i)];
}

// w_j = (1 + delta_j) zeta_j,   a_j = -delta_j + (1 + delta_j) rho_j
struct QuadWeights {
  std::vector<double> w;
  std::vector<double> a;
};

QuadWeights quad_weights(const ClusteredDataset& data, const SurrogateCoefficients& c) {
  const auto ev = data.events();
  QuadWeights q{std::vector<double>(data.size()), std::vector<double>(data.size())};
  for (std::size_t j = 0; j < data.size(); ++j) {
    q.w[j] = (1.0 + ev[j]) * c.zeta[j];
    q.a[j] = -ev[j] + (1.0 + ev[j]) * c.rho[j];
  }
  return q;
}

// delta_j - (1 + delta_j) phi_j
std::vector<double> lin_weights(const ClusteredDataset& data, const std::vector<double>& phi) {
  const auto ev = data.events();
  std::vector<double> c(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) c[j] = ev[j] - (1.0 + ev[j]) * phi[j];
  return c;
}

void check_sizes(const ClusteredDataset& data, const SurrogateCoefficients& c) {
  if (c.rho.size() != data.size() || c.zeta.size() != data.size() || c.phi.size() != data.size())
    throw ValidationError(ValidationKind::DimensionMismatch, "coefficient vectors do not match the dataset");
}

void update_all_gammas(const ClusteredDataset& data, VariationalState& state, const Expectations& ex,
                       const SurrogateCoefficients& coeffs, const KernelSet& kernels) {
  const QuadWeights q = quad_weights(data, coeffs);
  const std::vector<double> rn = fixed_effect_residuals(data, state.mu, kernels);
  for (std::size_t i = 0; i < data.clusters(); ++i) {
    double sw = 0.0;
    double sg = 0.0;
    for (std::size_t j = data.cluster_begin(i); j < data.cluster_end(i); ++j) {
      sw += q.w[j];
      sg += ex.inv_b * q.a[j] + 2.0 * ex.inv_b_sq * q.w[j] * rn[j];
    }
    const double s2 = 1.0 / (ex.inv_sigma2 + 2.0 * ex.inv_b_sq * sw);
    state.sigma2[static_cast<Eigen::Index>(i)] = s2;
    state.tau[static_cast<Eigen::Index>(i)] = s2 * sg;
  }
}

bool state_finite(const VariationalState& s) {
  return s.mu.allFinite() && s.Sigma.allFinite() && s.tau.allFinite() && s.sigma2.allFinite() &&
         std::isfinite(s.omega) && std::isfinite(s.eta) && (s.sigma2.array() > 0.0).all() && s.eta > 0.0;
}

}  // namespace

std::vector<double> state_residuals(const ClusteredDataset& data, const VariationalState& state,
                                    const KernelSet& kernels) {
  std::vector<double> r = fixed_effect_residuals(data, state.mu, kernels);
  subtract_intercepts(data, state.tau, r);
  return r;
}

SurrogateCoefficients plugin_coefficients(const ClusteredDataset& data, const VariationalState& state, double scale,
                                      const ApproximationTable& table, const KernelSet& kernels) {
  const std::vector<double> r = state_residuals(data, state, kernels);
  SurrogateCoefficients c;
  c.scale = scale;
  c.rho.resize(data.size());
  c.zeta.resize(data.size());
  c.phi.resize(data.size());
  kernels.piecewise(r.data(), r.size(), scale, table, c.rho.data(), c.zeta.data(), c.phi.data());
  return c;
}

VariationalState init_state(const ClusteredDataset& data, const Hyperparameters& hyper) {
  const auto p = static_cast<Eigen::Index>(data.dimension());
  const auto K = static_cast<Eigen::Index>(data.clusters());
  hyper.validate(data.dimension());
  VariationalState s;
  s.alpha = hyper.alpha0 + static_cast<double>(data.event_count());
  s.lambda = hyper.lambda0 + 0.5 * static_cast<double>(K);
  s.omega = hyper.omega0;
  s.eta = hyper.eta0;
  s.mu = hyper.mu0;
  s.Sigma = Eigen::MatrixXd::Identity(p, p) / hyper.v0;
  s.tau = Eigen::VectorXd::Zero(K);
  s.sigma2 = Eigen::VectorXd::Constant(K, hyper.eta0 / s.lambda);
  return s;
}

BetaUpdate update_beta(const ClusteredDataset& data, const Hyperparameters& hyper, const VariationalState& state,
                       const Expectations& ex, const SurrogateCoefficients& coeffs, std::size_t iteration,
                       const KernelSet& kernels) {
  check_sizes(data, coeffs);
  const std::size_t n = data.size();
  const std::size_t p = data.dimension();
  const QuadWeights q = quad_weights(data, coeffs);
  const auto y = data.log_times();

  std::vector<double> g(n);
  for (std::size_t i = 0; i < data.clusters(); ++i) {
    const double t = state.tau[static_cast<Eigen::Index>(i)];
    for (std::size_t j = data.cluster_begin(i); j < data.cluster_end(i); ++j)
      g[j] = ex.inv_b * q.a[j] + 2.0 * ex.inv_b_sq * q.w[j] * (y[j] - t);
  }

  Eigen::MatrixXd precision(p, p);
  Eigen::VectorXd rhs(p);
  for (std::size_t k = 0; k < p; ++k) {
    const double* xk = data.column(k).data();
    for (std::size_t l = 0; l <= k; ++l) {
      const double v = 2.0 * ex.inv_b_sq * kernels.weighted_dot(q.w.data(), xk, data.column(l).data(), n);
      precision(k, l) = v;
      precision(l, k) = v;
    }
    precision(k, k) += hyper.v0;
    rhs[k] = hyper.v0 * hyper.mu0[k] + kernels.dot(g.data(), xk, n);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success || !precision.allFinite())
    throw NumericalError("beta precision is not positive definite", iteration);
  BetaUpdate out;
  out.mu = llt.solve(rhs);
  out.Sigma = llt.solve(Eigen::MatrixXd::Identity(p, p));
  out.Sigma = 0.5 * (out.Sigma + out.Sigma.transpose()).eval();
  return out;
}

std::pair<double, double> update_gamma(const ClusteredDataset& data, const VariationalState& state,
                                       const Expectations& ex, const SurrogateCoefficients& coeffs, std::size_t cluster) {
  check_sizes(data, coeffs);
  const auto ev = data.events();
  const auto y = data.log_times();
  double sw = 0.0;
  double sg = 0.0;
  for (std::size_t j = data.cluster_begin(cluster); j < data.cluster_end(cluster); ++j) {
    double rn = y[j];
    for (std::size_t k = 0; k < data.dimension(); ++k) rn -= data.covariate(j, k) * state.mu[static_cast<Eigen::Index>(k)];
    const double w = (1.0 + ev[j]) * coeffs.zeta[j];
    const double a = -ev[j] + (1.0 + ev[j]) * coeffs.rho[j];
    sw += w;
    sg += ex.inv_b * a + 2.0 * ex.inv_b_sq * w * rn;
  }
  const double s2 = 1.0 / (ex.inv_sigma2 + 2.0 * ex.inv_b_sq * sw);
  return {s2 * sg, s2};
}

double update_b(const ClusteredDataset& data, const Hyperparameters& hyper, const VariationalState& state,
                const SurrogateCoefficients& coeffs, std::size_t iteration, const KernelSet& kernels) {
  check_sizes(data, coeffs);
  const std::vector<double> r = state_residuals(data, state, kernels);
  const std::vector<double> c = lin_weights(data, coeffs.phi);
  const double omega = hyper.omega0 - kernels.dot(c.data(), r.data(), r.size());
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw NumericalError("omega update is not positive (" + std::to_string(omega) + ")", iteration);
  return omega;
}

double update_sigma_gamma(const Hyperparameters& hyper, const VariationalState& state) {
  return hyper.eta0 + 0.5 * (state.tau.squaredNorm() + state.sigma2.sum());
}

const char* to_string(Block block) {
  switch (block) {
    case Block::Beta: return "beta";
    case Block::Gamma: return "gamma";
    case Block::B: return "b";
    case Block::SigmaGamma: return "sigma2_gamma";
  }
  return "?";
}

void apply_block(Block block, const ClusteredDataset& data, const Hyperparameters& hyper, VariationalState& state,
                 const SurrogateCoefficients& coeffs, std::size_t iteration, const KernelSet& kernels) {
  const Expectations ex = Expectations::of(state);
  switch (block) {
    case Block::Beta: {
      BetaUpdate u = update_beta(data, hyper, state, ex, coeffs, iteration, kernels);
      state.Sigma = std::move(u.Sigma);
      state.mu = std::move(u.mu);
      break;
    }
    case Block::Gamma:
      check_sizes(data, coeffs);
      update_all_gammas(data, state, ex, coeffs, kernels);
      break;
    case Block::B:
      state.omega = update_b(data, hyper, state, coeffs, iteration, kernels);
      break;
    case Block::SigmaGamma:
      state.eta = update_sigma_gamma(hyper, state);
      break;
  }
}

ElboTerms elbo_terms(const ClusteredDataset& data, const Hyperparameters& hyper, const VariationalState& state,
                     const std::vector<double>& phi, const KernelSet& kernels) {
  if (phi.size() != data.size())
    throw ValidationError(ValidationKind::DimensionMismatch, "phi does not match the dataset");
  const Expectations ex = Expectations::of(state);
  const std::vector<double> r = state_residuals(data, state, kernels);
  const std::vector<double> c = lin_weights(data, phi);
  const double K = static_cast<double>(data.clusters());

  ElboTerms t;
  t.likelihood = -static_cast<double>(data.event_count()) * ex.log_b + ex.inv_b * kernels.dot(c.data(), r.data(), r.size());

  Eigen::LLT<Eigen::MatrixXd> llt(state.Sigma);
  const double log_det = llt.info() == Eigen::Success
                             ? 2.0 * llt.matrixLLT().diagonal().array().log().sum()
                             : std::numeric_limits<double>::quiet_NaN();
  t.beta = -0.5 * hyper.v0 * (state.Sigma.trace() + (state.mu - hyper.mu0).squaredNorm()) + 0.5 * log_det;

  const double second_moments = state.tau.squaredNorm() + state.sigma2.sum();
  t.gamma = -0.5 * K * ex.log_sigma2 - 0.5 * ex.inv_sigma2 * second_moments + 0.5 * state.sigma2.array().log().sum();

  t.b = (state.alpha - hyper.alpha0) * ex.log_b + (state.omega - hyper.omega0) * ex.inv_b -
        state.alpha * std::log(state.omega);
  t.sigma_gamma = (state.lambda - hyper.lambda0) * ex.log_sigma2 + (state.eta - hyper.eta0) * ex.inv_sigma2 -
                  state.lambda * std::log(state.eta);
  return t;
}

ElboTerms elbo_terms(const ClusteredDataset& data, const Hyperparameters& hyper, const VariationalState& state,
                     const ApproximationTable& table, const KernelSet& kernels) {
  const SurrogateCoefficients c = plugin_coefficients(data, state, state.alpha / state.omega, table, kernels);
  return elbo_terms(data, hyper, state, c.phi, kernels);
}

double compute_elbo(const ClusteredDataset& data, const Hyperparameters& hyper, const VariationalState& state,
                    const ApproximationTable& table) {
  return elbo_terms(data, hyper, state, table).total();
}

FitResult fit(const ClusteredDataset& data, const Hyperparameters& hyper, const FitOptions& options) {
  if (!(options.delta > 0.0))
    throw ValidationError(ValidationKind::InvalidHyperparameter, "delta must be positive");
  if (options.max_iter < 1) throw ValidationError(ValidationKind::InvalidHyperparameter, "max_iter must be at least 1");
  const ApproximationTable& table = options.table ? *options.table : ApproximationTable::standard();
  const KernelSet& kernels = options.kernels ? *options.kernels : active_kernels();

  FitResult out;
  out.state = init_state(data, hyper);
  out.delta_used = options.delta;
  out.event_count = data.event_count();
  VariationalState& s = out.state;

  double previous = 0.0;
  bool b_updated = false;
  auto coefficients = [&] { return plugin_coefficients(data, s, plugin_scale(s, hyper, b_updated), table, kernels); };
  for (std::size_t m = 1; m <= options.max_iter; ++m) {
    const Expectations ex = Expectations::of(s);

    BetaUpdate beta = update_beta(data, hyper, s, ex, coefficients(), m, kernels);
    s.Sigma = std::move(beta.Sigma);
    s.mu = std::move(beta.mu);
    update_all_gammas(data, s, ex, coefficients(), kernels);
    s.omega = update_b(data, hyper, s, coefficients(), m, kernels);
    b_updated = true;
    s.eta = update_sigma_gamma(hyper, s);
    if (!state_finite(s)) throw NumericalError("variational parameters became non-finite", m);

    const double elbo = elbo_terms(data, hyper, s, table, kernels).total();
    if (!std::isfinite(elbo)) throw NumericalError("ELBO is not finite", m);
    out.elbo_trace.push_back(elbo);
    out.iterations = m;
    if (std::fabs(elbo - previous) <= options.delta) {
      out.converged = true;
      break;
    }
    previous = elbo;
  }
  return out;
}

}  // namespace frailty_vb
