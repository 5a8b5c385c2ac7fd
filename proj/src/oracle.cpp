#include "frailty_vb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "frailty_vb/error.hpp"
#include "frailty_vb/simulation.hpp"

namespace frailty_vb {

const char* to_string(Integrand f) {
  switch (f) {
    case Integrand::InvB: return "1/b";
    case Integrand::InvBSq: return "1/b^2";
    case Integrand::LogB: return "log b";
  }
  return "?";
}

QuadratureResult quadrature_invgamma(double shape, double scale, Integrand f) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw std::domain_error("shape and scale must be positive");
  // u = log b, centred at the mode of the log-density.
  const double center = std::log(scale / shape);
  const double log_norm = shape * std::log(scale) - std::lgamma(shape);
  auto integrand = [&](double v) {
    const double u = center + v;
    const double log_density = log_norm - shape * u - scale * std::exp(-u);
    double g = 1.0;
    switch (f) {
      case Integrand::InvB: g = std::exp(-u); break;
      case Integrand::InvBSq: g = std::exp(-2.0 * u); break;
      case Integrand::LogB: g = u; break;
    }
    const double d = std::exp(log_density);
    return d == 0.0 ? 0.0 : g * d;
  };
  QuadratureResult out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 15, 1e-13,
      &out.error_estimate);
  if (!(out.error_estimate <= 1e-10) || !std::isfinite(out.value))
    throw std::runtime_error("quadrature did not reach 1e-10 (error estimate " + std::to_string(out.error_estimate) +
                             ")");
  return out;
}

ScanResult approx_error_scan(ApproxKind kind, double lo, double hi, std::size_t points,
                             const ApproximationTable& table) {
  const bool single = points == 1 && lo == hi;
  if (!single && (!(lo < hi) || points < 2))
    throw std::invalid_argument("scan needs lo < hi and at least two points, or one point with lo == hi");
  ScanResult best{-1.0, lo};
  const double denom = single ? 1.0 : static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    const double z = lo + static_cast<double>(k) * (hi - lo) / denom;
    double approx = 0.0;
    if (kind == ApproxKind::Quadratic) {
      const QuadCoeffs q = table.quad(z);
      approx = q.rho * z + q.zeta * z * z;
    } else {
      approx = table.lin(z).phi * z;
    }
    const double err = std::fabs(softplus(z) - approx);
    if (err > best.max_abs_error) best = {err, z};
  }
  return best;
}

namespace {

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> log_axis(double lo, double hi, std::size_t n) {
  std::vector<double> a(n);
  const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) a[k] = std::exp(std::log(lo) + step * static_cast<double>(k));
  return a;
}

// log density of one observation on the log-time scale, location s, scale b
double log_lik(double y, double event, double s, double b) {
  const double w = (y - s) / b;
  return event * (-std::log(b) + w) - (1.0 + event) * softplus(w);
}

}  // namespace

TinyPosteriorGrid tiny_exact_posterior(const ClusteredDataset& data, const Hyperparameters& hyper,
                                       const TinyGridOptions& o) {
  if (data.dimension() != 1) throw std::invalid_argument("tiny posterior needs an intercept-only design");
  if (data.clusters() > 2) throw std::invalid_argument("tiny posterior supports at most 2 clusters");
  hyper.validate(1);
  for (std::size_t i = 0; i < data.clusters(); ++i) {
    if (data.cluster_size(i) > 3) throw std::invalid_argument("tiny posterior supports at most 3 observations per cluster");
    bool event = false;
    for (std::size_t j = data.cluster_begin(i); j < data.cluster_end(i); ++j) event |= data.events()[j] != 0.0;
    if (!event) throw std::invalid_argument("every cluster needs an uncensored observation");
  }

  const auto y = data.log_times();
  const auto ev = data.events();
  const double mu0 = hyper.mu0[0];
  const double prior_sd = 1.0 / std::sqrt(hyper.v0);
  const double lo = std::min(mu0, *std::min_element(y.begin(), y.end())) - o.beta_sds * prior_sd;
  const double hi = std::max(mu0, *std::max_element(y.begin(), y.end())) + o.beta_sds * prior_sd;
  const double h = o.beta_step;
  const auto nbeta = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;

  TinyPosteriorGrid g;
  g.beta_axis.resize(nbeta);
  for (std::size_t k = 0; k < nbeta; ++k) g.beta_axis[k] = lo + h * static_cast<double>(k);
  g.b_axis = log_axis(o.b_lo, o.b_hi, o.b_points);
  g.sigma2_axis = log_axis(o.sigma2_lo, o.sigma2_hi, o.sigma2_points);
  const std::size_t nb = g.b_axis.size();
  const std::size_t ns = g.sigma2_axis.size();
  const double db = std::log(o.b_hi / o.b_lo) / static_cast<double>(nb - 1);
  const double ds = std::log(o.sigma2_hi / o.sigma2_lo) / static_cast<double>(ns - 1);
  const auto nb_i = static_cast<Eigen::Index>(nb);
  const auto nbeta_i = static_cast<Eigen::Index>(nbeta);

  // Per cluster: L_i(s_m, b_j) scaled by its maximum over s for each b.
  std::vector<Eigen::MatrixXd> lik(data.clusters(), Eigen::MatrixXd(nbeta_i, nb_i));
  std::vector<std::vector<double>> lik_shift(data.clusters(), std::vector<double>(nb));
  for (std::size_t i = 0; i < data.clusters(); ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      std::vector<double> col(nbeta);
      for (std::size_t m = 0; m < nbeta; ++m) {
        double l = 0.0;
        for (std::size_t t = data.cluster_begin(i); t < data.cluster_end(i); ++t)
          l += log_lik(y[t], ev[t], g.beta_axis[m], g.b_axis[j]);
        col[m] = l;
      }
      const double mx = *std::max_element(col.begin(), col.end());
      lik_shift[i][j] = mx;
      for (std::size_t m = 0; m < nbeta; ++m)
        lik[i](static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = std::exp(col[m] - mx);
    }
  }

  std::vector<double> log_prior_b(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const double b = g.b_axis[j];
    log_prior_b[j] = -(hyper.alpha0 + 1.0) * std::log(b) - hyper.omega0 / b + std::log(b * db);
  }
  std::vector<double> log_prior_beta(nbeta);
  for (std::size_t k = 0; k < nbeta; ++k)
    log_prior_beta[k] = -0.5 * hyper.v0 * (g.beta_axis[k] - mu0) * (g.beta_axis[k] - mu0) + std::log(h);

  std::vector<double> log_mass(ns * nb * nbeta);
  Eigen::MatrixXd kernel(nbeta_i, nbeta_i);
  std::vector<double> band(2 * nbeta - 1);
  for (std::size_t s = 0; s < ns; ++s) {
    const double v = g.sigma2_axis[s];
    const double log_prior_s = -(hyper.lambda0 + 1.0) * std::log(v) - hyper.eta0 / v + std::log(v * ds);
    // kernel(k, m) = h * N(s_m - beta_k; 0, v), Toeplitz in (m - k)
    for (std::size_t d = 0; d < band.size(); ++d) {
      const double diff = h * (static_cast<double>(d) - static_cast<double>(nbeta - 1));
      band[d] = h * std::exp(-0.5 * diff * diff / v) / std::sqrt(2.0 * std::numbers::pi * v);
    }
    for (std::size_t k = 0; k < nbeta; ++k)
      for (std::size_t m = 0; m < nbeta; ++m)
        kernel(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = band[m + nbeta - 1 - k];

    Eigen::ArrayXXd acc = Eigen::ArrayXXd::Zero(nbeta_i, nb_i);
    for (std::size_t i = 0; i < data.clusters(); ++i) {
      const Eigen::MatrixXd integral = kernel * lik[i];
      acc += integral.array().log();
      for (std::size_t j = 0; j < nb; ++j) acc.col(static_cast<Eigen::Index>(j)) += lik_shift[i][j];
    }
    for (std::size_t j = 0; j < nb; ++j)
      for (std::size_t k = 0; k < nbeta; ++k)
        log_mass[(s * nb + j) * nbeta + k] = acc(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) +
                                              log_prior_beta[k] + log_prior_b[j] + log_prior_s;
  }

  g.log_normalizer = log_sum_exp(log_mass);
  double total = 0.0, edge = 0.0, mb = 0.0, mbb = 0.0, ms = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t j = 0; j < nb; ++j) {
      for (std::size_t k = 0; k < nbeta; ++k) {
        const double w = std::exp(log_mass[(s * nb + j) * nbeta + k] - g.log_normalizer);
        total += w;
        mb += w * g.beta_axis[k];
        mbb += w * g.b_axis[j];
        ms += w * g.sigma2_axis[s];
        if (k == 0 || k + 1 == nbeta || j == 0 || j + 1 == nb || s == 0 || s + 1 == ns) edge += w;
      }
    }
  }
  g.total_mass = total;
  g.edge_mass = edge;
  g.beta_mean = mb / total;
  g.b_mean = mbb / total;
  g.sigma2_mean = ms / total;
  g.mass_contained = edge <= o.edge_tolerance;
  if (o.keep_density) g.log_density = std::move(log_mass);
  return g;
}

ClusteredDataset designed_tiny_dataset() {
  const std::vector<RawRow> rows{{"A", std::exp(1.5), true, {1.0}}, {"A", std::exp(2.5), true, {1.0}}};
  return validate_dataset(rows, {"intercept"});
}

Hyperparameters designed_tiny_hyperparameters() {
  Hyperparameters h = Hyperparameters::defaults(1);
  h.v0 = 0.01;
  return h;
}

FitOptions tiny_fit_options() {
  FitOptions o;
  o.delta = 1e-10;
  o.max_iter = 2000;
  return o;
}

double quadratic_surrogate(const ClusteredDataset& data, const Hyperparameters& hyper, const VariationalState& state,
                           const SurrogateCoefficients& coeffs) {
  const Expectations ex = Expectations::of(state);
  const std::vector<double> r = state_residuals(data, state, scalar_kernels());
  const auto ev = data.events();
  const std::size_t p = data.dimension();
  double lik = -static_cast<double>(data.event_count()) * ex.log_b;
  Eigen::VectorXd x(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < data.size(); ++j) {
    for (std::size_t k = 0; k < p; ++k) x[static_cast<Eigen::Index>(k)] = data.covariate(j, k);
    const double second = r[j] * r[j] + x.dot(state.Sigma * x) +
                          state.sigma2[static_cast<Eigen::Index>(data.cluster_of()[j])];
    lik += (ev[j] - (1.0 + ev[j]) * coeffs.rho[j]) * ex.inv_b * r[j] - (1.0 + ev[j]) * coeffs.zeta[j] * ex.inv_b_sq * second;
  }
  const ElboTerms t = elbo_terms(data, hyper, state, coeffs.phi, scalar_kernels());
  return lik + t.beta + t.gamma + t.b + t.sigma_gamma;
}

double linear_surrogate(const ClusteredDataset& data, const Hyperparameters& hyper, const VariationalState& state,
                        const SurrogateCoefficients& coeffs) {
  return elbo_terms(data, hyper, state, coeffs.phi, scalar_kernels()).total();
}

MonotonicityReport frozen_sweep_monotonicity(const ClusteredDataset& data, const Hyperparameters& hyper,
                                             const VariationalState& start, bool start_is_initial, std::size_t sweeps,
                                             const ApproximationTable& table) {
  MonotonicityReport rep;
  VariationalState s = start;
  auto tolerance = [](double f) { return -1e-9 * std::max(1.0, std::fabs(f)); };
  bool b_updated = !start_is_initial;
  for (std::size_t sweep = 1; sweep <= sweeps; ++sweep) {
    for (Block block : {Block::Beta, Block::Gamma, Block::B, Block::SigmaGamma}) {
      const SurrogateCoefficients c =
          plugin_coefficients(data, s, plugin_scale(s, hyper, b_updated), table, scalar_kernels());
      const double q0 = quadratic_surrogate(data, hyper, s, c);
      const double l0 = linear_surrogate(data, hyper, s, c);
      try {
        apply_block(block, data, hyper, s, c, sweep, scalar_kernels());
      } catch (const NumericalError& e) {
        rep.ok = false;
        rep.failed_block = std::string(to_string(block)) + " (sweep " + std::to_string(sweep) + "): " + e.what();
        return rep;
      }
      if (block == Block::B) b_updated = true;
      BlockDelta d{sweep, block, quadratic_surrogate(data, hyper, s, c) - q0, linear_surrogate(data, hyper, s, c) - l0};
      rep.deltas.push_back(d);
      const bool quad_ok = d.quadratic >= tolerance(q0);
      const bool lin_ok = d.linear >= tolerance(l0);
      bool ok = true;
      switch (block) {
        case Block::Beta:
        case Block::Gamma: ok = quad_ok; break;
        case Block::B: ok = lin_ok; break;
        case Block::SigmaGamma: ok = quad_ok && lin_ok; break;
      }
      if (!ok && rep.ok) {
        rep.ok = false;
        rep.failed_block = std::string(to_string(block)) + " (sweep " + std::to_string(sweep) + ")";
      }
    }
  }
  return rep;
}

MonotonicityReport frozen_sweep_monotonicity(const ClusteredDataset& data, const Hyperparameters& hyper,
                                             std::size_t sweeps, const ApproximationTable& table) {
  return frozen_sweep_monotonicity(data, hyper, init_state(data, hyper), true, sweeps, table);
}

ClusteredDataset random_small_dataset(std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::normal_distribution<double> x1_dist(1.0, 0.2);
  std::bernoulli_distribution x2_dist(0.5);

  const int K = count(eng);
  const double beta[] = {0.5 + normal(eng), 0.2 + 0.5 * normal(eng), 0.8 + 0.5 * normal(eng)};
  const double b = 0.4 + unit(eng);
  const double sd = std::sqrt(0.2 + 1.5 * unit(eng));
  std::vector<RawRow> rows;
  for (int i = 0; i < K; ++i) {
    const double gamma = sd * normal(eng);
    const int n = count(eng);
    for (int j = 0; j < n; ++j) {
      const double x1 = x1_dist(eng);
      const double x2 = x2_dist(eng) ? 1.0 : 0.0;
      double u = 0.0;
      while (u == 0.0) u = unit(eng);
      const double T = std::exp(beta[0] + beta[1] * x1 + beta[2] * x2 + gamma + b * std::log(u / (1.0 - u)));
      double C = 0.0;
      while (C == 0.0) C = 48.0 * unit(eng);
      rows.push_back({"c" + std::to_string(i), std::min(T, C), T <= C, {1.0, x1, x2}});
    }
  }
  return validate_dataset(rows, {"intercept", "x1", "x2"});
}

}  // namespace frailty_vb
