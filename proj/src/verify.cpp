#include "frailty_vb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "frailty_vb/cavi.hpp"
#include "frailty_vb/error.hpp"
#include "frailty_vb/oracle.hpp"
#include "frailty_vb/special.hpp"

namespace frailty_vb {

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names{"quadrature", "approx-error-scan", "monotonicity", "tiny-posterior"};
  return names;
}

namespace {

CheckResult check_quadrature() {
  CheckResult r{"quadrature", true, ""};
  double worst = 0.0;
  std::ostringstream detail;
  for (double shape : {1.0, 2.0, 3.0, 10.0}) {
    for (double scale : {0.5, 1.0, 2.0, 10.0}) {
      const double closed[] = {invgamma_mean_inv(shape, scale), invgamma_mean_inv_sq(shape, scale),
                               invgamma_mean_log(shape, scale)};
      const Integrand fs[] = {Integrand::InvB, Integrand::InvBSq, Integrand::LogB};
      for (int k = 0; k < 3; ++k) {
        double err = 0.0;
        try {
          err = std::fabs(quadrature_invgamma(shape, scale, fs[k]).value - closed[k]);
        } catch (const std::exception& e) {
          r.passed = false;
          detail << "quadrature failed at (" << shape << ", " << scale << ", " << to_string(fs[k]) << "): " << e.what()
                 << "; ";
          continue;
        }
        worst = std::max(worst, err);
        if (!(err <= 1e-8)) {
          r.passed = false;
          detail << "E[" << to_string(fs[k]) << "] at (" << shape << ", " << scale << ") off by " << err << "; ";
        }
      }
    }
  }
  detail << "max |closed form - quadrature| = " << worst << " over 16 (shape, scale) pairs";
  r.detail = detail.str();
  return r;
}

CheckResult check_scan(const ApproximationTable& table) {
  CheckResult r{"approx-error-scan", true, ""};
  std::ostringstream detail;
  detail.precision(17);
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) {
      r.passed = false;
      detail << what << "; ";
    }
  };
  const ScanResult quad = approx_error_scan(ApproxKind::Quadratic, -5.0, 5.0, 1000000, table);
  const ScanResult lin = approx_error_scan(ApproxKind::Linear, -5.0, 5.0, 1000000, table);
  expect(std::fabs(quad.max_abs_error - kQuadScanMaxError) <= 1e-12 && std::fabs(quad.argmax - kQuadScanArgmax) <= 1e-12,
         "quadratic sup error on [-5, 5] differs from reference");
  expect(std::fabs(lin.max_abs_error - kLinScanMaxError) <= 1e-12 && std::fabs(lin.argmax - kLinScanArgmax) <= 1e-12,
         "linear sup error on [-5, 5] differs from reference");
  const QuadCoeffs q0 = table.quad(0.0);
  expect(std::fabs(softplus(0.0) - (q0.rho * 0.0 + q0.zeta * 0.0)) == std::log(2.0), "quadratic error at 0 is not log 2");
  const ScanResult far = approx_error_scan(ApproxKind::Linear, 10.0, 20.0, 100000, table);
  expect(far.max_abs_error < 5e-5, "linear error on [10, 20] exceeds 5e-5");
  const double at_minus10 = std::fabs(softplus(-10.0) - table.lin(-10.0).phi * -10.0);
  expect(std::fabs(at_minus10 - std::log1p(std::exp(-10.0))) <= 1e-18, "linear error at -10 is not log(1 + e^-10)");
  detail << "quadratic max " << quad.max_abs_error << " at " << quad.argmax << ", linear max " << lin.max_abs_error
         << " at " << lin.argmax;
  r.detail = detail.str();
  return r;
}

CheckResult check_monotonicity(const ApproximationTable& table) {
  CheckResult r{"monotonicity", true, ""};
  std::ostringstream detail;
  double worst = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ClusteredDataset data = random_small_dataset(seed);
    const Hyperparameters hyper = Hyperparameters::defaults(data.dimension());
    const MonotonicityReport rep = frozen_sweep_monotonicity(data, hyper, 5, table);
    for (const BlockDelta& d : rep.deltas) {
      if (d.block != Block::B) worst = std::min(worst, d.quadratic);
      if (d.block == Block::B || d.block == Block::SigmaGamma) worst = std::min(worst, d.linear);
    }
    if (!rep.ok) {
      r.passed = false;
      detail << "dataset " << seed << ": " << rep.failed_block << "; ";
    }
  }
  detail << "20 datasets, 5 frozen sweeps each, smallest change of a maximized objective " << worst;
  r.detail = detail.str();
  return r;
}

CheckResult check_tiny() {
  CheckResult r{"tiny-posterior", true, ""};
  std::ostringstream detail;
  const ClusteredDataset data = designed_tiny_dataset();
  const Hyperparameters hyper = designed_tiny_hyperparameters();
  TinyGridOptions base;
  base.keep_density = false;
  TinyGridOptions fine = base;
  fine.beta_step = base.beta_step / 2.0;
  fine.b_points = 2 * base.b_points - 1;
  fine.sigma2_points = 2 * base.sigma2_points - 1;
  const TinyPosteriorGrid g = tiny_exact_posterior(data, hyper, base);
  const TinyPosteriorGrid g2 = tiny_exact_posterior(data, hyper, fine);
  const FitResult vb = fit(data, hyper, tiny_fit_options());
  const double vb_beta = vb.state.mu[0];

  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) {
      r.passed = false;
      detail << what << "; ";
    }
  };
  expect(std::fabs(g.total_mass - 1.0) <= 1e-8, "grid mass does not normalize");
  expect(g.mass_contained && g2.mass_contained, "posterior mass reaches the grid boundary");
  const double refine = std::max(std::fabs(g.beta_mean - g2.beta_mean), std::fabs(g.b_mean - g2.b_mean));
  expect(refine < 1e-4, "refined grid moves the means");
  expect(vb.converged, "VB fit did not reach its fixed point");
  expect(std::fabs(vb_beta - g.beta_mean) <= 0.15, "VB beta mean is more than 0.15 from the grid mean");
  detail << "grid beta mean " << g.beta_mean << ", b mean " << g.b_mean << ", VB beta mean " << vb_beta
         << ", refinement change " << refine << ", edge mass " << std::max(g.edge_mass, g2.edge_mass);
  r.detail = detail.str();
  return r;
}

}  // namespace

std::vector<CheckResult> run_verify(const std::vector<std::string>& checks, const ApproximationTable& table) {
  const std::vector<std::string>& all = verify_check_names();
  for (const std::string& c : checks)
    if (std::find(all.begin(), all.end(), c) == all.end())
      throw ValidationError(ValidationKind::MalformedInput, "unknown check '" + c + "'");
  std::vector<CheckResult> out;
  for (const std::string& name : all) {
    if (!checks.empty() && std::find(checks.begin(), checks.end(), name) == checks.end()) continue;
    try {
      if (name == "quadrature") out.push_back(check_quadrature());
      else if (name == "approx-error-scan") out.push_back(check_scan(table));
      else if (name == "monotonicity") out.push_back(check_monotonicity(table));
      else out.push_back(check_tiny());
    } catch (const std::exception& e) {
      out.push_back({name, false, e.what()});
    }
  }
  return out;
}

}  // namespace frailty_vb
