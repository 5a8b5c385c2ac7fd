// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "frailty_vb/cavi.hpp"
#include "frailty_vb/oracle.hpp"
#include "frailty_vb/piecewise.hpp"
#include "frailty_vb/simulation.hpp"
#include "frailty_vb/special.hpp"
#include "frailty_vb/summary.hpp"

using namespace frailty_vb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

Outcome coefficient_tables() {
  struct Case {
    double z;
    double rho, zeta, phi;
  };
  const Case cases[] = {
      {-10.0, 0.0, 0.0, 0.0},         {-5.0, 0.0, 0.0, 0.0},          {-3.0, 0.1696, 0.0189, 0.0426},
      {-1.701, 0.1696, 0.0189, 0.0426}, {-1.7, 0.1696, 0.0189, 0.3052}, {-1.0, 0.5, 0.1138, 0.3052},
      {0.0, 0.5, 0.1138, 0.3052},     {0.5, 0.5, 0.1138, 0.6950},     {1.7, 0.5, 0.1138, 0.6950},
      {1.702, 0.8303, 0.0190, 0.6950}, {3.0, 0.8303, 0.0190, 0.9574},  {5.0, 0.8303, 0.0190, 0.9574},
      {7.0, 1.0, 0.0, 1.0},
  };
  int checked = 0, wrong = 0;
  auto expect = [&](double z, double rho, double zeta, double phi) {
    const QuadCoeffs q = quad_coeffs(z);
    ++checked;
    if (q.rho != rho || q.zeta != zeta || lin_coeff(z).phi != phi) ++wrong;
  };
  for (const Case& c : cases) expect(c.z, c.rho, c.zeta, c.phi);
  // just past each boundary
  expect(std::nextafter(-5.0, 0.0), 0.1696, 0.0189, 0.0426);
  expect(std::nextafter(-1.701, 0.0), 0.1696, 0.0189, 0.3052);
  expect(std::nextafter(-1.7, 0.0), 0.5, 0.1138, 0.3052);
  expect(std::nextafter(0.0, 1.0), 0.5, 0.1138, 0.6950);
  expect(std::nextafter(1.7, 2.0), 0.8303, 0.0190, 0.6950);
  expect(std::nextafter(1.702, 2.0), 0.8303, 0.0190, 0.9574);
  expect(std::nextafter(5.0, 6.0), 1.0, 0.0, 1.0);
  return {wrong == 0, std::to_string(checked - wrong) + "/" + std::to_string(checked) + " points exact"};
}

Outcome expectation_identities() {
  double worst = 0.0;
  for (double shape : {1.0, 2.0, 3.0, 10.0}) {
    for (double scale : {0.5, 1.0, 2.0, 10.0}) {
      worst = std::max(worst, std::fabs(invgamma_mean_inv(shape, scale) -
                                        quadrature_invgamma(shape, scale, Integrand::InvB).value));
      worst = std::max(worst, std::fabs(invgamma_mean_inv_sq(shape, scale) -
                                        quadrature_invgamma(shape, scale, Integrand::InvBSq).value));
      worst = std::max(worst, std::fabs(invgamma_mean_log(shape, scale) -
                                        quadrature_invgamma(shape, scale, Integrand::LogB).value));
    }
  }
  return {worst <= 1e-8, "16-point lattice, max |closed form - quadrature| = " + fmt(worst, 3)};
}

Outcome surrogate_monotonicity() {
  int passed = 0;
  std::string first_failure;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ClusteredDataset d = random_small_dataset(seed);
    const MonotonicityReport r = frozen_sweep_monotonicity(d, Hyperparameters::defaults(3), 5);
    if (r.ok)
      ++passed;
    else if (first_failure.empty())
      first_failure = ", first failure seed " + std::to_string(seed) + " block " + r.failed_block;
  }
  return {passed == 20, std::to_string(passed) + "/20 datasets monotone over 5 sweeps" + first_failure};
}

ReplicateMetrics simulate(std::size_t K, std::size_t n) {
  ScenarioSpec spec;
  spec.K = K;
  spec.n = n;
  spec.replicates = 100;
  spec.seed = 1;
  return run_replicates(spec, Hyperparameters::defaults(3));
}

Outcome table_reproduction() {
  const ReplicateMetrics m = simulate(80, 50);
  const double bands[] = {0.03, 0.02, 0.02, 0.06};
  bool ok = m.failed == 0;
  std::string detail = "failed=" + std::to_string(m.failed) + " converged=" + std::to_string(m.converged) + "/100";
  for (std::size_t k = 0; k < 4; ++k) {
    const ParameterMetrics& p = m.parameters[k];
    ok = ok && std::fabs(p.bias) <= bands[k] && p.cr >= 0.88 && p.cr <= 0.99;
    detail += "; " + p.name + " bias " + fmt(p.bias, 3) + " cr " + fmt(p.cr, 3);
  }
  return {ok, detail};
}

Outcome small_scenario() {
  const ReplicateMetrics m = simulate(15, 5);
  const ParameterMetrics& s = m.parameters[3];
  const bool ok = m.failed == 0 && std::fabs(s.bias) <= 0.20 && s.sd >= 0.20 && s.sd <= 0.45;
  return {ok, "failed=" + std::to_string(m.failed) + "; sigma2_gamma bias " + fmt(s.bias, 3) + " sd " + fmt(s.sd, 3)};
}

Outcome censoring_calibration() {
  ScenarioSpec spec;
  spec.K = 2000;
  spec.n = 50;
  spec.seed = 1;
  const GeneratedSample s = generate_sample(spec, 0);
  std::size_t censored = 0;
  for (const RawRow& r : s.rows) censored += r.event ? 0 : 1;
  const double rate = static_cast<double>(censored) / static_cast<double>(s.rows.size());
  return {std::fabs(rate - 0.15) <= 0.02,
          "censoring rate " + fmt(rate, 4) + " over " + std::to_string(s.rows.size()) + " observations (target 0.15 +/- 0.02)"};
}

Outcome icc() {
  const double value = intraclass_correlation(0.1, 0.444);
  const double rounded = std::round(value * 1000.0) / 1000.0;
  return {rounded == 0.134, "icc " + fmt(value, 6)};
}

Outcome tiny_oracle() {
  const ClusteredDataset d = designed_tiny_dataset();
  const Hyperparameters h = designed_tiny_hyperparameters();
  const TinyPosteriorGrid g = tiny_exact_posterior(d, h);
  TinyGridOptions fine;
  fine.beta_step /= 2.0;
  fine.b_points = 2 * fine.b_points - 1;
  fine.sigma2_points = 2 * fine.sigma2_points - 1;
  fine.keep_density = false;
  const TinyPosteriorGrid g2 = tiny_exact_posterior(d, h, fine);
  const FitResult r = fit(d, h, tiny_fit_options());

  const double refinement = std::fabs(g.beta_mean - g2.beta_mean);
  const double gap = std::fabs(r.state.mu[0] - g.beta_mean);
  const bool grid_ok = std::fabs(g.total_mass - 1.0) <= 1e-9 && g.mass_contained && refinement <= 1e-4;
  return {grid_ok && r.converged && gap <= 0.15,
          "grid mean " + fmt(g.beta_mean, 5) + ", VB mean " + fmt(r.state.mu[0], 5) + ", gap " + fmt(gap, 3) +
              ", edge mass " + fmt(g.edge_mass, 2) + ", refinement shift " + fmt(refinement, 2)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FRAILTY_VB_CLI + "\" " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("frailty_vb_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string flags = "simulate --K 15 --n 5 --N 25 --seed 1";
  const int s1 = run_cli(flags + " --out " + (dir / "a.csv").string() + " --report " + (dir / "a.json").string());
  const int s2 = run_cli(flags + " --out " + (dir / "b.csv").string() + " --report " + (dir / "b.json").string());
  const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
  const std::string ja = slurp(dir / "a.json"), jb = slurp(dir / "b.json");
  fs::remove_all(dir);
  const bool ok = s1 == 0 && s2 == 0 && !a.empty() && a == b && ja == jb;
  return {ok, "exit " + std::to_string(s1) + "/" + std::to_string(s2) + ", csv " + std::to_string(a.size()) +
                  " bytes " + (a == b ? "identical" : "differ") + ", report " + (ja == jb ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"coefficient tables", coefficient_tables},
      {"expectation identities", expectation_identities},
      {"surrogate monotonicity", surrogate_monotonicity},
      {"K=80 n=50 reproduction", table_reproduction},
      {"K=15 n=5 reproduction", small_scenario},
      {"censoring calibration", censoring_calibration},
      {"intraclass correlation", icc},
      {"tiny-case oracle", tiny_oracle},
      {"simulate determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << ": " << criteria[i].first << "  ("
              << o.detail << "; " << fmt(secs, 3) << " s)" << std::endl;
  }
  return failures;
}
