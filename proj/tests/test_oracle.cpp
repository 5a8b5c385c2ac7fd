#include <doctest.h>

#include <cmath>
#include <limits>

#include "frailty_vb/cavi.hpp"
#include "frailty_vb/oracle.hpp"
#include "frailty_vb/special.hpp"
#include "frailty_vb/verify.hpp"

using namespace frailty_vb;

namespace {

double objective_for(Block block, const ClusteredDataset& d, const Hyperparameters& h, const VariationalState& s,
                     const SurrogateCoefficients& c) {
  return block == Block::B ? linear_surrogate(d, h, s, c) : quadratic_surrogate(d, h, s, c);
}

}  // namespace

TEST_CASE("quadrature examples") {
  CHECK(std::fabs(quadrature_invgamma(3, 2, Integrand::InvB).value - 1.5) <= 1e-10);
  CHECK(std::fabs(quadrature_invgamma(1, 1, Integrand::InvB).value - 1.0) <= 1e-10);
  CHECK(std::fabs(quadrature_invgamma(3, 2, Integrand::LogB).value - (std::log(2.0) - digamma(3.0))) <= 1e-10);
  CHECK(std::fabs(quadrature_invgamma(3, 2, Integrand::InvBSq).value - 3.0) <= 1e-10);
}

TEST_CASE("closed-form moments agree with quadrature on the lattice") {
  for (double shape : {1.0, 2.0, 3.0, 10.0}) {
    for (double scale : {0.5, 1.0, 2.0, 10.0}) {
      CAPTURE(shape);
      CAPTURE(scale);
      CHECK(std::fabs(invgamma_mean_inv(shape, scale) - quadrature_invgamma(shape, scale, Integrand::InvB).value) <= 1e-8);
      CHECK(std::fabs(invgamma_mean_inv_sq(shape, scale) -
                      quadrature_invgamma(shape, scale, Integrand::InvBSq).value) <= 1e-8);
      CHECK(std::fabs(invgamma_mean_log(shape, scale) - quadrature_invgamma(shape, scale, Integrand::LogB).value) <=
            1e-8);
    }
  }
}

TEST_CASE("approximation error scans") {
  SUBCASE("quadratic has no constant term") {
    CHECK(approx_error_scan(ApproxKind::Quadratic, 0.0, 0.0, 1).max_abs_error == std::log(2.0));
    const ScanResult r = approx_error_scan(ApproxKind::Quadratic, -1.7, 1.7, 1001);
    CHECK(r.max_abs_error >= std::log(2.0));
  }
  SUBCASE("linear far right") {
    CHECK(approx_error_scan(ApproxKind::Linear, 10.0, 20.0, 10001).max_abs_error < 5e-5);
  }
  SUBCASE("linear far left") {
    const ScanResult r = approx_error_scan(ApproxKind::Linear, -10.0, -10.0, 1);
    CHECK(r.max_abs_error == doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-12));
    CHECK(r.max_abs_error == doctest::Approx(4.54e-5).epsilon(1e-3));
  }
  SUBCASE("bad ranges") {
    CHECK_THROWS(approx_error_scan(ApproxKind::Linear, 1.0, 0.0, 10));
    CHECK_THROWS(approx_error_scan(ApproxKind::Linear, 0.0, 1.0, 1));
  }
  SUBCASE("regression constants on [-5, 5]") {
    const ScanResult q = approx_error_scan(ApproxKind::Quadratic, -5.0, 5.0, 1000000);
    const ScanResult l = approx_error_scan(ApproxKind::Linear, -5.0, 5.0, 1000000);
    CHECK(std::fabs(q.max_abs_error - kQuadScanMaxError) <= 1e-12);
    CHECK(std::fabs(q.argmax - kQuadScanArgmax) <= 1e-9);
    CHECK(std::fabs(l.max_abs_error - kLinScanMaxError) <= 1e-12);
    CHECK(std::fabs(l.argmax - kLinScanArgmax) <= 1e-9);
  }
}

TEST_CASE("tiny exact posterior") {
  const ClusteredDataset d = designed_tiny_dataset();
  const Hyperparameters h = designed_tiny_hyperparameters();
  const TinyPosteriorGrid g = tiny_exact_posterior(d, h);
  CHECK(std::fabs(g.total_mass - 1.0) <= 1e-9);
  CHECK(g.mass_contained);
  CHECK(g.edge_mass <= 1e-4);
  CHECK(std::isfinite(g.log_normalizer));
  CHECK(g.beta_mean > 1.0);
  CHECK(g.beta_mean < 3.0);

  TinyGridOptions fine;
  fine.beta_step /= 2.0;
  fine.b_points = 2 * fine.b_points - 1;
  fine.sigma2_points = 2 * fine.sigma2_points - 1;
  fine.keep_density = false;
  const TinyPosteriorGrid g2 = tiny_exact_posterior(d, h, fine);
  CHECK(std::fabs(g.beta_mean - g2.beta_mean) <= 1e-4);

  const FitResult r = fit(d, h, tiny_fit_options());
  CHECK(r.converged);
  CHECK(std::fabs(r.state.mu[0] - g.beta_mean) <= 0.15);
}

TEST_CASE("tiny posterior rejects larger problems") {
  std::vector<RawRow> rows;
  for (const char* c : {"A", "B", "C"}) rows.push_back({c, 2.0, true, {1.0}});
  CHECK_THROWS(tiny_exact_posterior(validate_dataset(rows), Hyperparameters::defaults(1)));
  const ClusteredDataset censored = validate_dataset(std::vector<RawRow>{{"A", 2.0, false, {1.0}}});
  CHECK_THROWS(tiny_exact_posterior(censored, Hyperparameters::defaults(1)));
}

TEST_CASE("monotonicity on random small datasets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    const ClusteredDataset d = random_small_dataset(seed);
    CHECK(d.clusters() >= 1);
    CHECK(d.clusters() <= 5);
    CHECK(d.dimension() == 3);
    for (std::size_t i = 0; i < d.clusters(); ++i) CHECK(d.cluster_size(i) <= 5);
    const MonotonicityReport r = frozen_sweep_monotonicity(d, Hyperparameters::defaults(3), 5);
    CHECK(r.ok);
    CHECK(r.failed_block.empty());
    CHECK(r.deltas.size() == 5 * 4);
  }
}

TEST_CASE("repeating a block changes nothing") {
  const ClusteredDataset d = random_small_dataset(3);
  const Hyperparameters h = Hyperparameters::defaults(3);
  VariationalState s = init_state(d, h);
  for (Block block : {Block::Beta, Block::Gamma, Block::B, Block::SigmaGamma}) {
    CAPTURE(to_string(block));
    const SurrogateCoefficients c = plugin_coefficients(d, s, plugin_scale(s, h, block != Block::Beta));
    apply_block(block, d, h, s, c);
    const double once = objective_for(block, d, h, s, c);
    apply_block(block, d, h, s, c);
    const double twice = objective_for(block, d, h, s, c);
    CHECK(std::fabs(twice - once) <= 1e-9 * std::max(1.0, std::fabs(once)));
  }
}

TEST_CASE("a converged state does not move") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 20 && checked < 3; ++seed) {
    const ClusteredDataset d = random_small_dataset(seed);
    const Hyperparameters h = Hyperparameters::defaults(3);
    FitOptions o;
    o.delta = 1e-13;
    o.max_iter = 5000;
    const FitResult r = fit(d, h, o);
    if (!r.converged) continue;
    CAPTURE(seed);
    ++checked;
    const MonotonicityReport m = frozen_sweep_monotonicity(d, h, r.state, false, 1);
    CHECK(m.ok);
    for (const BlockDelta& bd : m.deltas) {
      CHECK(std::fabs(bd.quadratic) <= 1e-9 * std::max(1.0, std::fabs(r.elbo_trace.back())));
      CHECK(std::fabs(bd.linear) <= 1e-9 * std::max(1.0, std::fabs(r.elbo_trace.back())));
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("verify checks") {
  CHECK(verify_check_names().size() == 4);
  const std::vector<CheckResult> q = run_verify({"quadrature"});
  REQUIRE(q.size() == 1);
  CHECK(q[0].name == "quadrature");
  CHECK(q[0].passed);
  CHECK_THROWS(run_verify({"nonsense"}));

  ApproximationTable bad = ApproximationTable::standard();
  bad.zeta[2] = 0.2;
  const std::vector<CheckResult> s = run_verify({"approx-error-scan"}, bad);
  REQUIRE(s.size() == 1);
  CHECK(!s[0].passed);
}
