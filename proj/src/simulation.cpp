#include "frailty_vb/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "frailty_vb/cavi.hpp"
#include "frailty_vb/error.hpp"
#include "frailty_vb/io.hpp"
#include "frailty_vb/summary.hpp"

namespace frailty_vb {

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError(ValidationKind::InvalidHyperparameter, what); };
  if (K < 1) fail("K must be at least 1");
  if (n < 1) fail("n must be at least 1");
  if (beta_true.size() != 3) fail("beta_true must have 3 entries (intercept, x1, x2)");
  if (!beta_true.allFinite()) fail("beta_true must be finite");
  if (!(b_true > 0.0) || !std::isfinite(b_true)) fail("b must be positive");
  if (!(sigma2_true >= 0.0) || !std::isfinite(sigma2_true)) fail("sigma2 must be non-negative");
  if (!(censor_upper > 0.0) || !std::isfinite(censor_upper)) fail("d must be positive");
}

namespace {

enum class Stream : std::uint32_t { X1 = 1, X2, Error, Frailty, Censor };

std::mt19937_64 stream_engine(std::uint64_t seed, std::size_t replicate, Stream role) {
  const auto rep = static_cast<std::uint64_t>(replicate);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32),
                    static_cast<std::uint32_t>(role)};
  return std::mt19937_64(seq);
}

// Uniform on (0, 1) excluding 0.
double open_uniform(std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = 0.0;
  while (v == 0.0) v = u(eng);
  return v;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const char* const kParameterNames[] = {"beta_1", "beta_2", "b", "sigma2_gamma"};

ReplicateOutcome run_one(const ScenarioSpec& spec, const Hyperparameters& hyper, const SimulationOptions& options,
                         std::size_t r) {
  ReplicateOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ClusteredDataset data = generate_dataset(spec, r);
    FitOptions fo;
    fo.delta = options.delta;
    fo.max_iter = options.max_iter;
    const FitResult fr = fit(data, hyper, fo);
    const PosteriorSummary s = summarize(fr);
    out.converged = fr.converged;
    out.iterations = fr.iterations;
    const Estimate* est[] = {&s.coefficients.at(1), &s.coefficients.at(2), &s.b, &s.sigma2_gamma};
    const double truth[] = {spec.beta_true[1], spec.beta_true[2], spec.b_true, spec.sigma2_true};
    for (int k = 0; k < 4; ++k) {
      out.estimates.push_back(est[k]->mean);
      out.covered.push_back(est[k]->interval.contains(truth[k]));
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

GeneratedSample generate_sample(const ScenarioSpec& spec, std::size_t replicate) {
  spec.validate();
  auto x1_eng = stream_engine(spec.seed, replicate, Stream::X1);
  auto x2_eng = stream_engine(spec.seed, replicate, Stream::X2);
  auto err_eng = stream_engine(spec.seed, replicate, Stream::Error);
  auto fr_eng = stream_engine(spec.seed, replicate, Stream::Frailty);
  auto cen_eng = stream_engine(spec.seed, replicate, Stream::Censor);
  std::normal_distribution<double> x1_dist(1.0, 0.2);
  std::bernoulli_distribution x2_dist(0.5);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  GeneratedSample g;
  g.rows.reserve(spec.K * spec.n);
  const double sd = std::sqrt(spec.sigma2_true);
  for (std::size_t i = 0; i < spec.K; ++i) {
    const double gamma = spec.sigma2_true == 0.0 ? 0.0 : sd * std_normal(fr_eng);
    g.frailties.push_back(gamma);
    for (std::size_t j = 0; j < spec.n; ++j) {
      const double x1 = x1_dist(x1_eng);
      const double x2 = x2_dist(x2_eng) ? 1.0 : 0.0;
      const double u = open_uniform(err_eng);
      const double eps = std::log(u / (1.0 - u));
      const double log_t = spec.beta_true[0] + spec.beta_true[1] * x1 + spec.beta_true[2] * x2 + gamma + spec.b_true * eps;
      const double T = std::exp(log_t);
      const double C = spec.censor_upper * open_uniform(cen_eng);
      g.event_times.push_back(T);
      g.censor_times.push_back(C);
      RawRow row;
      row.cluster = std::to_string(i + 1);
      row.event = T <= C;
      row.time = row.event ? T : C;
      row.covariates = {1.0, x1, x2};
      g.rows.push_back(std::move(row));
    }
  }
  return g;
}

ClusteredDataset generate_dataset(const ScenarioSpec& spec, std::size_t replicate) {
  const GeneratedSample g = generate_sample(spec, replicate);
  return validate_dataset(g.rows, {"intercept", "x1", "x2"});
}

std::uint64_t scenario_seed(std::uint64_t seed, std::size_t K, std::size_t n) {
  return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(K)) ^ static_cast<std::uint64_t>(n));
}

ParameterMetrics aggregate_parameter(std::string name, double truth, const std::vector<double>& estimates,
                                     const std::vector<bool>& covered) {
  ParameterMetrics m;
  m.name = std::move(name);
  m.truth = truth;
  m.count = estimates.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (m.count == 0) {
    m.bias = m.sd = m.mse = m.cr = nan;
    return m;
  }
  const double N = static_cast<double>(m.count);
  double mean = 0.0, sq = 0.0, hits = 0.0;
  for (std::size_t r = 0; r < m.count; ++r) {
    mean += estimates[r];
    sq += (estimates[r] - truth) * (estimates[r] - truth);
    hits += covered[r] ? 1.0 : 0.0;
  }
  mean /= N;
  m.bias = mean - truth;
  m.mse = sq / N;
  m.cr = hits / N;
  if (m.count < 2) {
    m.sd = nan;
  } else {
    double ss = 0.0;
    for (double e : estimates) ss += (e - mean) * (e - mean);
    m.sd = std::sqrt(ss / (N - 1.0));
  }
  return m;
}

std::size_t worker_count(std::size_t requested, std::size_t work) {
  std::size_t w = requested;
  if (w == 0) {
    if (const char* env = std::getenv("FRAILTY_VB_THREADS")) {
      char* end = nullptr;
      const unsigned long v = std::strtoul(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) w = v;
    }
  }
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, work));
}

ReplicateMetrics run_replicates(const ScenarioSpec& spec, const Hyperparameters& hyper,
                                const SimulationOptions& options) {
  spec.validate();
  hyper.validate(3);
  const auto start = std::chrono::steady_clock::now();

  ReplicateMetrics out;
  out.K = spec.K;
  out.n = spec.n;
  out.outcomes.resize(spec.replicates);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < spec.replicates; r = next++) out.outcomes[r] = run_one(spec, hyper, options, r);
  };
  const std::size_t workers = worker_count(options.threads, spec.replicates);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const double truth[] = {spec.beta_true[1], spec.beta_true[2], spec.b_true, spec.sigma2_true};
  std::vector<std::vector<double>> est(4);
  std::vector<std::vector<bool>> cov(4);
  for (const ReplicateOutcome& o : out.outcomes) {
    if (!o.ok) {
      ++out.failed;
      continue;
    }
    out.converged += o.converged ? 1 : 0;
    for (int k = 0; k < 4; ++k) {
      est[k].push_back(o.estimates[k]);
      cov[k].push_back(o.covered[k]);
    }
  }
  for (int k = 0; k < 4; ++k) out.parameters.push_back(aggregate_parameter(kParameterNames[k], truth[k], est[k], cov[k]));
  out.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<ReplicateMetrics> scenario_grid(const std::vector<std::size_t>& K_set, const std::vector<std::size_t>& n_set,
                                            const ScenarioSpec& base, const Hyperparameters& hyper,
                                            const SimulationOptions& options) {
  std::vector<ReplicateMetrics> out;
  for (std::size_t K : K_set) {
    for (std::size_t n : n_set) {
      ScenarioSpec s = base;
      s.K = K;
      s.n = n;
      s.seed = scenario_seed(base.seed, K, n);
      out.push_back(run_replicates(s, hyper, options));
    }
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<ReplicateMetrics>& table, bool with_timing) {
  auto num = [](double x) { return std::isfinite(x) ? format_double(x) : std::string("NA"); };
  os << "K,n,parameter,bias,sd,mse,cr,seconds\n";
  for (const ReplicateMetrics& m : table) {
    for (const ParameterMetrics& p : m.parameters) {
      os << m.K << ',' << m.n << ',' << p.name << ',' << num(p.bias) << ',' << num(p.sd) << ',' << num(p.mse) << ','
         << num(p.cr) << ',' << (with_timing ? num(m.total_seconds) : std::string("NA")) << '\n';
    }
  }
}

}  // namespace frailty_vb
