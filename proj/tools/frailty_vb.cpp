// frailty_vb: variational fits, simulation study, oracle checks.
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frailty_vb/cavi.hpp"
#include "frailty_vb/error.hpp"
#include "frailty_vb/io.hpp"
#include "frailty_vb/simulation.hpp"
#include "frailty_vb/verify.hpp"

using namespace frailty_vb;

namespace {

struct PriorFlags {
  std::vector<double> mu0;
  double v0 = 0.1;
  double alpha0 = 3.0;
  double omega0 = 2.0;
  double lambda0 = 3.0;
  double eta0 = 2.0;
  double delta = 0.01;
  std::size_t max_iter = 100;
  std::uint64_t seed = 1;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--mu0", mu0, "prior mean of the coefficients, comma-separated")->delimiter(',');
    app->add_option("--v0", v0, "prior precision of the coefficients")->capture_default_str();
    app->add_option("--alpha0", alpha0, "Inverse-Gamma shape for b")->capture_default_str();
    app->add_option("--omega0", omega0, "Inverse-Gamma scale for b")->capture_default_str();
    app->add_option("--lambda0", lambda0, "Inverse-Gamma shape for the frailty variance")->capture_default_str();
    app->add_option("--eta0", eta0, "Inverse-Gamma scale for the frailty variance")->capture_default_str();
    app->add_option("--delta", delta, "ELBO convergence threshold")->capture_default_str();
    app->add_option("--max-iter", max_iter, "maximum number of sweeps")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  RunConfig config(const std::string& command, std::size_t p) const {
    RunConfig c;
    c.command = command;
    c.hyper = Hyperparameters::defaults(p);
    if (!mu0.empty()) c.hyper.mu0 = Eigen::Map<const Eigen::VectorXd>(mu0.data(), static_cast<Eigen::Index>(mu0.size()));
    c.hyper.v0 = v0;
    c.hyper.alpha0 = alpha0;
    c.hyper.omega0 = omega0;
    c.hyper.lambda0 = lambda0;
    c.hyper.eta0 = eta0;
    c.delta = delta;
    c.max_iter = max_iter;
    c.seed = seed;
    c.output = out;
    c.validate(p);
    return c;
  }
};

struct TruthFlags {
  std::size_t K = 80;
  std::size_t n = 50;
  double d = 48.0;
  std::vector<double> beta{0.5, 0.2, 0.8};
  double b = 0.8;
  double sigma2 = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--K", K, "number of clusters")->capture_default_str();
    app->add_option("--n", n, "observations per cluster")->capture_default_str();
    app->add_option("--d", d, "upper bound of the uniform censoring time")->capture_default_str();
    app->add_option("--beta", beta, "true coefficients (intercept,x1,x2)")->delimiter(',')->capture_default_str();
    app->add_option("--b", b, "true scale")->capture_default_str();
    app->add_option("--sigma2", sigma2, "true frailty variance")->capture_default_str();
  }

  ScenarioSpec spec(std::uint64_t seed) const {
    ScenarioSpec s;
    s.K = K;
    s.n = n;
    s.censor_upper = d;
    s.beta_true = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    s.b_true = b;
    s.sigma2_true = sigma2;
    s.seed = seed;
    s.validate();
    return s;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(ValidationKind::MalformedInput, "cannot write " + path);
  out << text;
  if (!out) throw ValidationError(ValidationKind::MalformedInput, "failed writing " + path);
}

int run_fit(const std::string& input, const PriorFlags& flags) {
  const CsvData csv = read_csv_file(input);
  const ClusteredDataset data = validate_dataset(csv.rows, csv.covariate_names);
  RunConfig config = flags.config("fit", data.dimension());
  config.input = input;

  FitOptions options;
  options.delta = config.delta;
  options.max_iter = config.max_iter;
  const auto start = std::chrono::steady_clock::now();
  const FitResult result = fit(data, config.hyper, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const FitReport report = make_report(config, data, result, seconds);
  if (!config.output.empty()) write_text(config.output, to_json(report).dump(2) + "\n");
  write_summary_table(std::cout, report);
  return result.converged ? 0 : 2;
}

nlohmann::json metrics_json(const ReplicateMetrics& m, bool timing) {
  nlohmann::json params = nlohmann::json::array();
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  for (const ParameterMetrics& p : m.parameters)
    params.push_back({{"parameter", p.name},
                      {"truth", p.truth},
                      {"bias", num(p.bias)},
                      {"sd", num(p.sd)},
                      {"mse", num(p.mse)},
                      {"cr", num(p.cr)},
                      {"replicates_used", p.count}});
  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t r = 0; r < m.outcomes.size(); ++r)
    if (!m.outcomes[r].ok) failures.push_back({{"replicate", r}, {"error", m.outcomes[r].error}});
  nlohmann::json j{{"K", m.K},         {"n", m.n},           {"parameters", params},
                   {"failed", m.failed}, {"failures", failures}, {"converged", m.converged}};
  if (timing) {
    j["seconds"] = m.total_seconds;
    nlohmann::json per = nlohmann::json::array();
    for (const ReplicateOutcome& o : m.outcomes) per.push_back(o.seconds);
    j["replicate_seconds"] = per;
  }
  return j;
}

int run_simulate(const PriorFlags& flags, const TruthFlags& truth, std::size_t N, bool grid, bool timing,
                 const std::string& report_path) {
  const RunConfig config = flags.config("simulate", 3);
  ScenarioSpec spec = truth.spec(config.seed);
  spec.replicates = N;
  if (N < 1) throw ValidationError(ValidationKind::InvalidHyperparameter, "N must be at least 1");

  SimulationOptions options;
  options.delta = config.delta;
  options.max_iter = config.max_iter;
  std::vector<ReplicateMetrics> table;
  if (grid)
    table = scenario_grid({15, 30, 50, 80}, {5, 15, 30, 50}, spec, config.hyper, options);
  else
    table.push_back(run_replicates(spec, config.hyper, options));

  std::ostringstream csv;
  write_metrics_csv(csv, table, timing);
  if (config.output.empty())
    std::cout << csv.str();
  else
    write_text(config.output, csv.str());

  if (!report_path.empty()) {
    nlohmann::json scenarios = nlohmann::json::array();
    for (const ReplicateMetrics& m : table) scenarios.push_back(metrics_json(m, timing));
    const Hyperparameters& h = config.hyper;
    nlohmann::json j{{"schema_version", kReportSchemaVersion},
                     {"config",
                      {{"command", "simulate"},
                       {"seed", config.seed},
                       {"delta", config.delta},
                       {"max_iter", config.max_iter},
                       {"replicates", N},
                       {"grid", grid},
                       {"truth",
                        {{"beta", truth.beta}, {"b", truth.b}, {"sigma2_gamma", truth.sigma2}, {"d", truth.d}}},
                       {"hyperparameters",
                        {{"mu0", std::vector<double>(h.mu0.data(), h.mu0.data() + h.mu0.size())},
                         {"v0", h.v0},
                         {"alpha0", h.alpha0},
                         {"omega0", h.omega0},
                         {"lambda0", h.lambda0},
                         {"eta0", h.eta0}}}}},
                     {"scenarios", scenarios}};
    write_text(report_path, j.dump(2) + "\n");
  }
  std::size_t failed = 0;
  for (const ReplicateMetrics& m : table) failed += m.failed;
  if (failed > 0) {
    std::cerr << failed << " replicate fit(s) failed and were excluded\n";
    return 1;
  }
  return 0;
}

int run_verify_cmd(const std::vector<std::string>& checks, const std::string& table_path) {
  const ApproximationTable table = table_path.empty() ? ApproximationTable::standard() : read_table_file(table_path);
  const std::vector<CheckResult> results = run_verify(checks, table);
  bool all = true;
  for (const CheckResult& r : results) {
    std::cout << std::left << std::setw(20) << r.name << (r.passed ? "PASS" : "FAIL") << "  " << r.detail << '\n';
    if (!r.passed) {
      all = false;
      std::cerr << "check failed: " << r.name << '\n';
    }
  }
  return all ? 0 : 1;
}

int run_generate(const TruthFlags& truth, std::uint64_t seed, std::size_t replicate, const std::string& out) {
  const ScenarioSpec spec = truth.spec(seed);
  CsvData csv;
  csv.rows = generate_sample(spec, replicate).rows;
  csv.covariate_names = {"intercept", "x1", "x2"};
  std::ostringstream os;
  write_csv(os, csv);
  if (out.empty())
    std::cout << os.str();
  else
    write_text(out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field variational Bayes for the shared-frailty log-logistic AFT model"};
  app.require_subcommand(1);

  PriorFlags fit_flags;
  std::string input;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a clustered survival CSV (cluster,time,event,x1,...)");
  fit_cmd->add_option("input", input, "input CSV")->required();
  fit_flags.attach(fit_cmd);
  fit_cmd->add_option("--out", fit_flags.out, "JSON report path");

  PriorFlags sim_flags;
  TruthFlags truth;
  std::size_t N = 100;
  bool grid = false;
  bool timing = false;
  std::string report_path;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run the simulation study");
  sim_flags.attach(sim_cmd);
  truth.attach(sim_cmd);
  sim_cmd->add_option("--N", N, "replicates per scenario")->capture_default_str();
  sim_cmd->add_flag("--grid", grid, "run K in {15,30,50,80} x n in {5,15,30,50}");
  sim_cmd->add_flag("--timing", timing, "fill the seconds column with wall-clock times");
  sim_cmd->add_option("--out", sim_flags.out, "metrics CSV path (default: stdout)");
  sim_cmd->add_option("--report", report_path, "JSON report path");

  std::vector<std::string> checks;
  std::string table_path;
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the oracle checks");
  verify_cmd->add_option("--checks", checks, "comma-separated subset of checks")->delimiter(',');
  verify_cmd->add_option("--coeff-table", table_path, "JSON coefficient table to scan instead of the standard one");

  TruthFlags gen_truth;
  std::uint64_t gen_seed = 1;
  std::size_t replicate = 0;
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("generate", "write one simulated dataset as CSV");
  gen_truth.attach(gen_cmd);
  gen_cmd->add_option("--seed", gen_seed, "random seed")->capture_default_str();
  gen_cmd->add_option("--replicate", replicate, "replicate index")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return 1;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(input, fit_flags);
    if (sim_cmd->parsed()) return run_simulate(sim_flags, truth, N, grid, timing, report_path);
    if (verify_cmd->parsed()) return run_verify_cmd(checks, table_path);
    if (gen_cmd->parsed()) return run_generate(gen_truth, gen_seed, replicate, gen_out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
