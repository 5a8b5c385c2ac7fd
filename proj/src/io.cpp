#include "frailty_vb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "frailty_vb/error.hpp"

namespace frailty_vb {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

}  // namespace

CsvData read_csv(std::istream& is) {
  CsvData data;
  std::string line;
  std::size_t lineno = 0;
  std::size_t columns = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_fields(line);
    for (auto& s : f) s = trim(s);
    if (!have_header) {
      if (f.size() < 3 || f[0] != "cluster" || f[1] != "time" || f[2] != "event")
        throw ValidationError(ValidationKind::MalformedInput,
                              "header must start with cluster,time,event" + at_line(lineno));
      columns = f.size();
      data.covariate_names.push_back("intercept");
      for (std::size_t k = 3; k < f.size(); ++k) data.covariate_names.push_back(f[k]);
      have_header = true;
      continue;
    }
    if (f.size() != columns)
      throw ValidationError(ValidationKind::MalformedInput, "expected " + std::to_string(columns) + " fields, found " +
                                                                std::to_string(f.size()) + at_line(lineno));
    RawRow row;
    row.cluster = f[0];
    if (row.cluster.empty()) throw ValidationError(ValidationKind::MalformedInput, "empty cluster label" + at_line(lineno));
    if (!parse_double(f[1], row.time) || !std::isfinite(row.time))
      throw ValidationError(ValidationKind::MalformedInput, "malformed time" + at_line(lineno));
    if (!(row.time > 0.0)) throw ValidationError(ValidationKind::NonPositiveTime, "non-positive time" + at_line(lineno));
    if (f[2] == "1") {
      row.event = true;
    } else if (f[2] == "0") {
      row.event = false;
    } else {
      throw ValidationError(ValidationKind::InvalidEvent, "invalid event flag" + at_line(lineno));
    }
    row.covariates.reserve(columns - 2);
    row.covariates.push_back(1.0);
    for (std::size_t k = 3; k < columns; ++k) {
      double v = 0.0;
      if (!parse_double(f[k], v) || !std::isfinite(v))
        throw ValidationError(ValidationKind::MalformedInput, "malformed covariate '" + data.covariate_names[k - 2] + "'" +
                                                                  at_line(lineno));
      row.covariates.push_back(v);
    }
    data.rows.push_back(std::move(row));
  }
  if (!have_header) throw ValidationError(ValidationKind::EmptyInput, "empty input: missing header");
  if (data.rows.empty()) throw ValidationError(ValidationKind::EmptyInput, "empty input: no observations");
  return data;
}

CsvData read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(ValidationKind::MalformedInput, "cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& os, const CsvData& data) {
  os << "cluster,time,event";
  for (std::size_t k = 1; k < data.covariate_names.size(); ++k) os << ',' << data.covariate_names[k];
  os << '\n';
  for (const RawRow& r : data.rows) {
    os << r.cluster << ',' << format_double(r.time) << ',' << (r.event ? 1 : 0);
    for (std::size_t k = 1; k < r.covariates.size(); ++k) os << ',' << format_double(r.covariates[k]);
    os << '\n';
  }
}

void write_dataset_csv(std::ostream& os, const ClusteredDataset& data) {
  CsvData out;
  out.covariate_names = data.covariate_names();
  out.rows.resize(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    const Observation o = data.observation(j);
    RawRow& r = out.rows[data.source_row(j)];
    r.cluster = data.cluster_labels()[o.cluster];
    r.time = o.time;
    r.event = o.event;
    r.covariates = o.covariates;
  }
  write_csv(os, out);
}

void RunConfig::validate(std::size_t p) const {
  hyper.validate(p);
  if (!(delta > 0.0)) throw ValidationError(ValidationKind::InvalidHyperparameter, "delta must be positive");
  if (max_iter < 1) throw ValidationError(ValidationKind::InvalidHyperparameter, "max-iter must be at least 1");
}

FitReport make_report(const RunConfig& config, const ClusteredDataset& data, const FitResult& result, double seconds) {
  FitReport r;
  r.config = config;
  r.clusters = data.clusters();
  r.observations = data.size();
  r.dimension = data.dimension();
  r.event_count = result.event_count;
  r.iterations = result.iterations;
  r.converged = result.converged;
  r.delta_used = result.delta_used;
  r.elbo_trace = result.elbo_trace;
  r.summary = summarize(result, data);
  r.ranked_effects = r.summary.random_effects;
  std::stable_sort(r.ranked_effects.begin(), r.ranked_effects.end(),
                   [](const Estimate& a, const Estimate& b) { return a.mean < b.mean; });
  r.seconds = seconds;
  return r;
}

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_of(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json estimate_json(const Estimate& e) {
  return {{"name", e.name},
          {"mean", number(e.mean)},
          {"lower", number(e.interval.lower)},
          {"upper", number(e.interval.upper)},
          {"available", e.available}};
}

Estimate estimate_from(const json& j) {
  Estimate e;
  e.name = j.at("name").get<std::string>();
  e.mean = number_of(j.at("mean"));
  e.interval = {number_of(j.at("lower")), number_of(j.at("upper"))};
  e.available = j.at("available").get<bool>();
  return e;
}

json estimates_json(const std::vector<Estimate>& v) {
  json a = json::array();
  for (const Estimate& e : v) a.push_back(estimate_json(e));
  return a;
}

std::vector<Estimate> estimates_from(const json& j) {
  std::vector<Estimate> v;
  for (const json& e : j) v.push_back(estimate_from(e));
  return v;
}

}  // namespace

json to_json(const FitReport& r) {
  const Hyperparameters& h = r.config.hyper;
  json mu0 = json::array();
  for (Eigen::Index k = 0; k < h.mu0.size(); ++k) mu0.push_back(h.mu0[k]);
  json trace = json::array();
  for (double e : r.elbo_trace) trace.push_back(number(e));

  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = {{"command", r.config.command},
                 {"input", r.config.input},
                 {"output", r.config.output},
                 {"seed", r.config.seed},
                 {"delta", number(r.config.delta)},
                 {"max_iter", r.config.max_iter},
                 {"hyperparameters",
                  {{"mu0", mu0},
                   {"v0", h.v0},
                   {"alpha0", h.alpha0},
                   {"omega0", h.omega0},
                   {"lambda0", h.lambda0},
                   {"eta0", h.eta0}}}};
  j["data"] = {{"K", r.clusters}, {"observations", r.observations}, {"p", r.dimension}, {"event_count", r.event_count}};
  j["fit"] = {{"iterations", r.iterations},
              {"converged", r.converged},
              {"delta_used", number(r.delta_used)},
              {"elbo_trace", trace},
              {"seconds", r.seconds}};
  j["summary"] = {{"coefficients", estimates_json(r.summary.coefficients)},
                  {"b", estimate_json(r.summary.b)},
                  {"sigma2_gamma", estimate_json(r.summary.sigma2_gamma)},
                  {"icc", number(r.summary.icc)},
                  {"icc_available", r.summary.icc_available},
                  {"random_effects", estimates_json(r.summary.random_effects)}};
  j["ranked_random_effects"] = estimates_json(r.ranked_effects);
  return j;
}

FitReport report_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kReportSchemaVersion)
    throw ValidationError(ValidationKind::MalformedInput, "unsupported report schema_version");
  FitReport r;
  const json& c = j.at("config");
  r.config.command = c.at("command").get<std::string>();
  r.config.input = c.at("input").get<std::string>();
  r.config.output = c.at("output").get<std::string>();
  r.config.seed = c.at("seed").get<std::uint64_t>();
  r.config.delta = number_of(c.at("delta"));
  r.config.max_iter = c.at("max_iter").get<std::size_t>();
  const json& h = c.at("hyperparameters");
  const auto mu0 = h.at("mu0").get<std::vector<double>>();
  r.config.hyper.mu0 = Eigen::Map<const Eigen::VectorXd>(mu0.data(), static_cast<Eigen::Index>(mu0.size()));
  r.config.hyper.v0 = h.at("v0").get<double>();
  r.config.hyper.alpha0 = h.at("alpha0").get<double>();
  r.config.hyper.omega0 = h.at("omega0").get<double>();
  r.config.hyper.lambda0 = h.at("lambda0").get<double>();
  r.config.hyper.eta0 = h.at("eta0").get<double>();
  const json& d = j.at("data");
  r.clusters = d.at("K").get<std::size_t>();
  r.observations = d.at("observations").get<std::size_t>();
  r.dimension = d.at("p").get<std::size_t>();
  r.event_count = d.at("event_count").get<std::size_t>();
  const json& f = j.at("fit");
  r.iterations = f.at("iterations").get<std::size_t>();
  r.converged = f.at("converged").get<bool>();
  r.delta_used = number_of(f.at("delta_used"));
  for (const json& e : f.at("elbo_trace")) r.elbo_trace.push_back(number_of(e));
  r.seconds = f.at("seconds").get<double>();
  const json& s = j.at("summary");
  r.summary.coefficients = estimates_from(s.at("coefficients"));
  r.summary.b = estimate_from(s.at("b"));
  r.summary.sigma2_gamma = estimate_from(s.at("sigma2_gamma"));
  r.summary.icc = number_of(s.at("icc"));
  r.summary.icc_available = s.at("icc_available").get<bool>();
  r.summary.random_effects = estimates_from(s.at("random_effects"));
  r.ranked_effects = estimates_from(j.at("ranked_random_effects"));
  return r;
}

void write_summary_table(std::ostream& os, const FitReport& r) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << "clusters " << r.clusters << ", observations " << r.observations << ", events " << r.event_count << '\n';
  os << (r.converged ? "converged" : "not converged") << " after " << r.iterations << " iterations";
  if (!r.elbo_trace.empty()) os << ", ELBO " << std::setprecision(10) << r.elbo_trace.back();
  os << "\n\n";
  os << std::left << std::setw(16) << "parameter" << std::right << std::setw(12) << "mean" << std::setw(12) << "2.5%"
     << std::setw(12) << "97.5%" << '\n';
  auto line = [&](const Estimate& e) {
    os << std::left << std::setw(16) << e.name << std::right << std::fixed << std::setprecision(5);
    if (e.available)
      os << std::setw(12) << e.mean;
    else
      os << std::setw(12) << "NA";
    os << std::setw(12) << e.interval.lower << std::setw(12) << e.interval.upper << '\n';
    os.unsetf(std::ios::floatfield);
  };
  for (const Estimate& e : r.summary.coefficients) line(e);
  line(r.summary.b);
  line(r.summary.sigma2_gamma);
  os << std::left << std::setw(16) << "icc" << std::right << std::fixed << std::setprecision(5) << std::setw(12);
  if (r.summary.icc_available)
    os << r.summary.icc << '\n';
  else
    os << "NA" << '\n';
  os.flags(flags);
  os.precision(precision);
}

ApproximationTable table_from_json(const json& j) {
  auto fill = [&](const char* key, auto& arr) {
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != arr.size())
      throw ValidationError(ValidationKind::MalformedInput,
                            std::string("table entry '") + key + "' needs " + std::to_string(arr.size()) + " values");
    std::copy(v.begin(), v.end(), arr.begin());
  };
  ApproximationTable t = ApproximationTable::standard();
  try {
    fill("quad_breaks", t.quad_breaks);
    fill("rho", t.rho);
    fill("zeta", t.zeta);
    fill("lin_breaks", t.lin_breaks);
    fill("phi", t.phi);
  } catch (const json::exception& e) {
    throw ValidationError(ValidationKind::MalformedInput, std::string("coefficient table: ") + e.what());
  }
  t.validate();
  return t;
}

ApproximationTable read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(ValidationKind::MalformedInput, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(ValidationKind::MalformedInput, path + ": " + e.what());
  }
  return table_from_json(j);
}

}  // namespace frailty_vb
