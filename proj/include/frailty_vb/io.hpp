#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "frailty_vb/cavi.hpp"
#include "frailty_vb/dataset.hpp"
#include "frailty_vb/model.hpp"
#include "frailty_vb/piecewise.hpp"
#include "frailty_vb/summary.hpp"

namespace frailty_vb {

inline constexpr int kReportSchemaVersion = 1;

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

struct CsvData {
  std::vector<RawRow> rows;
  std::vector<std::string> covariate_names;  // "intercept" followed by header names
};

/// Header `cluster,time,event,x1,...`; an intercept column of 1 is prepended
/// to every row. Malformed rows throw ValidationError naming the line.
CsvData read_csv(std::istream& is);
CsvData read_csv_file(const std::string& path);

void write_csv(std::ostream& os, const CsvData& data);

/// Re-emits a dataset in its original row order.
void write_dataset_csv(std::ostream& os, const ClusteredDataset& data);

struct RunConfig {
  std::string command;
  Hyperparameters hyper;
  double delta = 0.01;
  std::size_t max_iter = 100;
  std::uint64_t seed = 1;
  std::string input;
  std::string output;

  void validate(std::size_t p) const;
};

struct FitReport {
  RunConfig config;
  std::size_t clusters = 0;
  std::size_t observations = 0;
  std::size_t dimension = 0;
  std::size_t event_count = 0;
  std::size_t iterations = 0;
  bool converged = false;
  double delta_used = 0.0;
  std::vector<double> elbo_trace;
  PosteriorSummary summary;
  std::vector<Estimate> ranked_effects;  // random effects sorted by mean
  double seconds = 0.0;
};

FitReport make_report(const RunConfig& config, const ClusteredDataset& data, const FitResult& result,
                      double seconds);

nlohmann::json to_json(const FitReport& report);
FitReport report_from_json(const nlohmann::json& j);

void write_summary_table(std::ostream& os, const FitReport& report);

/// Keys quad_breaks, rho, zeta, lin_breaks, phi.
ApproximationTable table_from_json(const nlohmann::json& j);
ApproximationTable read_table_file(const std::string& path);

}  // namespace frailty_vb
