#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace frailty_vb {

/// One input row before validation. `covariates` includes the leading 1.
struct RawRow {
  std::string cluster;
  double time = 0.0;
  bool event = false;
  std::vector<double> covariates;
};

struct Observation {
  double time = 0.0;
  bool event = false;
  std::vector<double> covariates;
  std::size_t cluster = 0;
};

/// Right-censored observations grouped by cluster.
///
/// Storage is structure-of-arrays with observations ordered cluster by
/// cluster (stable within a cluster), so each cluster is a contiguous range
/// and the design matrix is column-major N x p. Cluster indices follow the
/// order in which labels first appear in the input.
class ClusteredDataset {
 public:
  std::size_t size() const noexcept { return log_times_.size(); }
  std::size_t clusters() const noexcept { return offsets_.size() - 1; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t event_count() const noexcept { return event_count_; }

  std::size_t cluster_begin(std::size_t i) const { return offsets_.at(i); }
  std::size_t cluster_end(std::size_t i) const { return offsets_.at(i + 1); }
  std::size_t cluster_size(std::size_t i) const { return cluster_end(i) - cluster_begin(i); }
  std::span<const std::size_t> cluster_offsets() const noexcept { return offsets_; }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> log_times() const noexcept { return log_times_; }
  /// Event indicators as 0.0 / 1.0.
  std::span<const double> events() const noexcept { return events_; }
  /// Column-major N x p design matrix.
  std::span<const double> design() const noexcept { return design_; }
  std::span<const double> column(std::size_t k) const;
  double covariate(std::size_t obs, std::size_t k) const { return design_[k * size() + obs]; }
  std::span<const std::size_t> cluster_of() const noexcept { return cluster_of_; }

  const std::vector<std::string>& cluster_labels() const noexcept { return labels_; }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }
  /// Position of observation `obs` in the validated input.
  std::size_t source_row(std::size_t obs) const { return source_row_.at(obs); }

  Observation observation(std::size_t obs) const;

  /// Validates rows and builds the dataset. `covariate_names` labels the p
  /// covariate columns (intercept first); defaults are generated when empty.
  friend ClusteredDataset validate_dataset(std::span<const RawRow> rows,
                                           std::vector<std::string> covariate_names);

 private:
  ClusteredDataset() = default;

  std::size_t dimension_ = 0;
  std::size_t event_count_ = 0;
  std::vector<double> times_;
  std::vector<double> log_times_;
  std::vector<double> events_;
  std::vector<double> design_;
  std::vector<std::size_t> cluster_of_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> source_row_;
  std::vector<std::string> labels_;
  std::vector<std::string> covariate_names_;
};

ClusteredDataset validate_dataset(std::span<const RawRow> rows,
                                  std::vector<std::string> covariate_names = {});

}  // namespace frailty_vb
