#include "frailty_vb/dataset.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "frailty_vb/error.hpp"

namespace frailty_vb {

const char* to_string(ValidationKind kind) {
  switch (kind) {
    case ValidationKind::EmptyInput: return "empty input";
    case ValidationKind::NonPositiveTime: return "non-positive time";
    case ValidationKind::NonFiniteValue: return "non-finite value";
    case ValidationKind::CovariateLength: return "inconsistent covariate length";
    case ValidationKind::InterceptNotOne: return "first covariate is not 1";
    case ValidationKind::InvalidEvent: return "invalid event flag";
    case ValidationKind::InvalidHyperparameter: return "invalid hyperparameter";
    case ValidationKind::DimensionMismatch: return "dimension mismatch";
    case ValidationKind::MalformedInput: return "malformed input";
  }
  return "validation error";
}

std::span<const double> ClusteredDataset::column(std::size_t k) const {
  if (k >= dimension_) throw std::out_of_range("covariate column out of range");
  return std::span<const double>(design_).subspan(k * size(), size());
}

Observation ClusteredDataset::observation(std::size_t obs) const {
  Observation o;
  o.time = times_.at(obs);
  o.event = events_[obs] != 0.0;
  o.cluster = cluster_of_[obs];
  o.covariates.resize(dimension_);
  for (std::size_t k = 0; k < dimension_; ++k) o.covariates[k] = covariate(obs, k);
  return o;
}

namespace {

std::string row_tag(std::size_t r) { return " (row " + std::to_string(r + 1) + ")"; }

}  // namespace

ClusteredDataset validate_dataset(std::span<const RawRow> rows, std::vector<std::string> covariate_names) {
  if (rows.empty()) throw ValidationError(ValidationKind::EmptyInput, "empty input: no observations");

  const std::size_t p = rows.front().covariates.size();
  if (p == 0) throw ValidationError(ValidationKind::CovariateLength, "covariate row is empty" + row_tag(0));

  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> cluster_of_row(rows.size());
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RawRow& row = rows[r];
    if (!std::isfinite(row.time))
      throw ValidationError(ValidationKind::NonFiniteValue, "non-finite time" + row_tag(r));
    if (!(row.time > 0.0))
      throw ValidationError(ValidationKind::NonPositiveTime, "non-positive time" + row_tag(r));
    if (row.covariates.size() != p)
      throw ValidationError(ValidationKind::CovariateLength,
                            "covariate length " + std::to_string(row.covariates.size()) + ", expected " +
                                std::to_string(p) + row_tag(r));
    if (row.covariates[0] != 1.0)
      throw ValidationError(ValidationKind::InterceptNotOne, "first covariate must be 1" + row_tag(r));
    for (double x : row.covariates)
      if (!std::isfinite(x)) throw ValidationError(ValidationKind::NonFiniteValue, "non-finite covariate" + row_tag(r));
    auto [it, inserted] = index.try_emplace(row.cluster, labels.size());
    if (inserted) labels.push_back(row.cluster);
    cluster_of_row[r] = it->second;
  }

  if (covariate_names.empty()) {
    covariate_names.push_back("intercept");
    for (std::size_t k = 1; k < p; ++k) covariate_names.push_back("x" + std::to_string(k));
  } else if (covariate_names.size() != p) {
    throw ValidationError(ValidationKind::DimensionMismatch, "covariate names do not match covariate length");
  }

  const std::size_t K = labels.size();
  const std::size_t N = rows.size();
  ClusteredDataset d;
  d.dimension_ = p;
  d.labels_ = std::move(labels);
  d.covariate_names_ = std::move(covariate_names);

  std::vector<std::size_t> counts(K, 0);
  for (std::size_t c : cluster_of_row) ++counts[c];
  d.offsets_.assign(K + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), d.offsets_.begin() + 1);

  std::vector<std::size_t> cursor(d.offsets_.begin(), d.offsets_.end() - 1);
  d.source_row_.resize(N);
  for (std::size_t r = 0; r < N; ++r) d.source_row_[cursor[cluster_of_row[r]]++] = r;

  d.times_.resize(N);
  d.log_times_.resize(N);
  d.events_.resize(N);
  d.cluster_of_.resize(N);
  d.design_.resize(N * p);
  for (std::size_t j = 0; j < N; ++j) {
    const RawRow& row = rows[d.source_row_[j]];
    d.times_[j] = row.time;
    d.log_times_[j] = std::log(row.time);
    d.events_[j] = row.event ? 1.0 : 0.0;
    d.event_count_ += row.event ? 1 : 0;
    d.cluster_of_[j] = cluster_of_row[d.source_row_[j]];
    for (std::size_t k = 0; k < p; ++k) d.design_[k * N + j] = row.covariates[k];
  }
  return d;
}

}  // namespace frailty_vb
