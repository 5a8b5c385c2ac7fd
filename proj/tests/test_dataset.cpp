#include <doctest.h>

#include <cmath>
#include <vector>

#include "frailty_vb/dataset.hpp"
#include "frailty_vb/error.hpp"
#include "frailty_vb/model.hpp"

using namespace frailty_vb;

namespace {

RawRow row(const std::string& c, double t, bool e, std::vector<double> x = {1.0}) { return {c, t, e, std::move(x)}; }

ValidationKind kind_of(const std::vector<RawRow>& rows) {
  try {
    validate_dataset(rows);
  } catch (const ValidationError& e) {
    return e.kind();
  }
  FAIL("expected a validation error");
  return ValidationKind::MalformedInput;
}

}  // namespace

TEST_CASE("two rows in one cluster") {
  const std::vector<RawRow> rows{row("A", 1.0, true), row("A", 2.0, false)};
  const ClusteredDataset d = validate_dataset(rows);
  CHECK(d.clusters() == 1);
  CHECK(d.cluster_size(0) == 2);
  CHECK(d.log_times()[0] == 0.0);
  CHECK(d.log_times()[1] == std::log(2.0));
  CHECK(d.event_count() == 1);
}

TEST_CASE("clusters are indexed by first appearance") {
  const std::vector<RawRow> rows{row("A", 1.0, true), row("B", 2.0, true), row("A", 3.0, false)};
  const ClusteredDataset d = validate_dataset(rows);
  REQUIRE(d.clusters() == 2);
  CHECK(d.cluster_labels() == std::vector<std::string>{"A", "B"});
  CHECK(d.cluster_size(0) == 2);
  CHECK(d.cluster_size(1) == 1);
  CHECK(d.size() == 3);
  // grouped storage keeps the original row for each observation
  CHECK(d.source_row(0) == 0);
  CHECK(d.source_row(1) == 2);
  CHECK(d.source_row(2) == 1);
  CHECK(d.times()[1] == 3.0);
  CHECK(d.cluster_of()[2] == 1);
}

TEST_CASE("labels map bijectively onto 0..K-1 and counts add up") {
  std::vector<RawRow> rows;
  const char* labels[] = {"z", "y", "z", "x", "y", "w", "z"};
  for (int i = 0; i < 7; ++i) rows.push_back(row(labels[i], 1.0 + i, i % 2 == 0, {1.0, 0.5 * i}));
  const ClusteredDataset d = validate_dataset(rows);
  CHECK(d.clusters() == 4);
  std::size_t total = 0;
  for (std::size_t i = 0; i < d.clusters(); ++i) {
    CHECK(d.cluster_size(i) >= 1);
    total += d.cluster_size(i);
    for (std::size_t j = d.cluster_begin(i); j < d.cluster_end(i); ++j) CHECK(d.cluster_of()[j] == i);
  }
  CHECK(total == rows.size());
  for (std::size_t j = 0; j < d.size(); ++j) {
    const RawRow& src = rows[d.source_row(j)];
    CHECK(d.cluster_labels()[d.cluster_of()[j]] == src.cluster);
    CHECK(d.covariate(j, 1) == src.covariates[1]);
    CHECK(d.log_times()[j] == std::log(src.time));
  }
}

TEST_CASE("validation failures are distinct") {
  CHECK(kind_of({}) == ValidationKind::EmptyInput);
  CHECK(kind_of({row("A", 0.0, true)}) == ValidationKind::NonPositiveTime);
  CHECK(kind_of({row("A", -1.0, true)}) == ValidationKind::NonPositiveTime);
  CHECK(kind_of({row("A", 1.0, true, {1.0, 2.0}), row("A", 1.0, true, {1.0})}) == ValidationKind::CovariateLength);
  CHECK(kind_of({row("A", 1.0, true, {0.5, 2.0})}) == ValidationKind::InterceptNotOne);
  CHECK(kind_of({row("A", std::nan(""), true)}) == ValidationKind::NonFiniteValue);
}

TEST_CASE("non-positive time message") {
  const std::vector<RawRow> rows{row("A", 0.0, true)};
  CHECK_THROWS_WITH_AS(validate_dataset(rows), doctest::Contains("non-positive time"), ValidationError);
}

TEST_CASE("observation view") {
  const std::vector<RawRow> rows{row("A", 2.5, true, {1.0, 3.0, 4.0})};
  const Observation o = validate_dataset(rows).observation(0);
  CHECK(o.time == 2.5);
  CHECK(o.event);
  CHECK(o.covariates == std::vector<double>{1.0, 3.0, 4.0});
  CHECK(o.cluster == 0);
}

TEST_CASE("hyperparameter validation") {
  Hyperparameters h = Hyperparameters::defaults(3);
  CHECK(h.v0 == 0.1);
  CHECK(h.alpha0 == 3.0);
  CHECK(h.omega0 == 2.0);
  CHECK(h.lambda0 == 3.0);
  CHECK(h.eta0 == 2.0);
  CHECK(h.mu0.isZero());
  CHECK_NOTHROW(h.validate(3));
  CHECK_THROWS_AS(h.validate(2), ValidationError);
  h.omega0 = 0.0;
  CHECK_THROWS_AS(h.validate(3), ValidationError);
}
