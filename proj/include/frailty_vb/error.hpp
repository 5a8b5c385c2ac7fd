#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace frailty_vb {

enum class ValidationKind {
  EmptyInput,
  NonPositiveTime,
  NonFiniteValue,
  CovariateLength,
  InterceptNotOne,
  InvalidEvent,
  InvalidHyperparameter,
  DimensionMismatch,
  MalformedInput,
};

const char* to_string(ValidationKind kind);

/// Input rejected before any numerical work starts.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(ValidationKind kind, const std::string& what)
      : std::invalid_argument(what), kind_(kind) {}

  ValidationKind kind() const noexcept { return kind_; }

 private:
  ValidationKind kind_;
};

/// A variational update produced an unusable value (non-SPD precision,
/// omega <= 0, non-finite parameters). Carries the 1-based sweep index.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace frailty_vb
