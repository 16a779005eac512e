#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tensorica {

enum class ErrorKind {
  InvalidDimension,
  InvalidDistribution,
  InvalidArgument,
  DegenerateVector,
  ScheduleInfeasible,
  IndexOutOfRange,
  InvalidInstance,
  HypothesisViolated,
  InvalidSampler,
  EstimateFailed,
  InfeasibleDimension,
  FitFailed,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  /// Iteration at which a solver run failed, when known.
  std::optional<std::int64_t> iteration() const noexcept { return iteration_; }
  Error with_iteration(std::int64_t t) const;

 private:
  ErrorKind kind_;
  std::optional<std::int64_t> iteration_;
};

}  // namespace tensorica
