#include "tensorica/error.hpp"

namespace tensorica {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::InvalidDistribution: return "invalid-distribution";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::DegenerateVector: return "degenerate-vector";
    case ErrorKind::ScheduleInfeasible: return "schedule-infeasible";
    case ErrorKind::IndexOutOfRange: return "index-out-of-range";
    case ErrorKind::InvalidInstance: return "invalid-instance";
    case ErrorKind::HypothesisViolated: return "hypothesis-violated";
    case ErrorKind::InvalidSampler: return "invalid-sampler";
    case ErrorKind::EstimateFailed: return "estimate-failed";
    case ErrorKind::InfeasibleDimension: return "infeasible-dimension";
    case ErrorKind::FitFailed: return "fit-failed";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

Error Error::with_iteration(std::int64_t t) const {
  Error e(kind_, std::string(what()).substr(to_string(kind_).size() + 2) + " (at iteration " +
                     std::to_string(t) + ")");
  e.iteration_ = t;
  return e;
}

}  // namespace tensorica
