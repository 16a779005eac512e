#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "tensorica/diagnostics.hpp"

namespace tensorica {

struct ScalingSummary;

inline constexpr const char* kTraceHeader = "run_id,t,phase,tan_angle_min,component_index";
inline constexpr const char* kScalingHeader = "axis,value,mean_error,stderr,n_runs";

/// Shortest decimal that round-trips to the same double; empty for NaN/inf.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);

struct LabeledTrace {
  int run_id = 0;
  const RunTrace* trace = nullptr;
};

void write_trace_csv(std::ostream& os, std::span<const LabeledTrace> traces);
void write_scaling_csv(std::ostream& os, const ScalingSummary& summary);

/// File variants; throw ErrorKind::Io on failure.
void emit_trace_file(const std::filesystem::path& path, std::span<const LabeledTrace> traces);
void emit_scaling_file(const std::filesystem::path& path, const ScalingSummary& summary);

}  // namespace tensorica
