#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tensorica/config.hpp"
#include "tensorica/diagnostics.hpp"

namespace tensorica {

/// One finished replication at one (d, T) point.
struct RunResult {
  int run_id = 0;
  int replication = 0;
  int d = 0;
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  RunTrace trace;
  double final_error = 0.0;
  int final_component = 1;
  double window_error = 0.0;
  std::optional<std::int64_t> warm_entry;  // first recorded t below 1/sqrt(3)
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // sorted by run_id
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

inline constexpr const char* kSummaryHeader =
    "run_id,replication,d,T,seed,final_tan_angle,component_index,window_mean_error,warm_entry_t";

/// Seed of replication `r`; shared by every sweep point (common random numbers).
std::uint64_t replication_seed(std::uint64_t seed, int replication);

/// Worker count: TENSORICA_WORKERS, else config.workers, else hardware threads.
unsigned resolve_workers(const ExperimentConfig& config);

/// Runs every (d, T, replication) of the config without touching the filesystem.
ExperimentResult execute_runs(const ExperimentConfig& config);

/// execute_runs plus one trace CSV per run and a summary CSV under output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct ScalingPoint {
  double value = 0.0;
  double mean_error = 0.0;
  double stderr_ = 0.0;
  int n_runs = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  int n_used = 0;
};

struct ScalingSummary {
  SweepAxis axis = SweepAxis::T;
  std::vector<ScalingPoint> points;
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  std::vector<std::string> warnings;
};

/// OLS of log(mean_error) on log(value). Points with non-positive or
/// non-finite error are skipped with a warning; fewer than 3 usable points
/// raise FitFailed.
SlopeFit fit_loglog_slope(const std::vector<ScalingPoint>& points,
                          std::vector<std::string>* warnings = nullptr);

/// Aggregates per-point final-window errors of finished runs.
ScalingSummary summarize_scaling(const ExperimentConfig& config, const ExperimentResult& result);

/// Runs the sweep, writes <name>_scaling.csv (plus traces and summary when
/// enabled) and returns the fitted summary.
ScalingSummary scaling_sweep(const ExperimentConfig& config, ExperimentResult* result = nullptr);

}  // namespace tensorica
