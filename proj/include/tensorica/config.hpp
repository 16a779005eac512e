#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tensorica/datagen.hpp"
#include "tensorica/solver.hpp"

namespace tensorica {

enum class SweepAxis { D, T };

std::string to_string(SweepAxis axis);

/// Complete, seedable description of one experiment.
///
/// Text form is flat `key = value` lines; `#` starts a comment and list
/// values are comma separated. Recognised keys:
///
///   name, d, T, distribution (mixture-gaussian | gaussian-bernoulli),
///   mixture_p, mixture_offset, mixture_variance, bernoulli_p, bernoulli_variance,
///   B, schedule (two-phase-practical | two-phase | constant-warm |
///   constant-uniform | fixed), eta, init (uniform | warm), warm_component,
///   warm_tan, kurtosis (known | estimate), kurtosis_warmup, replications,
///   seed, record_stride, full_resolution, output_dir, window_fraction,
///   regime_max, workers, write_traces
struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<int> d{20};
  std::vector<std::int64_t> T{1'000'000};
  SourceKind distribution = SourceKind::GaussianBernoulli;
  MixtureGaussianParams mixture;
  GaussianBernoulliParams bernoulli;
  std::optional<double> B;
  ScheduleKind schedule = ScheduleKind::TwoPhasePractical;
  double fixed_eta = 0.0;
  InitSpec init = InitUniform{};
  std::optional<std::int64_t> kurtosis_warmup;
  int replications = 5;
  std::uint64_t seed = 1;
  std::int64_t record_stride = 0;
  bool full_resolution = false;
  std::filesystem::path output_dir = "out";
  double window_fraction = 0.6;
  /// Sweep points with d^4 / T above this are left out of slope fits.
  std::optional<double> regime_max;
  unsigned workers = 0;
  bool write_traces = true;

  /// Throws InvalidConfig on violated invariants.
  void validate() const;

  /// Builds the source law; throws InvalidDistribution for bad parameters.
  SourceDistribution source() const;

  /// The axis holding more than one value, if any.
  std::optional<SweepAxis> sweep_axis() const;
};

/// Applies one `key = value` setting (also used for command-line overrides).
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` rendering; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& config);

}  // namespace tensorica
