#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "tensorica/datagen.hpp"
#include "tensorica/diagnostics.hpp"

namespace tensorica {

enum class ScheduleKind { ConstantWarm, ConstantUniform, TwoPhase, TwoPhasePractical, Fixed };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& text);

struct ScheduleParams {
  ScheduleKind kind = ScheduleKind::TwoPhasePractical;
  std::int64_t T = 0;
  int d = 0;
  double mu4 = 0.0;
  std::optional<double> B;  // only the logarithmic schedules read it
  double fixed_eta = 0.0;
};

/// Stepsize rule eta(t), validated once at construction.
///
///  ConstantWarm       9 log(2 k^2 T / (9 B^8)) / (2 |k| T)
///  ConstantUniform    4 d log(k^2 T / (4 B^8 d)) / (|k| T)
///  TwoPhase           8 d log(k^2 T / (8 B^8 d)) / (|k| T)  for t <= T/2,
///                     9 log(k^2 T / (9 B^8)) / (|k| T)       afterwards
///  TwoPhasePractical  8 d / (|k| T), then 9 / (|k| T)
///  Fixed              the given eta (zero allowed, freezes the iterate)
///
/// with k = mu4 - 3 the excess kurtosis.
class StepsizeSchedule {
 public:
  explicit StepsizeSchedule(const ScheduleParams& params);

  const ScheduleParams& params() const noexcept { return params_; }
  ScheduleKind kind() const noexcept { return params_.kind; }
  std::int64_t horizon() const noexcept { return params_.T; }
  bool is_two_phase() const noexcept;

  /// 1 for t <= T/2 on the two-phase schedules, 2 afterwards; always 1 otherwise.
  int phase(std::int64_t t) const noexcept;
  double at(std::int64_t t) const;

  double eta1() const noexcept { return eta1_; }
  double eta2() const noexcept { return eta2_; }

 private:
  ScheduleParams params_;
  double eta1_ = 0.0;
  double eta2_ = 0.0;
};

double stepsize_at(const StepsizeSchedule& schedule, std::int64_t t);

struct SolverState {
  UnitVector u;
  std::int64_t t = 0;
  int kurtosis_sign = 1;
};

/// u' = Pi_1{ u + eta sign(mu4 - 3) (u^T x)^3 x }.
SolverState sgd_step(const SolverState& state, const Vector& x, double eta);

UnitVector init_uniform(int d, std::uint64_t seed);

/// u0 = cos(theta) a_i + sin(theta) w with tan(theta) = `tan_angle` and w a
/// uniformly drawn unit vector orthogonal to a_i.
UnitVector init_warm(const MixingModel& model, int component, double tan_angle,
                     std::uint64_t seed);

struct InitUniform {};
struct InitWarm {
  int component = 1;
  double tan_angle = 0.5;
};
struct InitGiven {
  Vector u;
};
using InitSpec = std::variant<InitUniform, InitWarm, InitGiven>;

/// Sign of the empirical excess kurtosis from `n` observations:
/// E||X||^4 - d(d + 2) = d (mu4 - 3) for whitened X = A Z.
int estimate_kurtosis_sign(ObservationStream& stream, std::int64_t n);

struct RunConfig {
  std::int64_t T = 0;
  ScheduleParams schedule;
  InitSpec init = InitUniform{};
  std::uint64_t seed = 0;
  /// 0 selects the default max(1, T / 2000).
  std::int64_t record_stride = 0;
  bool full_resolution = false;
  bool record_snapshots = false;
  /// When set, the kurtosis sign is estimated from this many warm-up
  /// observations drawn from a separate stream instead of read from the model.
  std::optional<std::int64_t> kurtosis_warmup;
};

std::int64_t default_record_stride(std::int64_t T);

/// Runs the streaming update for exactly T observations of a stream seeded from
/// config.seed and records diagnostics every stride iterations (and at T).
RunTrace run(const MixingModel& model, const RunConfig& config);

}  // namespace tensorica
