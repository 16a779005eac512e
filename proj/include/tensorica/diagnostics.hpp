#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tensorica/datagen.hpp"
#include "tensorica/sphere.hpp"

namespace tensorica {

/// tan of the angle between u and a: sqrt(1 - (a^T u)^2) / (a^T u), signed by
/// the inner product. Returns +infinity when a^T u == 0.
double tan_angle(const UnitVector& u, const UnitVector& a);
double tan_angle(const Vector& u, const Vector& a);

struct ClosestComponent {
  int index = 1;  // 1-based
  double tan_abs = 0.0;
};

/// argmin_i tan^2(u, a_i), ties to the smallest index.
ClosestComponent closest_component(const UnitVector& u, const MixingModel& model);
ClosestComponent closest_component(const Vector& u, const Matrix& A);

struct RotatedView {
  UnitVector v;  // P A^T u with P the transposition (1 I)
  int index_I = 1;
};

RotatedView rotate(const UnitVector& u, const MixingModel& model, int index_I);
RotatedView rotate(const UnitVector& u, const Matrix& A, int index_I);

/// U_k = v_k / v_1 and W_k = (v_1^2 - v_k^2) / v_k^2 for k = 2..d, stored at
/// position k - 2. nullopt marks an undefined ratio; W_k is +infinity when
/// v_k = 0 and v_1 != 0.
struct CoordRatios {
  std::vector<std::optional<double>> U;
  std::vector<std::optional<double>> W;
};

CoordRatios coord_ratios(const UnitVector& v);

struct Regions {
  bool warm = false;      // v_1^2 >= 3/4
  bool warm_aux = false;  // v_1^2 >= 2/3
  bool mid = false;       // v_1^2 >= 3 v_k^2
  bool cold = false;      // v_1^2 >= max_{i >= 2} v_i^2

  std::vector<std::string> labels() const;
};

/// Region membership of a rotated iterate; `k` is 1-based with 2 <= k <= d.
Regions region_of(const UnitVector& v, int k);

struct MonteCarloEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
};

/// Monte-Carlo estimate of -sign(mu4 - 3) E (u^T X)^4.
MonteCarloEstimate objective_estimate(const UnitVector& u, const MixingModel& model,
                                      std::int64_t n_mc, std::uint64_t seed);

enum class RescaledTimeKind { Warm, Uniform };

/// ceil( tau log(|k| / (B^8 eta)) / -log(1 - eta |k| / c) ), c = 3 (warm) or 2d (uniform).
std::int64_t rescaled_time(RescaledTimeKind kind, double eta, double tau, double mu4, double B,
                           int d);

struct TraceRecord {
  std::int64_t t = 0;
  double tan_angle_min = 0.0;  // +infinity when undefined
  int component_index = 1;
  int phase = 1;
  std::optional<Vector> u_snapshot;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  std::uint64_t config_fingerprint = 0;
  std::uint64_t seed = 0;
  Vector final_u;

  /// First recorded t at which tan_angle_min < threshold, if any.
  std::optional<std::int64_t> first_crossing(double threshold) const;

  /// Mean of tan_angle_min over records with t > (1 - fraction) * T.
  double window_mean(double fraction, std::int64_t T) const;
};

}  // namespace tensorica
