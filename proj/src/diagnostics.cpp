#include "tensorica/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "tensorica/error.hpp"

namespace tensorica {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sin of the angle is computed as ||u - (a^T u) a||, which stays accurate
// near zero where sqrt(1 - c^2) loses all digits.
double signed_tan(const Vector& u, const Vector& a) {
  const double c = a.dot(u);
  if (c == 0.0) return kInf;
  const double s = (u - c * a).norm();
  return s / c;
}

}  // namespace

double tan_angle(const Vector& u, const Vector& a) {
  if (u.size() != a.size()) throw Error(ErrorKind::InvalidDimension, "dimension mismatch");
  return signed_tan(u, a);
}

double tan_angle(const UnitVector& u, const UnitVector& a) { return tan_angle(u.vec(), a.vec()); }

ClosestComponent closest_component(const Vector& u, const Matrix& A) {
  if (u.size() != A.rows()) throw Error(ErrorKind::InvalidDimension, "dimension mismatch");
  const Vector c = A.transpose() * u;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < c.size(); ++i) {
    if (c[i] * c[i] > c[best] * c[best]) best = i;
  }
  // A is orthogonal, so the squared sine is the mass on the other coordinates;
  // summing it directly avoids cancellation near the component.
  const double sin2 = c.head(best).squaredNorm() + c.tail(c.size() - best - 1).squaredNorm();
  ClosestComponent out;
  out.index = static_cast<int>(best) + 1;
  out.tan_abs = c[best] == 0.0 ? kInf : std::sqrt(sin2) / std::abs(c[best]);
  return out;
}

ClosestComponent closest_component(const UnitVector& u, const MixingModel& model) {
  return closest_component(u.vec(), model.A);
}

RotatedView rotate(const UnitVector& u, const Matrix& A, int index_I) {
  const int d = static_cast<int>(A.rows());
  if (u.dimension() != d) throw Error(ErrorKind::InvalidDimension, "dimension mismatch");
  if (index_I < 1 || index_I > d) {
    throw Error(ErrorKind::IndexOutOfRange, "component index must lie in [1, d]");
  }
  Vector v = A.transpose() * u.vec();
  std::swap(v[0], v[index_I - 1]);
  // A^T is orthogonal; renormalize only to absorb rounding.
  return RotatedView{project_sphere(v), index_I};
}

RotatedView rotate(const UnitVector& u, const MixingModel& model, int index_I) {
  return rotate(u, model.A, index_I);
}

CoordRatios coord_ratios(const UnitVector& v) {
  const Vector& x = v.vec();
  const Eigen::Index d = x.size();
  CoordRatios out;
  out.U.resize(d - 1);
  out.W.resize(d - 1);
  const double v1 = x[0];
  for (Eigen::Index k = 1; k < d; ++k) {
    const double vk = x[k];
    if (v1 != 0.0) out.U[k - 1] = vk / v1;
    if (vk != 0.0) {
      out.W[k - 1] = (v1 * v1 - vk * vk) / (vk * vk);
    } else if (v1 != 0.0) {
      out.W[k - 1] = kInf;
    }
  }
  return out;
}

std::vector<std::string> Regions::labels() const {
  std::vector<std::string> out;
  if (warm) out.emplace_back("warm");
  if (warm_aux) out.emplace_back("warm-aux");
  if (mid) out.emplace_back("mid");
  if (cold) out.emplace_back("cold");
  return out;
}

Regions region_of(const UnitVector& v, int k) {
  const Vector& x = v.vec();
  const int d = static_cast<int>(x.size());
  if (k < 2 || k > d) throw Error(ErrorKind::IndexOutOfRange, "coordinate k must lie in [2, d]");
  const double v1sq = x[0] * x[0];
  const double vksq = x[k - 1] * x[k - 1];
  const double max_rest = x.tail(d - 1).cwiseAbs2().maxCoeff();
  Regions r;
  r.warm = v1sq >= 0.75;
  r.warm_aux = v1sq >= 2.0 / 3.0;
  r.mid = v1sq >= 3.0 * vksq;
  r.cold = v1sq >= max_rest;
  return r;
}

MonteCarloEstimate objective_estimate(const UnitVector& u, const MixingModel& model,
                                      std::int64_t n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw Error(ErrorKind::InvalidArgument, "n_mc must be at least 1");
  if (u.dimension() != model.dimension()) {
    throw Error(ErrorKind::InvalidDimension, "dimension mismatch");
  }
  ObservationStream stream(model, seed);
  const double sign = -static_cast<double>(model.source.kurtosis_sign());
  Vector x(model.dimension()), z(model.dimension());
  // Welford accumulation of f = -sign (u^T X)^4.
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 1; i <= n_mc; ++i) {
    stream.next_observation(x, z);
    const double p = u.vec().dot(x);
    const double f = sign * (p * p) * (p * p);
    const double delta = f - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (f - mean);
  }
  MonteCarloEstimate est;
  est.value = mean;
  est.n = n_mc;
  est.stderr_ = n_mc > 1 ? std::sqrt(m2 / static_cast<double>(n_mc - 1) / n_mc) : kInf;
  return est;
}

std::int64_t rescaled_time(RescaledTimeKind kind, double eta, double tau, double mu4, double B,
                           int d) {
  const double k = std::abs(mu4 - 3.0);
  if (!(eta > 0.0) || !(B > 0.0) || !(k > 0.0) || !(tau >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "rescaled time needs eta, B, |mu4 - 3| > 0, tau >= 0");
  }
  if (kind == RescaledTimeKind::Uniform && d < 2) {
    throw Error(ErrorKind::InvalidDimension, "dimension must be at least 2");
  }
  const double contraction = kind == RescaledTimeKind::Warm ? eta * k / 3.0 : eta * k / (2.0 * d);
  if (!(contraction < 1.0)) {
    throw Error(ErrorKind::ScheduleInfeasible,
                kind == RescaledTimeKind::Warm ? "requires eta |mu4 - 3| / 3 < 1"
                                               : "requires eta |mu4 - 3| / (2d) < 1");
  }
  const double log_arg = k / (std::pow(B, 8) * eta);
  if (!(log_arg > 1.0)) {
    throw Error(ErrorKind::ScheduleInfeasible, "requires |mu4 - 3| / (B^8 eta) > 1");
  }
  const double denom = -std::log1p(-contraction);
  if (!(denom > 0.0)) throw Error(ErrorKind::ScheduleInfeasible, "contraction rate underflows");
  return static_cast<std::int64_t>(std::ceil(tau * std::log(log_arg) / denom));
}

std::optional<std::int64_t> RunTrace::first_crossing(double threshold) const {
  for (const auto& r : records) {
    if (r.tan_angle_min < threshold) return r.t;
  }
  return std::nullopt;
}

double RunTrace::window_mean(double fraction, std::int64_t T) const {
  const double start = (1.0 - fraction) * static_cast<double>(T);
  double sum = 0.0;
  std::int64_t n = 0;
  for (const auto& r : records) {
    if (static_cast<double>(r.t) > start && std::isfinite(r.tan_angle_min)) {
      sum += r.tan_angle_min;
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace tensorica
