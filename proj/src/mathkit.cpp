#include "tensorica/mathkit.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "tensorica/error.hpp"

namespace tensorica {

GronwallResult gronwall_check(const GronwallInstance& inst, double rounding_slack) {
  if (inst.u.empty() || inst.u.size() != inst.beta.size() + 1) {
    throw Error(ErrorKind::InvalidInstance, "need u(0..T) and beta(0..T-1)");
  }
  if (!(inst.alpha >= 0.0) || !std::isfinite(inst.alpha)) {
    throw Error(ErrorKind::InvalidInstance, "alpha must be finite and >= 0");
  }
  for (double b : inst.beta) {
    if (!(b >= 0.0 && b < 1.0)) throw Error(ErrorKind::InvalidInstance, "beta(s) must lie in [0, 1)");
  }
  for (double x : inst.u) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidInstance, "u(t) must be finite");
  }

  const double u0 = inst.u[0];
  const double alpha = inst.alpha;
  const std::size_t T = inst.beta.size();

  double sum = 0.0;  // sum_{s<t} beta(s) u(s)
  for (std::size_t t = 1; t <= T; ++t) {
    sum += inst.beta[t - 1] * inst.u[t - 1];
    if (std::abs(inst.u[t] - u0 + sum) > alpha + rounding_slack) {
      throw Error(ErrorKind::HypothesisViolated,
                  "|u(t) - u(0) + sum beta u| exceeds alpha at t = " + std::to_string(t));
    }
  }

  GronwallResult result;
  result.holds = true;
  result.max_slack = -2.0 * alpha;  // t = 0 contributes a zero deviation
  double prod = 1.0;
  for (std::size_t t = 1; t <= T; ++t) {
    prod *= 1.0 - inst.beta[t - 1];
    const double deviation = std::abs(inst.u[t] - u0 * prod);
    if (deviation > 2.0 * alpha - alpha * prod + rounding_slack) result.holds = false;
    result.max_slack = std::max(result.max_slack, deviation - 2.0 * alpha);
  }
  return result;
}

GronwallInstance random_gronwall_instance(Rng& rng, int max_T) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> length(1, std::max(1, max_T));
  std::normal_distribution<double> normal;

  const int T = length(rng);
  GronwallInstance inst;
  inst.alpha = unit(rng) * std::pow(10.0, 4.0 * unit(rng) - 3.0);
  inst.beta.resize(T);
  inst.u.resize(T + 1);

  // beta regimes: generic, near one (fast contraction), and exact zero.
  const int beta_mode = static_cast<int>(unit(rng) * 3.0);
  for (auto& b : inst.beta) {
    switch (beta_mode) {
      case 0: b = unit(rng); break;
      case 1: b = 1.0 - std::pow(10.0, -6.0 * unit(rng)) * unit(rng) * 0.5; break;
      default: b = unit(rng) < 0.5 ? 0.0 : unit(rng); break;
    }
    if (b >= 1.0) b = std::nextafter(1.0, 0.0);
  }

  // Perturbations stay strictly inside [-alpha, alpha] so rounding cannot
  // push a generated instance outside the hypothesis.
  const double margin = 1.0 - 1e-9;
  const bool extremal = unit(rng) < 0.5;
  inst.u[0] = 10.0 * normal(rng);
  double sum = 0.0;
  for (int t = 1; t <= T; ++t) {
    sum += inst.beta[t - 1] * inst.u[t - 1];
    double e = extremal ? (unit(rng) < 0.5 ? -1.0 : 1.0) : 2.0 * unit(rng) - 1.0;
    e *= inst.alpha * margin;
    inst.u[t] = inst.u[0] - sum + e;
  }
  return inst;
}

OrliczEstimate estimate_psi_alpha_norm(const std::vector<double>& sample, double alpha,
                                       const OrliczOptions& options) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (sample.empty()) throw Error(ErrorKind::InvalidArgument, "empty sample");
  std::vector<double> powers(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!std::isfinite(sample[i])) {
      throw Error(ErrorKind::InvalidSampler, "sampler produced a non-finite value");
    }
    powers[i] = std::pow(std::abs(sample[i]), alpha);
  }
  const auto n = static_cast<double>(sample.size());

  // E exp(|X/K|^alpha) over the fixed sample; decreasing in K.
  auto mgf = [&](double K) {
    const double scale = std::pow(K, -alpha);
    double s = 0.0;
    for (double a : powers) s += std::exp(a * scale);
    return s / n;
  };

  OrliczEstimate est;
  est.alpha = alpha;
  est.n_samples = static_cast<std::int64_t>(sample.size());

  double lo = options.lower;
  double hi = options.upper;
  if (mgf(lo) <= 2.0) {
    est.K_hat = lo;
    est.tolerance = std::abs(mgf(lo) - 2.0);
    return est;
  }
  if (mgf(hi) > 2.0) {
    throw Error(ErrorKind::EstimateFailed, "no bracket for the Orlicz norm in [lower, upper]");
  }
  while (hi / lo - 1.0 > options.relative_tolerance) {
    const double mid = std::sqrt(lo * hi);
    (mgf(mid) > 2.0 ? lo : hi) = mid;
  }
  est.K_hat = hi;

  const double scale = std::pow(hi, -alpha);
  double mean = 0.0, sq = 0.0, deriv = 0.0;
  for (double a : powers) {
    const double g = std::exp(a * scale);
    mean += g;
    sq += g * g;
    deriv += g * a;
  }
  mean /= n;
  const double var = std::max(sq / n - mean * mean, 0.0);
  // d/dK E exp(a K^-alpha) = -alpha K^(-alpha-1) E[a exp(a K^-alpha)]
  const double slope = alpha * std::pow(hi, -alpha - 1.0) * deriv / n;
  est.tolerance = std::abs(mean - 2.0);
  est.stderr_ = slope > 0.0 ? std::sqrt(var / n) / slope : 0.0;
  return est;
}

OrliczEstimate estimate_psi_alpha_norm(const Sampler& sampler, double alpha, std::int64_t n,
                                       std::uint64_t seed, const OrliczOptions& options) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (n < 10'000) throw Error(ErrorKind::InvalidArgument, "Orlicz estimation needs n >= 1e4");
  if (!sampler) throw Error(ErrorKind::InvalidSampler, "empty sampler");
  Rng rng(seed);
  std::vector<double> sample(static_cast<std::size_t>(n));
  for (auto& x : sample) x = sampler(rng);
  return estimate_psi_alpha_norm(sample, alpha, options);
}

double sub_gaussian_B(const SourceDistribution& dist, std::int64_t n, std::uint64_t seed) {
  if (n < 10'000) throw Error(ErrorKind::InvalidArgument, "Orlicz estimation needs n >= 1e4");
  const std::vector<double> sample = sample_source(dist, static_cast<std::size_t>(n), seed);
  return estimate_psi_alpha_norm(sample, 2.0).K_hat * std::sqrt(8.0 / 3.0);
}

double resolve_sub_gaussian_B(const SourceDistribution& dist) {
  if (dist.sub_gaussian_B()) return *dist.sub_gaussian_B();
  static std::mutex mutex;
  static std::map<std::string, double> cache;
  const std::string key = dist.describe();
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double B = sub_gaussian_B(dist, kDefaultOrliczSamples, kDefaultOrliczSeed);
  std::lock_guard lock(mutex);
  return cache.emplace(key, B).first->second;
}

double spacing_min_dimension(double epsilon) {
  return 2.0 * std::sqrt(2.0 * std::numbers::pi * std::numbers::e) * std::log(1.0 / epsilon) + 1.0;
}

SpacingResult spacing_experiment(int d, double epsilon, std::int64_t n_trials,
                                 std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0 / 3.0)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1/3)");
  }
  if (d < 2 || static_cast<double>(d) < spacing_min_dimension(epsilon)) {
    throw Error(ErrorKind::InfeasibleDimension,
                "d must be at least 2 sqrt(2 pi e) log(1/eps) + 1 = " +
                    std::to_string(spacing_min_dimension(epsilon)));
  }
  if (n_trials < 1) throw Error(ErrorKind::InvalidArgument, "n_trials must be >= 1");

  SpacingResult out;
  out.threshold = epsilon / (8.0 * std::log(1.0 / epsilon) * std::log(static_cast<double>(d)));
  out.n_trials = n_trials;

  std::int64_t hits = 0;
  std::normal_distribution<double> normal;
  for (std::int64_t trial = 0; trial < n_trials; ++trial) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    normal.reset();
    // Ratios of squared coordinates are invariant under normalization, so the
    // Gaussian vector stands in for its projection onto the sphere.
    double first = 0.0, second = 0.0;
    for (int i = 0; i < d; ++i) {
      const double g = normal(rng);
      const double sq = g * g;
      if (sq > first) {
        second = first;
        first = sq;
      } else if (sq > second) {
        second = sq;
      }
    }
    const double min_w = second > 0.0 ? (first - second) / second
                                      : std::numeric_limits<double>::infinity();
    if (min_w >= out.threshold) ++hits;
  }
  const auto n = static_cast<double>(n_trials);
  out.empirical_prob = static_cast<double>(hits) / n;
  out.stderr_ = std::sqrt(out.empirical_prob * (1.0 - out.empirical_prob) / n);
  return out;
}

MomentIdentityResult moment_identity_check(const SourceDistribution& dist, int d, int n_vectors,
                                           std::int64_t n, std::uint64_t seed,
                                           double z_tolerance) {
  if (d < 1) throw Error(ErrorKind::InvalidDimension, "dimension must be >= 1");
  if (n_vectors < 1 || n < 2) throw Error(ErrorKind::InvalidArgument, "need n_vectors >= 1, n >= 2");

  Matrix V(d, n_vectors);  // columns are the test directions
  {
    Rng rng(derive_seed(seed, SeedPurpose::Init));
    std::normal_distribution<double> normal;
    for (int j = 0; j < n_vectors; ++j) {
      Vector g(d);
      do {
        for (int i = 0; i < d; ++i) g[i] = normal(rng);
      } while (!(g.norm() > 0.0));
      V.col(j) = g / g.norm();
    }
  }

  // Welford accumulators per (k, j) for (v_j^T Y)^3 Y_k.
  Matrix mean = Matrix::Zero(d, n_vectors);
  Matrix m2 = Matrix::Zero(d, n_vectors);
  Rng rng(derive_seed(seed, SeedPurpose::Stream));
  SourceSampler sampler(dist);
  Vector y(d);
  for (std::int64_t s = 1; s <= n; ++s) {
    for (int i = 0; i < d; ++i) y[i] = sampler(rng);
    const Eigen::RowVectorXd proj = y.transpose() * V;
    const Eigen::RowVectorXd cube = proj.array().cube();
    const Matrix value = y * cube;
    const Matrix delta = value - mean;
    mean += delta / static_cast<double>(s);
    m2.array() += delta.array() * (value - mean).array();
  }

  MomentIdentityResult out;
  const auto nn = static_cast<double>(n);
  const double kappa = dist.mu4() - 3.0;
  for (int j = 0; j < n_vectors; ++j) {
    for (int k = 0; k < d; ++k) {
      const double vk = V(k, j);
      const double expected = kappa * vk * vk * vk + 3.0 * vk;
      const double se = std::sqrt(m2(k, j) / (nn - 1.0) / nn);
      const double z = se > 0.0 ? std::abs(mean(k, j) - expected) / se
                                : (mean(k, j) == expected ? 0.0
                                                          : std::numeric_limits<double>::infinity());
      ++out.n_comparisons;
      if (z <= z_tolerance) ++out.n_within;
      out.max_abs_z = std::max(out.max_abs_z, z);
    }
  }
  return out;
}

}  // namespace tensorica
