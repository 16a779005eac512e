#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tensorica/datagen.hpp"
#include "tensorica/random.hpp"

namespace tensorica {

/// Instance of the reversed (discrete) Gronwall inequality: u(0..T), beta(0..T-1).
struct GronwallInstance {
  std::vector<double> u;
  std::vector<double> beta;
  double alpha = 0.0;
};

struct GronwallResult {
  bool holds = false;
  /// max_t |u(t) - u(0) prod_{s<t}(1 - beta(s))| - 2 alpha; negative when the bound holds.
  double max_slack = 0.0;
};

/// Checks the hypothesis |u(t) - u(0) + sum_{s<t} beta(s) u(s)| <= alpha and
/// then the conclusion |u(t) - u(0) prod(1 - beta)| <= 2 alpha - alpha prod(1 - beta).
/// `rounding_slack` is added to both sides of every comparison.
GronwallResult gronwall_check(const GronwallInstance& inst, double rounding_slack = 0.0);

/// Random instance satisfying the hypothesis by construction.
GronwallInstance random_gronwall_instance(Rng& rng, int max_T = 64);

struct OrliczEstimate {
  double alpha = 2.0;
  double K_hat = 0.0;
  std::int64_t n_samples = 0;
  /// |E exp(|X/K_hat|^alpha) - 2| at the returned K_hat.
  double tolerance = 0.0;
  /// Delta-method standard error of K_hat.
  double stderr_ = 0.0;
};

using Sampler = std::function<double(Rng&)>;

struct OrliczOptions {
  double relative_tolerance = 1e-3;
  double lower = 1e-6;
  double upper = 1e6;
};

/// inf{K > 0 : E exp(|X / K|^alpha) <= 2} by bisection over a fixed sample.
OrliczEstimate estimate_psi_alpha_norm(const Sampler& sampler, double alpha, std::int64_t n,
                                       std::uint64_t seed, const OrliczOptions& options = {});

/// Same estimator over caller-provided draws.
OrliczEstimate estimate_psi_alpha_norm(const std::vector<double>& sample, double alpha,
                                       const OrliczOptions& options = {});

inline constexpr std::int64_t kDefaultOrliczSamples = 1'000'000;
inline constexpr std::uint64_t kDefaultOrliczSeed = 0x5eed0b;

/// B such that the psi_2 norm of the source equals sqrt(3/8) B.
double sub_gaussian_B(const SourceDistribution& dist, std::int64_t n, std::uint64_t seed);

/// The distribution's stored B, or a memoized default estimate.
double resolve_sub_gaussian_B(const SourceDistribution& dist);

struct SpacingResult {
  double empirical_prob = 0.0;
  double stderr_ = 0.0;
  double threshold = 0.0;
  std::int64_t n_trials = 0;
};

/// Smallest dimension allowed for a given epsilon: 2 sqrt(2 pi e) log(1/eps) + 1.
double spacing_min_dimension(double epsilon);

/// Fraction of uniform sphere draws whose min_k W_k (after moving the largest
/// squared coordinate first) reaches eps / (8 log(1/eps) log d).
SpacingResult spacing_experiment(int d, double epsilon, std::int64_t n_trials,
                                 std::uint64_t seed);

struct MomentIdentityResult {
  int n_comparisons = 0;
  int n_within = 0;     // comparisons within z_tolerance standard errors
  double max_abs_z = 0.0;
};

/// Monte-Carlo check of E[(v^T Y)^3 Y_k] = (mu4 - 3) v_k^3 + 3 v_k for
/// `n_vectors` uniform unit v and every k, Y with i.i.d. source coordinates.
/// All vectors share the same n draws of Y.
MomentIdentityResult moment_identity_check(const SourceDistribution& dist, int d, int n_vectors,
                                           std::int64_t n, std::uint64_t seed,
                                           double z_tolerance = 3.0);

}  // namespace tensorica
