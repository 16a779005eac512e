#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tensorica/random.hpp"

namespace tensorica {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class SourceKind { MixtureGaussian, GaussianBernoulli, Custom };

/// Z = delta * N(-offset, variance) + (1 - delta) * N(offset, variance), delta ~ Bernoulli(p).
struct MixtureGaussianParams {
  double p = 0.5;
  double offset = 0.70710678118654752440;  // 1/sqrt(2)
  double variance = 0.5;
};

/// Z = delta * Y, Y ~ N(0, variance), delta ~ Bernoulli(p).
struct GaussianBernoulliParams {
  double p = 0.5;
  double variance = 2.0;
};

struct CustomParams {
  std::function<double(Rng&)> sampler;
};

/// One-dimensional law of each independent source coordinate.
///
/// Built-in kinds carry their analytic fourth moment; the sub-Gaussian
/// constant B is filled on demand (see mathkit::resolve_sub_gaussian_B).
/// Custom laws must supply both.
class SourceDistribution {
 public:
  using Params = std::variant<MixtureGaussianParams, GaussianBernoulliParams, CustomParams>;

  static SourceDistribution mixture_gaussian(MixtureGaussianParams params = {});
  static SourceDistribution gaussian_bernoulli(GaussianBernoulliParams params = {});
  static SourceDistribution custom(std::function<double(Rng&)> sampler, double mu4,
                                   double sub_gaussian_B);

  SourceKind kind() const noexcept;
  const Params& params() const noexcept { return params_; }
  double mu4() const noexcept { return mu4_; }
  double excess_kurtosis() const noexcept { return mu4_ - 3.0; }
  int kurtosis_sign() const noexcept { return mu4_ > 3.0 ? 1 : -1; }

  const std::optional<double>& sub_gaussian_B() const noexcept { return sub_gaussian_B_; }
  void set_sub_gaussian_B(double B);

  /// Analytic raw moment E Z^k for k in {1, 2, 4, 6, 8}; unavailable for Custom.
  std::optional<double> moment(int k) const;

  double draw(Rng& rng) const;

  /// Stable textual identity, e.g. "gaussian-bernoulli(p=0.5,variance=2)".
  std::string describe() const;

 private:
  SourceDistribution(Params params, double mu4);

  Params params_;
  double mu4_;
  std::optional<double> sub_gaussian_B_;
};

/// Stateful sampler for one distribution; keeps the normal generator's
/// cached variate between draws, so it is faster than repeated draw() calls.
class SourceSampler {
 public:
  explicit SourceSampler(const SourceDistribution& dist);
  double operator()(Rng& rng);

 private:
  const SourceDistribution* dist_;
  std::bernoulli_distribution label_;
  std::normal_distribution<double> normal_;
};

std::string to_string(SourceKind kind);
SourceKind parse_source_kind(const std::string& text);

struct MixingModel {
  Matrix A;  // orthogonal; columns are the independent components
  SourceDistribution source;

  int dimension() const noexcept { return static_cast<int>(A.rows()); }
  Vector component(int i) const { return A.col(i - 1); }  // 1-based, matching the component index
};

/// Haar-distributed orthogonal matrix: QR of an i.i.d. Gaussian matrix with
/// diag(R) > 0.
Matrix sample_haar_orthogonal(int d, std::uint64_t seed);

MixingModel make_mixing_model(int d, SourceDistribution source, std::uint64_t seed);

std::vector<double> sample_source(const SourceDistribution& dist, std::size_t n,
                                  std::uint64_t seed);

/// Unbounded stream of X = A Z.
class ObservationStream {
 public:
  ObservationStream(MixingModel model, std::uint64_t seed);
  ObservationStream(const ObservationStream&) = delete;
  ObservationStream& operator=(const ObservationStream&) = delete;

  const MixingModel& model() const noexcept { return model_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::int64_t count_emitted() const noexcept { return count_; }

  Vector next_observation();

  /// Writes the next observation into `x` and the underlying sources into `z`.
  void next_observation(Vector& x, Vector& z);

 private:
  MixingModel model_;
  std::uint64_t seed_;
  Rng rng_;
  SourceSampler sampler_;
  std::int64_t count_ = 0;
  Vector z_;
};

}  // namespace tensorica
