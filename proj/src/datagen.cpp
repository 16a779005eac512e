#include "tensorica/datagen.hpp"

#include <cmath>
#include <sstream>

#include "tensorica/error.hpp"

namespace tensorica {

namespace {

constexpr double kStandardizationTol = 1e-9;

// Even raw moments of N(m, s2), k in {2, 4, 6, 8}.
double normal_even_moment(int k, double m, double s2) {
  const double m2 = m * m;
  switch (k) {
    case 2: return m2 + s2;
    case 4: return m2 * m2 + 6 * m2 * s2 + 3 * s2 * s2;
    case 6: return m2 * m2 * m2 + 15 * m2 * m2 * s2 + 45 * m2 * s2 * s2 + 15 * s2 * s2 * s2;
    case 8:
      return m2 * m2 * m2 * m2 + 28 * m2 * m2 * m2 * s2 + 210 * m2 * m2 * s2 * s2 +
             420 * m2 * s2 * s2 * s2 + 105 * s2 * s2 * s2 * s2;
    default: return std::nan("");
  }
}

void check_standardized(double mean, double second, double mu4, const std::string& what) {
  if (std::abs(mean) > kStandardizationTol || std::abs(second - 1.0) > kStandardizationTol) {
    std::ostringstream os;
    os << what << " is not standardized (mean " << mean << ", second moment " << second << ")";
    throw Error(ErrorKind::InvalidDistribution, os.str());
  }
  if (std::abs(mu4 - 3.0) < kStandardizationTol) {
    throw Error(ErrorKind::InvalidDistribution, what + " has zero excess kurtosis");
  }
}

}  // namespace

SourceDistribution::SourceDistribution(Params params, double mu4)
    : params_(std::move(params)), mu4_(mu4) {}

SourceDistribution SourceDistribution::mixture_gaussian(MixtureGaussianParams params) {
  if (!(params.variance > 0.0)) {
    throw Error(ErrorKind::InvalidDistribution, "mixture variance must be positive");
  }
  if (!(params.p >= 0.0 && params.p <= 1.0)) {
    throw Error(ErrorKind::InvalidDistribution, "mixture probability must lie in [0, 1]");
  }
  const double mean = (1.0 - 2.0 * params.p) * params.offset;
  const double second = normal_even_moment(2, params.offset, params.variance);
  const double mu4 = normal_even_moment(4, params.offset, params.variance);
  check_standardized(mean, second, mu4, "mixture-gaussian");
  return SourceDistribution(params, mu4);
}

SourceDistribution SourceDistribution::gaussian_bernoulli(GaussianBernoulliParams params) {
  if (!(params.variance > 0.0)) {
    throw Error(ErrorKind::InvalidDistribution, "gaussian-bernoulli variance must be positive");
  }
  if (!(params.p > 0.0 && params.p <= 1.0)) {
    throw Error(ErrorKind::InvalidDistribution,
                "gaussian-bernoulli probability must lie in (0, 1]");
  }
  const double second = params.p * params.variance;
  const double mu4 = params.p * 3.0 * params.variance * params.variance;
  check_standardized(0.0, second, mu4, "gaussian-bernoulli");
  return SourceDistribution(params, mu4);
}

SourceDistribution SourceDistribution::custom(std::function<double(Rng&)> sampler, double mu4,
                                              double sub_gaussian_B) {
  if (!sampler) throw Error(ErrorKind::InvalidDistribution, "custom sampler is empty");
  if (!std::isfinite(mu4) || std::abs(mu4 - 3.0) < kStandardizationTol) {
    throw Error(ErrorKind::InvalidDistribution, "custom mu4 must be finite and differ from 3");
  }
  SourceDistribution dist(CustomParams{std::move(sampler)}, mu4);
  dist.set_sub_gaussian_B(sub_gaussian_B);
  return dist;
}

SourceKind SourceDistribution::kind() const noexcept {
  switch (params_.index()) {
    case 0: return SourceKind::MixtureGaussian;
    case 1: return SourceKind::GaussianBernoulli;
    default: return SourceKind::Custom;
  }
}

void SourceDistribution::set_sub_gaussian_B(double B) {
  if (!(B > 0.0) || !std::isfinite(B)) {
    throw Error(ErrorKind::InvalidDistribution, "sub-Gaussian constant B must be positive");
  }
  sub_gaussian_B_ = B;
}

std::optional<double> SourceDistribution::moment(int k) const {
  if (const auto* mg = std::get_if<MixtureGaussianParams>(&params_)) {
    if (k == 1) return (1.0 - 2.0 * mg->p) * mg->offset;
    if (k % 2 == 0 && k >= 2 && k <= 8) return normal_even_moment(k, mg->offset, mg->variance);
    return std::nullopt;
  }
  if (const auto* gb = std::get_if<GaussianBernoulliParams>(&params_)) {
    if (k == 1) return 0.0;
    if (k % 2 == 0 && k >= 2 && k <= 8) return gb->p * normal_even_moment(k, 0.0, gb->variance);
    return std::nullopt;
  }
  return std::nullopt;
}

double SourceDistribution::draw(Rng& rng) const { return SourceSampler(*this)(rng); }

SourceSampler::SourceSampler(const SourceDistribution& dist) : dist_(&dist) {
  if (const auto* mg = std::get_if<MixtureGaussianParams>(&dist.params())) {
    label_ = std::bernoulli_distribution(mg->p);
    normal_ = std::normal_distribution<double>(0.0, std::sqrt(mg->variance));
  } else if (const auto* gb = std::get_if<GaussianBernoulliParams>(&dist.params())) {
    label_ = std::bernoulli_distribution(gb->p);
    normal_ = std::normal_distribution<double>(0.0, std::sqrt(gb->variance));
  }
}

double SourceSampler::operator()(Rng& rng) {
  switch (dist_->params().index()) {
    case 0: {
      const double offset = std::get<MixtureGaussianParams>(dist_->params()).offset;
      const double center = label_(rng) ? -offset : offset;
      return center + normal_(rng);
    }
    case 1: {
      // Both variates are always drawn so the stream layout does not depend on delta.
      const bool on = label_(rng);
      const double y = normal_(rng);
      return on ? y : 0.0;
    }
    default: return std::get<CustomParams>(dist_->params()).sampler(rng);
  }
}

std::string SourceDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* mg = std::get_if<MixtureGaussianParams>(&params_)) {
    os << "mixture-gaussian(p=" << mg->p << ",offset=" << mg->offset
       << ",variance=" << mg->variance << ")";
  } else if (const auto* gb = std::get_if<GaussianBernoulliParams>(&params_)) {
    os << "gaussian-bernoulli(p=" << gb->p << ",variance=" << gb->variance << ")";
  } else {
    os << "custom(mu4=" << mu4_ << ")";
  }
  return os.str();
}

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::MixtureGaussian: return "mixture-gaussian";
    case SourceKind::GaussianBernoulli: return "gaussian-bernoulli";
    case SourceKind::Custom: return "custom";
  }
  return "custom";
}

SourceKind parse_source_kind(const std::string& text) {
  if (text == "mixture-gaussian" || text == "mg") return SourceKind::MixtureGaussian;
  if (text == "gaussian-bernoulli" || text == "gb") return SourceKind::GaussianBernoulli;
  throw Error(ErrorKind::InvalidConfig, "unknown distribution '" + text + "'");
}

Matrix sample_haar_orthogonal(int d, std::uint64_t seed) {
  if (d < 2) throw Error(ErrorKind::InvalidDimension, "dimension must be at least 2");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix G(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) G(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix& R = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

MixingModel make_mixing_model(int d, SourceDistribution source, std::uint64_t seed) {
  return MixingModel{sample_haar_orthogonal(d, seed), std::move(source)};
}

std::vector<double> sample_source(const SourceDistribution& dist, std::size_t n,
                                  std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "sample size must be at least 1");
  Rng rng(seed);
  SourceSampler sampler(dist);
  std::vector<double> out(n);
  for (auto& z : out) z = sampler(rng);
  return out;
}

ObservationStream::ObservationStream(MixingModel model, std::uint64_t seed)
    : model_(std::move(model)),
      seed_(seed),
      rng_(seed),
      sampler_(model_.source),
      z_(model_.dimension()) {
  if (model_.dimension() < 2 || model_.A.cols() != model_.A.rows()) {
    throw Error(ErrorKind::InvalidDimension, "mixing matrix must be square with d >= 2");
  }
}

void ObservationStream::next_observation(Vector& x, Vector& z) {
  z.resize(model_.dimension());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = sampler_(rng_);
  x.noalias() = model_.A * z;
  ++count_;
}

Vector ObservationStream::next_observation() {
  Vector x(model_.dimension());
  next_observation(x, z_);
  return x;
}

}  // namespace tensorica
