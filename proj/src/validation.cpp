#include "tensorica/validation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "tensorica/csv.hpp"
#include "tensorica/diagnostics.hpp"
#include "tensorica/error.hpp"
#include "tensorica/harness.hpp"
#include "tensorica/mathkit.hpp"
#include "tensorica/solver.hpp"

namespace tensorica {

namespace {

PropertyResult make_result(std::string name, bool passed, const std::ostringstream& detail) {
  return PropertyResult{std::move(name), passed, detail.str()};
}

Vector gaussian_vector(Rng& rng, int d) {
  std::normal_distribution<double> normal;
  Vector g(d);
  for (int i = 0; i < d; ++i) g[i] = normal(rng);
  return g;
}

// Relative agreement with an absolute floor of `tol`; two infinities of the same sign agree.
bool agree(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr int kDims[] = {2, 3, 5, 10, 20, 54};

}  // namespace

PropertyResult check_sphere_normalization(std::uint64_t seed) {
  double worst = 0.0;
  std::int64_t steps = 0;
  for (auto dist : {SourceDistribution::gaussian_bernoulli(), SourceDistribution::mixture_gaussian()}) {
    for (int d : {3, 10, 20}) {
      const MixingModel model = make_mixing_model(d, dist, derive_seed(seed, d));
      for (double eta : {-1.0, 0.05, 0.5}) {
        RunConfig rc;
        rc.T = 2000;
        rc.seed = derive_seed(seed, 100 + d);
        rc.full_resolution = true;
        rc.record_snapshots = true;
        if (eta < 0.0) {
          rc.schedule.kind = ScheduleKind::TwoPhasePractical;
        } else {
          rc.schedule.kind = ScheduleKind::Fixed;
          rc.schedule.fixed_eta = eta;
        }
        const RunTrace trace = run(model, rc);
        for (const auto& rec : trace.records) {
          worst = std::max(worst, std::abs(rec.u_snapshot->norm() - 1.0));
          ++steps;
        }
      }
    }
  }
  std::ostringstream os;
  os << "max | ||u_t|| - 1 | = " << worst << " over " << steps << " steps (tol 1e-12)";
  return make_result("sphere-normalization", worst <= 1e-12, os);
}

PropertyResult check_rotation_identity(std::uint64_t seed) {
  Rng rng(seed);
  int checked = 0, failures = 0;
  double worst = 0.0;
  for (int d : kDims) {
    for (int rep = 0; rep < 84; ++rep) {
      const Matrix A = sample_haar_orthogonal(d, rng());
      const UnitVector u = project_sphere(gaussian_vector(rng, d));
      std::uniform_int_distribution<int> pick(1, d);
      for (int I : {pick(rng), closest_component(u.vec(), A).index}) {
        const RotatedView view = rotate(u, A, I);
        Vector e1 = Vector::Zero(d);
        e1[0] = 1.0;
        const double lhs = tan_angle(view.v.vec(), e1);
        const double rhs = tan_angle(u.vec(), Vector(A.col(I - 1)));
        ++checked;
        if (!agree(lhs, rhs, 1e-10)) ++failures;
        if (std::isfinite(lhs) && std::isfinite(rhs)) {
          worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
      }
    }
  }
  std::ostringstream os;
  os << failures << " of " << checked << " pairs outside 1e-10; worst scaled gap " << worst;
  return make_result("rotation-identity", failures == 0, os);
}

PropertyResult check_ratio_identity(std::uint64_t seed) {
  Rng rng(seed);
  int checked = 0, failures = 0;
  double worst = 0.0;
  for (int d : kDims) {
    for (int rep = 0; rep < 50; ++rep) {
      const Matrix A = sample_haar_orthogonal(d, rng());
      const UnitVector u = project_sphere(gaussian_vector(rng, d));
      const RotatedView view = rotate(u, A, closest_component(u.vec(), A).index);
      const CoordRatios r = coord_ratios(view.v);
      for (std::size_t k = 0; k < r.U.size(); ++k) {
        if (!r.U[k] || !r.W[k]) continue;
        const double U = *r.U[k];
        const double expected = U == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (U * U) - 1.0;
        ++checked;
        if (!agree(*r.W[k], expected, 1e-10)) ++failures;
        if (std::isfinite(expected)) {
          worst = std::max(worst, std::abs(*r.W[k] - expected) / std::max(1.0, std::abs(expected)));
        }
      }
    }
  }
  std::ostringstream os;
  os << failures << " of " << checked << " coordinates outside 1e-10; worst scaled gap " << worst;
  return make_result("ratio-identity", failures == 0, os);
}

PropertyResult check_projection_idempotence(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> exponent(-100.0, 100.0);
  int checked = 0;
  double worst = 0.0;
  bool basis_fixed = true;
  for (int d : kDims) {
    Vector e1 = Vector::Zero(d);
    e1[0] = 1.0;
    basis_fixed = basis_fixed && project_sphere(e1).vec() == e1;
    for (int rep = 0; rep < 200; ++rep) {
      const Vector w = gaussian_vector(rng, d) * std::pow(10.0, exponent(rng));
      const UnitVector p = project_sphere(w);
      const UnitVector q = project_sphere(p.vec());
      worst = std::max(worst, (p.vec() - q.vec()).lpNorm<Eigen::Infinity>());
      ++checked;
    }
  }
  const double tol = 4.0 * std::numeric_limits<double>::epsilon();
  std::ostringstream os;
  os << "max |Pi(Pi(w)) - Pi(w)| = " << worst << " over " << checked << " vectors (tol " << tol
     << "); e1 fixed exactly: " << (basis_fixed ? "yes" : "no");
  return make_result("projection-idempotence", basis_fixed && worst <= tol, os);
}

PropertyResult check_haar_orthogonality(std::uint64_t seed) {
  double worst = 0.0;
  int checked = 0;
  for (int d : {2, 3, 7, 20, 54, 100}) {
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      const Matrix A = sample_haar_orthogonal(d, derive_seed(seed, rep * 1000 + d));
      const Matrix I = Matrix::Identity(d, d);
      worst = std::max(worst, (A.transpose() * A - I).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (A * A.transpose() - I).lpNorm<Eigen::Infinity>());
      ++checked;
    }
  }
  std::ostringstream os;
  os << "max |A^T A - I| = " << worst << " over " << checked << " matrices (tol 1e-12)";
  return make_result("haar-orthogonality", worst <= 1e-12, os);
}

PropertyResult check_determinism(std::uint64_t seed) {
  ExperimentConfig config;
  config.name = "determinism";
  config.d = {6};
  config.T = {3000};
  config.replications = 3;
  config.seed = seed;
  config.record_stride = 7;

  std::random_device entropy;
  const auto root = std::filesystem::temp_directory_path() /
                    ("tensorica-validate-" + std::to_string(entropy()) + std::to_string(entropy()));
  std::ostringstream os;
  bool same = true;
  try {
    std::vector<std::vector<std::string>> outputs;
    for (unsigned workers : {1u, 1u, 3u}) {
      config.workers = workers;
      config.output_dir = root / std::to_string(outputs.size());
      const ExperimentResult result = run_experiment(config);
      std::vector<std::string> bytes;
      for (const auto& f : result.files) bytes.push_back(read_file(f));
      outputs.push_back(std::move(bytes));
    }
    for (std::size_t i = 1; i < outputs.size(); ++i) same = same && outputs[i] == outputs[0];
    os << outputs[0].size() << " files compared across 3 executions (1, 1 and 3 workers): "
       << (same ? "byte-identical" : "differ");
  } catch (const std::exception& e) {
    same = false;
    os << "error: " << e.what();
  }
  std::error_code ec;
  std::filesystem::remove_all(root, ec);
  return make_result("determinism", same, os);
}

PropertyResult check_phase_boundary() {
  std::ostringstream os;
  bool ok = true;
  int schedules = 0;
  for (auto kind : {ScheduleKind::TwoPhasePractical, ScheduleKind::TwoPhase}) {
    for (std::int64_t T : {2, 3, 10, 11, 1001, 1'000'000}) {
      ScheduleParams sp;
      sp.kind = kind;
      sp.T = T;
      sp.d = 5;
      sp.mu4 = 6.0;
      sp.B = 1.0;
      if (kind == ScheduleKind::TwoPhase && T < 1000) continue;  // log terms need T large
      const StepsizeSchedule s(sp);
      ++schedules;
      const std::int64_t half = T / 2;
      bool local = s.eta1() != s.eta2() && s.at(half) == s.eta1() && s.at(half + 1) == s.eta2() &&
                   s.phase(half) == 1 && s.phase(half + 1) == 2;
      for (std::int64_t t = 1; t <= T && local; ++t) {
        local = s.at(t) == (t <= half ? s.eta1() : s.eta2());
      }
      for (std::int64_t bad : {std::int64_t{0}, T + 1}) {
        try {
          (void)s.at(bad);
          local = false;
        } catch (const Error& e) {
          local = local && e.kind() == ErrorKind::InvalidArgument;
        }
      }
      if (!local) {
        ok = false;
        os << "violated for " << to_string(kind) << " T=" << T << "; ";
      }
    }
  }
  os << schedules << " schedules checked: constant within each phase, switch at t = T/2 + 1, "
     << "out-of-range t rejected";
  return make_result("stepsize-phase-boundary", ok, os);
}

PropertyResult check_gronwall_audit(std::int64_t n_instances, std::uint64_t seed) {
  Rng rng(seed);
  std::int64_t failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < n_instances; ++i) {
    const GronwallInstance inst = random_gronwall_instance(rng);
    const double slack = 1e-12 * std::max(1.0, std::abs(inst.u[0]));
    try {
      const GronwallResult r = gronwall_check(inst, slack);
      if (!r.holds) ++failures;
      worst = std::max(worst, r.max_slack);
    } catch (const Error&) {
      ++failures;
    }
  }
  std::ostringstream os;
  os << failures << " failures in " << n_instances << " instances; max (deviation - 2 alpha) = "
     << worst;
  return make_result("gronwall-audit", failures == 0, os);
}

PropertyResult check_psi2_normal(std::int64_t n, std::uint64_t seed) {
  const Sampler normal = [](Rng& rng) { return std::normal_distribution<double>()(rng); };
  const OrliczEstimate est = estimate_psi_alpha_norm(normal, 2.0, n, seed);
  const double target = std::sqrt(8.0 / 3.0);
  const double rel = std::abs(est.K_hat - target) / target;
  std::ostringstream os;
  os << "K_hat = " << est.K_hat << " vs sqrt(8/3) = " << target << ", relative error " << rel
     << " (tol 0.02, n = " << n << ")";
  return make_result("psi2-normal", rel <= 0.02, os);
}

PropertyResult check_spacing(std::uint64_t seed) {
  const SpacingResult r = spacing_experiment(50, 0.1, 10'000, seed);
  std::ostringstream os;
  os << "P(min W >= " << r.threshold << ") = " << r.empirical_prob << " +- " << r.stderr_
     << " (need >= 0.7, d = 50, eps = 0.1)";
  return make_result("spacing", r.empirical_prob >= 0.7, os);
}

PropertyResult check_moment_identity(const SourceDistribution& dist, std::uint64_t seed) {
  const MomentIdentityResult r = moment_identity_check(dist, 10, 20, 1'000'000, seed);
  std::ostringstream os;
  os << dist.describe() << ": " << r.n_within << " of " << r.n_comparisons
     << " within 3 SE, max |z| = " << r.max_abs_z;
  return make_result("moment-identity/" + to_string(dist.kind()),
                     r.n_within == r.n_comparisons, os);
}

std::vector<PropertyResult> structural_suite(std::uint64_t seed) {
  return {
      check_sphere_normalization(seed),
      check_rotation_identity(seed),
      check_ratio_identity(seed),
      check_projection_idempotence(seed),
      check_haar_orthogonality(seed),
      check_determinism(seed),
      check_phase_boundary(),
  };
}

std::vector<PropertyResult> run_validation_suite(std::uint64_t seed) {
  std::vector<PropertyResult> out = structural_suite(seed);
  out.push_back(check_gronwall_audit(10'000, seed));
  out.push_back(check_psi2_normal(1'000'000, seed));
  out.push_back(check_spacing(seed));
  out.push_back(check_moment_identity(SourceDistribution::mixture_gaussian(), seed));
  out.push_back(check_moment_identity(SourceDistribution::gaussian_bernoulli(), seed));
  return out;
}

}  // namespace tensorica
