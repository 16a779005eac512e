// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tensorica/csv.hpp"
#include "tensorica/error.hpp"
#include "tensorica/harness.hpp"
#include "tensorica/validation.hpp"

using namespace tensorica;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool passed = false;
  std::string detail;
};

Outcome convergence() {
  std::ostringstream os;
  bool all = true;
  for (auto kind : {SourceKind::MixtureGaussian, SourceKind::GaussianBernoulli}) {
    ExperimentConfig c;
    c.name = "convergence";
    c.d = {20};
    c.T = {1'000'000};
    c.distribution = kind;
    c.replications = 5;
    c.seed = kSeed;
    const ExperimentResult r = execute_runs(c);
    int good = 0;
    os << to_string(kind) << ": final errors [";
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
      const auto& run = r.runs[i];
      const bool crossed = run.warm_entry && *run.warm_entry <= run.T / 2;
      if (crossed && run.final_error <= 0.05) ++good;
      os << (i ? " " : "") << format_double(std::round(run.final_error * 1e4) / 1e4);
      if (!crossed) os << "(no warm entry)";
    }
    // Stationary phase-two level: sqrt((d - 1) eta2 mu6 / (2 |mu4 - 3|)).
    const SourceDistribution dist = c.source();
    const double k = std::abs(dist.mu4() - 3.0);
    const double eta2 = 9.0 / (k * 1e6);
    const double level = std::sqrt(19.0 * eta2 * *dist.moment(6) / (2.0 * k));
    os << "], " << good << "/5 meet both conditions (need 4), predicted stationary level "
       << format_double(std::round(level * 1e4) / 1e4) << "; ";
    all = all && good >= 4;
  }
  return {all, os.str()};
}

Outcome slope(SweepAxis axis) {
  ExperimentConfig c;
  c.name = "slope";
  c.replications = 5;
  c.seed = kSeed;
  if (axis == SweepAxis::T) {
    c.d = {20};
    c.T = {10'000, 50'000, 200'000, 1'000'000};
  } else {
    c.d = {7, 12, 20, 33, 54};
    c.T = {1'000'000};
  }
  const ExperimentResult r = execute_runs(c);
  const ScalingSummary s = summarize_scaling(c, r);
  const double target = axis == SweepAxis::T ? -0.5 : 0.5;
  const double tol = axis == SweepAxis::T ? 0.15 : 0.2;
  std::ostringstream os;
  os << "points";
  for (const auto& p : s.points) {
    os << " (" << format_double(p.value) << ", " << format_double(std::round(p.mean_error * 1e5) / 1e5)
       << ")";
  }
  os << "; fitted slope " << format_double(std::round(s.fitted_slope * 1e4) / 1e4) << " +- "
     << format_double(std::round(s.slope_stderr * 1e4) / 1e4) << " (need " << target << " +- "
     << tol << ")";

  // Reported for comparison only: the same fit on final iterates.
  std::vector<ScalingPoint> finals = s.points;
  for (auto& p : finals) {
    double sum = 0.0;
    for (const auto& run : r.runs) {
      const double v = axis == SweepAxis::T ? static_cast<double>(run.T) : run.d;
      if (v == p.value) sum += run.final_error;
    }
    p.mean_error = sum / p.n_runs;
  }
  os << "; final-iterate slope "
     << format_double(std::round(fit_loglog_slope(finals).slope * 1e4) / 1e4);
  return {std::abs(s.fitted_slope - target) <= tol, os.str()};
}

Outcome from_properties(const std::vector<PropertyResult>& props) {
  bool all = true;
  std::ostringstream os;
  for (const auto& p : props) {
    all = all && p.passed;
    os << "\n    " << (p.passed ? "ok   " : "FAIL ") << p.name << ": " << p.detail;
  }
  return {all, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "two-phase convergence, d=20, T=1e6, both sources", convergence},
      {2, "T-scaling slope, d=20", [] { return slope(SweepAxis::T); }},
      {3, "d-scaling slope, T=1e6", [] { return slope(SweepAxis::D); }},
      {4, "moment identity, d=10, 20 directions, n=1e6",
       [] {
         return from_properties({check_moment_identity(SourceDistribution::mixture_gaussian(), kSeed),
                                 check_moment_identity(SourceDistribution::gaussian_bernoulli(), kSeed)});
       }},
      {5, "reversed Gronwall audit, 1e4 instances",
       [] { return from_properties({check_gronwall_audit(10'000, kSeed)}); }},
      {6, "psi_2 norm of N(0,1) within 2% at n=1e6",
       [] { return from_properties({check_psi2_normal(1'000'000, kSeed)}); }},
      {7, "spacing probability, d=50, eps=0.1, 1e4 trials",
       [] { return from_properties({check_spacing(kSeed)}); }},
      {8, "structural invariants", [] { return from_properties(structural_suite(kSeed)); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failures;
    std::printf("%s [%d] %s (%.1fs): %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
