#include <doctest.h>

#include <cmath>
#include <string>

#include "tensorica/diagnostics.hpp"
#include "tensorica/error.hpp"
#include "tensorica/random.hpp"
#include "tensorica/solver.hpp"

using namespace tensorica;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorKind::Io, "unreachable");
}

}  // namespace

TEST_CASE("project_sphere") {
  const UnitVector p = project_sphere(vec({3, 4}));
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(project_sphere(vec({1, 0, 0})).vec() == vec({1, 0, 0}));
  CHECK(error_of([] { project_sphere(vec({0, 0})); }).kind() == ErrorKind::DegenerateVector);
  CHECK(error_of([] { project_sphere(vec({1e-310, 0})); }).kind() == ErrorKind::DegenerateVector);
  CHECK(error_of([] { UnitVector::from_unit(vec({1, 1})); }).kind() == ErrorKind::InvalidArgument);
}

TEST_CASE("sgd_step follows the projected cubic update") {
  const SolverState s{UnitVector::from_unit(vec({1, 0})), 0, 1};

  SUBCASE("positive kurtosis sign") {
    // Pre-projection [1.1, 0.1], norm sqrt(1.22).
    const SolverState next = sgd_step(s, vec({1, 1}), 0.1);
    CHECK(next.u[0] == doctest::Approx(0.99589320646).epsilon(1e-10));
    CHECK(next.u[1] == doctest::Approx(0.09053574604).epsilon(1e-10));
    CHECK(next.t == 1);
  }
  SUBCASE("negative kurtosis sign") {
    // Pre-projection [0.9, -0.1], norm sqrt(0.82).
    const SolverState neg{s.u, 0, -1};
    const SolverState next = sgd_step(neg, vec({1, 1}), 0.1);
    CHECK(next.u[0] == doctest::Approx(0.99388373467).epsilon(1e-10));
    CHECK(next.u[1] == doctest::Approx(-0.11043152607).epsilon(1e-10));
  }
  SUBCASE("orthogonal observation leaves u unchanged") {
    const SolverState next = sgd_step(s, vec({0, 5}), 0.3);
    CHECK(next.u == s.u);
    CHECK(next.t == 1);
  }
  SUBCASE("x and -x give the same update") {
    const SolverState start{project_sphere(vec({0.3, -0.4, 0.5})), 7, 1};
    const Vector x = vec({0.7, 1.1, -0.2});
    CHECK(sgd_step(start, x, 0.05).u == sgd_step(start, Vector(-x), 0.05).u);
  }
  SUBCASE("vanishing pre-projection vector reports the iteration") {
    const SolverState neg{s.u, 41, -1};
    const Error e = error_of([&] { sgd_step(neg, vec({1, 0}), 1.0); });
    CHECK(e.kind() == ErrorKind::DegenerateVector);
    REQUIRE(e.iteration().has_value());
    CHECK(*e.iteration() == 42);
  }
  SUBCASE("bad inputs") {
    CHECK(error_of([&] { sgd_step(s, vec({1, 1}), -0.1); }).kind() == ErrorKind::InvalidArgument);
    CHECK(error_of([&] { sgd_step(s, vec({1, 1, 1}), 0.1); }).kind() ==
          ErrorKind::InvalidDimension);
  }
}

TEST_CASE("stepsize schedules") {
  ScheduleParams p;
  p.kind = ScheduleKind::TwoPhasePractical;
  p.T = 1'000'000;
  p.d = 20;
  p.mu4 = 6.0;

  SUBCASE("two-phase practical values") {
    const StepsizeSchedule s(p);
    CHECK(s.at(1) == doctest::Approx(5.333333333e-5).epsilon(1e-9));
    CHECK(s.at(p.T) == doctest::Approx(3e-6).epsilon(1e-12));
    CHECK(s.at(p.T / 2) == s.at(1));
    CHECK(s.at(p.T / 2 + 1) == s.at(p.T));
    CHECK(s.phase(p.T / 2) == 1);
    CHECK(s.phase(p.T / 2 + 1) == 2);
    CHECK(stepsize_at(s, 17) == s.at(17));
  }
  SUBCASE("negative excess kurtosis uses its magnitude") {
    p.mu4 = 2.5;
    const StepsizeSchedule s(p);
    CHECK(s.at(1) == doctest::Approx(8.0 * 20 / (0.5 * 1e6)));
    CHECK(s.at(p.T) == doctest::Approx(9.0 / (0.5 * 1e6)));
  }
  SUBCASE("logarithmic schedules evaluate their formulas") {
    p.B = 1.0;
    p.T = 10'000;
    p.d = 4;
    p.kind = ScheduleKind::ConstantWarm;
    CHECK(StepsizeSchedule(p).at(1) ==
          doctest::Approx(9.0 * std::log(2.0 * 9.0 * 1e4 / 9.0) / (2.0 * 3.0 * 1e4)));
    p.kind = ScheduleKind::ConstantUniform;
    CHECK(StepsizeSchedule(p).at(5) ==
          doctest::Approx(4.0 * 4 * std::log(9.0 * 1e4 / (4.0 * 4)) / (3.0 * 1e4)));
    p.kind = ScheduleKind::TwoPhase;
    const StepsizeSchedule s(p);
    CHECK(s.at(5000) == doctest::Approx(8.0 * 4 * std::log(9.0 * 1e4 / (8.0 * 4)) / (3.0 * 1e4)));
    CHECK(s.at(5001) == doctest::Approx(9.0 * std::log(9.0 * 1e4 / 9.0) / (3.0 * 1e4)));
    CHECK(s.at(5000) != s.at(5001));
  }
  SUBCASE("infeasible logarithm names the condition") {
    p.kind = ScheduleKind::TwoPhase;
    p.B = 3.0;
    p.T = 100;
    const Error e = error_of([&] { StepsizeSchedule s(p); });
    CHECK(e.kind() == ErrorKind::ScheduleInfeasible);
    CHECK(std::string(e.what()).find("B^8") != std::string::npos);
  }
  SUBCASE("logarithmic schedule without B") {
    p.kind = ScheduleKind::ConstantWarm;
    CHECK(error_of([&] { StepsizeSchedule s(p); }).kind() == ErrorKind::ScheduleInfeasible);
  }
  SUBCASE("fixed stepsize, zero allowed") {
    p.kind = ScheduleKind::Fixed;
    p.fixed_eta = 0.0;
    CHECK(StepsizeSchedule(p).at(3) == 0.0);
    p.fixed_eta = -1.0;
    CHECK(error_of([&] { StepsizeSchedule s(p); }).kind() == ErrorKind::InvalidArgument);
  }
  SUBCASE("out of range t") {
    const StepsizeSchedule s(p);
    CHECK(error_of([&] { (void)s.at(0); }).kind() == ErrorKind::InvalidArgument);
    CHECK(error_of([&] { (void)s.at(p.T + 1); }).kind() == ErrorKind::InvalidArgument);
  }
  SUBCASE("names round-trip") {
    for (auto k : {ScheduleKind::ConstantWarm, ScheduleKind::ConstantUniform,
                   ScheduleKind::TwoPhase, ScheduleKind::TwoPhasePractical, ScheduleKind::Fixed}) {
      CHECK(parse_schedule_kind(to_string(k)) == k);
    }
  }
}

TEST_CASE("uniform initialization") {
  SUBCASE("d = 2, symmetric first coordinate") {
    double s = 0.0, s2 = 0.0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) {
      const UnitVector u = init_uniform(2, derive_seed(1, static_cast<std::uint64_t>(i)));
      CHECK_MESSAGE(std::abs(u.vec().norm() - 1.0) <= 1e-12, "draw " << i);
      s += u[0];
      s2 += u[0] * u[0];
    }
    const double mean = s / n;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt((s2 / n - mean * mean) / n));
  }
  SUBCASE("d = 20, E u1^2 = 1/d") {
    double s = 0.0, s2 = 0.0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i) {
      const double u1 = init_uniform(20, derive_seed(2, static_cast<std::uint64_t>(i)))[0];
      s += u1 * u1;
      s2 += u1 * u1 * u1 * u1;
    }
    const double mean = s / n;
    CHECK(std::abs(mean - 1.0 / 20) <= 3.0 * std::sqrt((s2 / n - mean * mean) / n));
  }
  CHECK(error_of([] { init_uniform(1, 0); }).kind() == ErrorKind::InvalidDimension);
}

TEST_CASE("warm initialization sits at the requested angle") {
  const MixingModel model = make_mixing_model(8, SourceDistribution::gaussian_bernoulli(), 4);
  for (double tan : {0.0, 0.25, 0.5, 2.0}) {
    const UnitVector u = init_warm(model, 3, tan, 77);
    CHECK(tan_angle(u.vec(), model.component(3)) == doctest::Approx(tan).epsilon(1e-12));
  }
  CHECK(error_of([&] { init_warm(model, 9, 0.5, 1); }).kind() == ErrorKind::IndexOutOfRange);
}

TEST_CASE("expected update favours the component under the correct sign") {
  // d = 5, a_1^T u = 0.9; the mean one-step change of (a_1^T u)^2 is positive
  // with the true kurtosis sign and negative with the flipped sign. The
  // stepsize is small enough that the O(eta^2) normalization term is negligible.
  const int d = 5;
  const MixingModel model = make_mixing_model(d, SourceDistribution::gaussian_bernoulli(), 21);
  Vector w = model.component(2);
  const UnitVector u = project_sphere(0.9 * model.component(1) + std::sqrt(1 - 0.81) * w);
  const Vector a1 = model.component(1);
  const double base = std::pow(a1.dot(u.vec()), 2);
  for (int sign : {1, -1}) {
    ObservationStream stream(model, 31);
    double s = 0.0, s2 = 0.0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) {
      const Vector x = stream.next_observation();
      const SolverState next = sgd_step(SolverState{u, 0, sign}, x, 1e-4);
      const double delta = std::pow(a1.dot(next.u.vec()), 2) - base;
      s += delta;
      s2 += delta * delta;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CAPTURE(sign);
    CAPTURE(mean);
    CAPTURE(se);
    CHECK(sign * mean > 3.0 * se);
  }
}

TEST_CASE("components are fixed points of the expected update") {
  const int d = 5;
  const MixingModel model = make_mixing_model(d, SourceDistribution::gaussian_bernoulli(), 22);
  const Vector a1 = model.component(1);
  ObservationStream stream(model, 32);
  const int n = 100'000;
  Vector s = Vector::Zero(d), s2 = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    const Vector x = stream.next_observation();
    const double p = a1.dot(x);
    // Update direction expressed in component coordinates.
    const Vector c = model.A.transpose() * (p * p * p * x);
    s += c;
    s2 += c.cwiseAbs2();
  }
  const Vector mean = s / n;
  for (int j = 1; j < d; ++j) {
    const double se = std::sqrt((s2[j] / n - mean[j] * mean[j]) / n);
    CHECK(std::abs(mean[j]) <= 3.0 * se);
  }
  CHECK(mean[0] == doctest::Approx(6.0).epsilon(0.05));  // E Z^4 along the component
}

TEST_CASE("kurtosis sign estimation") {
  for (const auto& dist :
       {SourceDistribution::gaussian_bernoulli(), SourceDistribution::mixture_gaussian()}) {
    ObservationStream stream(make_mixing_model(10, dist, 1), 2);
    CHECK(estimate_kurtosis_sign(stream, 10'000) == dist.kurtosis_sign());
  }
}

TEST_CASE("run") {
  const MixingModel model = make_mixing_model(6, SourceDistribution::gaussian_bernoulli(), 5);

  SUBCASE("zero stepsize freezes the iterate") {
    RunConfig rc;
    rc.T = 1;
    rc.seed = 9;
    rc.schedule.kind = ScheduleKind::Fixed;
    rc.schedule.fixed_eta = 0.0;
    const RunTrace trace = run(model, rc);
    CHECK(trace.final_u == init_uniform(6, derive_seed(9, SeedPurpose::Init)).vec());
    REQUIRE(trace.records.size() == 1);
    CHECK(trace.records[0].t == 1);
  }
  SUBCASE("records are ordered and end at T") {
    RunConfig rc;
    rc.T = 10;
    rc.seed = 3;
    const RunTrace trace = run(model, rc);
    CHECK(trace.records.size() <= 10);
    CHECK(trace.records.back().t == 10);
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
      CHECK(trace.records[i].t > trace.records[i - 1].t);
    }
    for (const auto& r : trace.records) {
      CHECK(r.tan_angle_min >= 0.0);
      CHECK(r.component_index >= 1);
      CHECK(r.component_index <= 6);
      CHECK(r.phase == (r.t <= 5 ? 1 : 2));
    }
  }
  SUBCASE("stride and snapshots") {
    RunConfig rc;
    rc.T = 1000;
    rc.seed = 3;
    rc.record_stride = 300;
    rc.record_snapshots = true;
    const RunTrace trace = run(model, rc);
    REQUIRE(trace.records.size() == 4);
    CHECK(trace.records[2].t == 900);
    CHECK(trace.records[3].t == 1000);
    CHECK(*trace.records[3].u_snapshot == trace.final_u);
    CHECK(default_record_stride(1'000'000) == 500);
    CHECK(default_record_stride(10) == 1);
  }
  SUBCASE("replay is bit-identical") {
    RunConfig rc;
    rc.T = 20'000;
    rc.seed = 123;
    const RunTrace a = run(model, rc);
    const RunTrace b = run(model, rc);
    CHECK(a.final_u == b.final_u);
    CHECK(a.config_fingerprint == b.config_fingerprint);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].tan_angle_min == b.records[i].tan_angle_min);
    }
    rc.seed = 124;
    CHECK(run(model, rc).config_fingerprint != a.config_fingerprint);
  }
  SUBCASE("estimated kurtosis sign drives the same run") {
    RunConfig rc;
    rc.T = 5000;
    rc.seed = 8;
    const RunTrace known = run(model, rc);
    rc.kurtosis_warmup = 10'000;
    CHECK(run(model, rc).final_u == known.final_u);
  }
  SUBCASE("converges into the warm region at d = 20") {
    const MixingModel big = make_mixing_model(20, SourceDistribution::gaussian_bernoulli(), 6);
    RunConfig rc;
    rc.T = 1'000'000;
    rc.seed = 10;
    const RunTrace trace = run(big, rc);
    CHECK(trace.records.back().tan_angle_min < 1.0 / std::sqrt(3.0));
  }
}
