#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "tensorica/config.hpp"
#include "tensorica/csv.hpp"
#include "tensorica/error.hpp"
#include "tensorica/harness.hpp"

using namespace tensorica;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tensorica-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.name = "small";
  c.d = {5};
  c.T = {2000};
  c.replications = 2;
  c.seed = 42;
  c.output_dir = out;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("format_double gives shortest round-trip text") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(3.0) == "3");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(std::numeric_limits<double>::infinity()).empty());
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()).empty());
  CHECK(format_optional(std::nullopt).empty());
  for (double x : {1e-300, 123456.789, 4.5e-3, 0.6180339887498949}) {
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("CSV schemas") {
  SUBCASE("empty trace set is header only") {
    std::ostringstream os;
    write_trace_csv(os, {});
    CHECK(os.str() == "run_id,t,phase,tan_angle_min,component_index\n");
  }
  SUBCASE("trace rows, infinite values as empty fields") {
    RunTrace trace;
    trace.records.push_back({5, 0.25, 3, 1, std::nullopt});
    trace.records.push_back({10, std::numeric_limits<double>::infinity(), 2, 2, std::nullopt});
    const LabeledTrace labeled{7, &trace};
    std::ostringstream os;
    write_trace_csv(os, std::span<const LabeledTrace>(&labeled, 1));
    CHECK(os.str() ==
          "run_id,t,phase,tan_angle_min,component_index\n7,5,1,0.25,3\n7,10,2,,2\n");
  }
  SUBCASE("scaling rows") {
    ScalingSummary s;
    s.axis = SweepAxis::D;
    s.points.push_back({7, 0.02, 0.001, 5});
    std::ostringstream os;
    write_scaling_csv(os, s);
    CHECK(os.str() == "axis,value,mean_error,stderr,n_runs\nd,7,0.02,0.001,5\n");
  }
}

TEST_CASE("log-log slope fit") {
  SUBCASE("exact line") {
    std::vector<ScalingPoint> pts;
    for (double T : {1e3, 1e4, 1e5}) pts.push_back({T, 2.0 * std::pow(T, -0.5), 0.0, 1});
    const SlopeFit fit = fit_loglog_slope(pts);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fit.slope_stderr < 1e-12);
    CHECK(fit.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(fit.n_used == 3);
  }
  SUBCASE("hand-computed normal equations") {
    // x = (1, 2, 3), y = (1, 3, 2): slope 1/2, intercept 1, SSR 3/2.
    const double e = std::exp(1.0);
    const std::vector<ScalingPoint> pts = {{e, e, 0, 1}, {e * e, e * e * e, 0, 1}, {e * e * e, e * e, 0, 1}};
    const SlopeFit fit = fit_loglog_slope(pts);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.slope_stderr == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  }
  SUBCASE("invalid points are skipped with a warning") {
    std::vector<ScalingPoint> pts;
    for (double T : {1e3, 1e4, 1e5}) pts.push_back({T, std::pow(T, -0.5), 0.0, 1});
    pts.push_back({1e6, 0.0, 0.0, 1});
    pts.push_back({1e7, std::numeric_limits<double>::quiet_NaN(), 0.0, 1});
    std::vector<std::string> warnings;
    const SlopeFit fit = fit_loglog_slope(pts, &warnings);
    CHECK(fit.n_used == 3);
    CHECK(warnings.size() == 2);
    CHECK(fit.slope == doctest::Approx(-0.5));
  }
  SUBCASE("fewer than three usable points") {
    const std::vector<ScalingPoint> pts = {{1, 1, 0, 1}, {2, 2, 0, 1}, {3, -1, 0, 1}};
    CHECK(kind_of([&] { fit_loglog_slope(pts); }) == ErrorKind::FitFailed);
  }
}

TEST_CASE("config text") {
  SUBCASE("parse with comments and lists") {
    const ExperimentConfig c = parse_config(
        "# sweep\nname = sweep\nd = 20\nT = 1e4, 5e4,2e5\ndistribution = mg\n"
        "schedule = two-phase\nB = 3.5\nreplications = 3   # three\nseed = 18446744073709551615\n");
    CHECK(c.name == "sweep");
    CHECK(c.T == std::vector<std::int64_t>{10'000, 50'000, 200'000});
    CHECK(c.distribution == SourceKind::MixtureGaussian);
    CHECK(c.schedule == ScheduleKind::TwoPhase);
    CHECK(*c.B == 3.5);
    CHECK(c.replications == 3);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(*c.sweep_axis() == SweepAxis::T);
  }
  SUBCASE("render round-trips") {
    ExperimentConfig c;
    c.d = {7, 12};
    c.init = InitWarm{2, 0.25};
    c.kurtosis_warmup = 5000;
    c.regime_max = 0.5;
    c.window_fraction = 0.4;
    const std::string text = render_config(c);
    CHECK(render_config(parse_config(text)) == text);
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { parse_config("bogus = 1"); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { parse_config("d = twenty"); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { parse_config("d"); }) == ErrorKind::InvalidConfig);
    try {
      parse_config("name = a\n\nreplications = x\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("replications") != std::string::npos);
    }
    try {
      parse_config("name = a\nno equals sign\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(kind_of([] { load_config("/nonexistent/dir/x.cfg"); }) == ErrorKind::Io);
  }
  SUBCASE("invariants") {
    ExperimentConfig c;
    c.d = {5, 6};
    c.T = {100, 200};
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidConfig);
    c = ExperimentConfig{};
    c.replications = 0;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidConfig);
    c = ExperimentConfig{};
    c.bernoulli.variance = 1.0;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidDistribution);
  }
}

TEST_CASE("worker count resolution") {
  ExperimentConfig c;
  c.workers = 2;
  ::unsetenv("TENSORICA_WORKERS");
  CHECK(resolve_workers(c) == 2);
  ::setenv("TENSORICA_WORKERS", "5", 1);
  CHECK(resolve_workers(c) == 5);
  ::setenv("TENSORICA_WORKERS", "zero", 1);
  CHECK(kind_of([&] { resolve_workers(c); }) == ErrorKind::InvalidConfig);
  ::unsetenv("TENSORICA_WORKERS");
  c.workers = 0;
  CHECK(resolve_workers(c) >= 1);
}

TEST_CASE("run_experiment bookkeeping") {
  TempDir tmp;
  ExperimentConfig c = small_config(tmp.path);
  c.replications = 1;
  c.T = {10};
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.runs.size() == 1);
  CHECK(r.runs[0].trace.records.size() <= 10);
  REQUIRE(r.files.size() == 2);
  CHECK(r.files[0].filename() == "small_trace_1.csv");
  CHECK(r.files[1].filename() == "small_summary.csv");
  const auto summary = lines_of(slurp(r.files[1]));
  REQUIRE(summary.size() == 2);
  CHECK(summary[0] == kSummaryHeader);
  const auto trace = lines_of(slurp(r.files[0]));
  CHECK(trace[0] == kTraceHeader);
  CHECK(trace.size() == r.runs[0].trace.records.size() + 1);
}

TEST_CASE("experiments are deterministic and independent of the worker count") {
  TempDir tmp;
  ExperimentConfig c = small_config(tmp.path / "a");
  c.replications = 4;
  const ExperimentResult a = run_experiment(c);
  c.output_dir = tmp.path / "b";
  const ExperimentResult b = run_experiment(c);
  c.output_dir = tmp.path / "c";
  c.workers = 3;
  const ExperimentResult w = run_experiment(c);
  REQUIRE(a.files.size() == 5);
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(slurp(a.files[i]) == slurp(b.files[i]));
    CHECK(slurp(a.files[i]) == slurp(w.files[i]));
  }
  c.seed = 43;
  c.output_dir = tmp.path / "d";
  CHECK(slurp(run_experiment(c).files[0]) != slurp(a.files[0]));
}

TEST_CASE("scaling sweep aggregates final-window means") {
  TempDir tmp;
  ExperimentConfig c = small_config(tmp.path);
  c.name = "sweep";
  c.T = {1000, 3000, 9000};
  c.replications = 3;
  ExperimentResult result;
  const ScalingSummary s = scaling_sweep(c, &result);
  CHECK(s.axis == SweepAxis::T);
  REQUIRE(s.points.size() == 3);

  // Recompute each point from the trace files alone.
  std::map<int, std::pair<double, int>> window;  // run_id -> (sum, count)
  std::map<int, std::int64_t> horizon;
  for (const auto& r : result.runs) horizon[r.run_id] = r.T;
  for (const auto& f : result.files) {
    if (f.filename().string().find("_trace_") == std::string::npos) continue;
    const auto rows = lines_of(slurp(f));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto fields = fields_of(rows[i]);
      const int id = std::stoi(fields[0]);
      const double t = std::stod(fields[1]);
      if (t > 0.4 * static_cast<double>(horizon[id])) {
        window[id].first += std::strtod(fields[3].c_str(), nullptr);
        window[id].second += 1;
      }
    }
  }
  for (const auto& p : s.points) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : result.runs) {
      if (static_cast<double>(r.T) != p.value) continue;
      sum += window[r.run_id].first / window[r.run_id].second;
      ++n;
    }
    CHECK(n == p.n_runs);
    CHECK(p.mean_error == doctest::Approx(sum / n).epsilon(1e-13));
  }
  const auto csv = lines_of(slurp(tmp.path / "sweep_scaling.csv"));
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] == kScalingHeader);
  CHECK(csv[1].rfind("T,1000,", 0) == 0);
  CHECK(std::isfinite(s.fitted_slope));
}

TEST_CASE("regime advisories and filtering") {
  TempDir tmp;
  ExperimentConfig c = small_config(tmp.path);
  c.write_traces = false;
  c.d = {10};
  c.T = {1000, 5000, 20'000, 100'000};  // d^4 / T = 10, 2, 0.5, 0.1
  c.replications = 1;
  ExperimentResult result;
  c.regime_max = 1.0;
  std::vector<std::string> warnings;
  try {
    scaling_sweep(c, &result);
    FAIL("two in-regime points cannot be fitted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FitFailed);
  }
  CHECK(result.warnings.size() == 2);
  CHECK(fs::exists(tmp.path / "small_scaling.csv"));
  c.regime_max = 5.0;
  const ScalingSummary s = summarize_scaling(c, result);
  CHECK(s.points.size() == 4);
  int excluded = 0;
  for (const auto& w : s.warnings) excluded += w.find("regime_max") != std::string::npos;
  CHECK(excluded == 1);
}

TEST_CASE("harness errors") {
  TempDir tmp;
  ExperimentConfig c = small_config(tmp.path);
  CHECK(kind_of([&] { scaling_sweep(c); }) == ErrorKind::InvalidConfig);
  c.schedule = ScheduleKind::TwoPhase;
  c.B = 3.0;
  c.T = {100};
  CHECK(kind_of([&] { execute_runs(c); }) == ErrorKind::ScheduleInfeasible);
  c = small_config(tmp.path / "file");
  std::ofstream(tmp.path / "file") << "x";
  CHECK(kind_of([&] { run_experiment(c); }) == ErrorKind::Io);
}
