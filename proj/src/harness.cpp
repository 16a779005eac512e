#include "tensorica/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "tensorica/csv.hpp"
#include "tensorica/error.hpp"
#include "tensorica/mathkit.hpp"
#include "tensorica/random.hpp"

namespace tensorica {

namespace {

struct Job {
  int run_id = 0;
  int replication = 0;
  int d = 0;
  std::int64_t T = 0;
};

std::vector<Job> plan_jobs(const ExperimentConfig& config) {
  std::vector<Job> jobs;
  int run_id = 0;
  for (int d : config.d) {
    for (std::int64_t T : config.T) {
      for (int r = 0; r < config.replications; ++r) jobs.push_back({++run_id, r, d, T});
    }
  }
  return jobs;
}

bool is_logarithmic(ScheduleKind kind) {
  return kind != ScheduleKind::TwoPhasePractical && kind != ScheduleKind::Fixed;
}

ScheduleParams schedule_params(const ExperimentConfig& config, const SourceDistribution& source,
                               int d, std::int64_t T) {
  ScheduleParams sp;
  sp.kind = config.schedule;
  sp.T = T;
  sp.d = d;
  sp.mu4 = source.mu4();
  sp.fixed_eta = config.fixed_eta;
  if (is_logarithmic(sp.kind)) sp.B = resolve_sub_gaussian_B(source);
  return sp;
}

double regime_ratio(int d, std::int64_t T) {
  const double dd = d;
  return dd * dd * dd * dd / static_cast<double>(T);
}

RunResult execute_job(const ExperimentConfig& config, const SourceDistribution& source,
                      const Job& job) {
  RunResult result;
  result.run_id = job.run_id;
  result.replication = job.replication;
  result.d = job.d;
  result.T = job.T;
  result.seed = replication_seed(config.seed, job.replication);

  const MixingModel model =
      make_mixing_model(job.d, source, derive_seed(result.seed, SeedPurpose::Mixing));
  RunConfig rc;
  rc.T = job.T;
  rc.schedule = schedule_params(config, source, job.d, job.T);
  rc.init = config.init;
  rc.seed = result.seed;
  rc.record_stride = config.record_stride;
  rc.full_resolution = config.full_resolution;
  rc.kurtosis_warmup = config.kurtosis_warmup;
  result.trace = run(model, rc);

  const TraceRecord& last = result.trace.records.back();
  result.final_error = last.tan_angle_min;
  result.final_component = last.component_index;
  result.window_error = result.trace.window_mean(config.window_fraction, job.T);
  result.warm_entry = result.trace.first_crossing(1.0 / std::sqrt(3.0));
  return result;
}

std::string summary_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << kSummaryHeader << '\n';
  for (const auto& r : result.runs) {
    os << r.run_id << ',' << r.replication << ',' << r.d << ',' << r.T << ',' << r.seed << ','
       << format_double(r.final_error) << ',' << r.final_component << ','
       << format_double(r.window_error) << ',';
    if (r.warm_entry) os << *r.warm_entry;
    os << '\n';
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write to " + path.string() + " failed");
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

ScalingSummary aggregate_points(const ExperimentConfig& config, const ExperimentResult& result) {
  ScalingSummary summary;
  summary.axis = config.sweep_axis().value_or(SweepAxis::T);
  summary.warnings = result.warnings;
  std::map<double, std::vector<double>> groups;
  for (const auto& r : result.runs) {
    const double key =
        summary.axis == SweepAxis::D ? static_cast<double>(r.d) : static_cast<double>(r.T);
    groups[key].push_back(r.window_error);
  }
  for (const auto& [value, errors] : groups) {
    ScalingPoint p;
    p.value = value;
    p.n_runs = static_cast<int>(errors.size());
    double sum = 0.0;
    for (double e : errors) sum += e;
    p.mean_error = sum / p.n_runs;
    if (p.n_runs > 1) {
      double ss = 0.0;
      for (double e : errors) ss += (e - p.mean_error) * (e - p.mean_error);
      p.stderr_ = std::sqrt(ss / (p.n_runs - 1) / p.n_runs);
    }
    summary.points.push_back(p);
  }
  return summary;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, int replication) {
  return derive_seed(derive_seed(seed, SeedPurpose::Replication),
                     static_cast<std::uint64_t>(replication));
}

unsigned resolve_workers(const ExperimentConfig& config) {
  if (const char* env = std::getenv("TENSORICA_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw Error(ErrorKind::InvalidConfig, "TENSORICA_WORKERS must be a positive integer");
    }
    return static_cast<unsigned>(v);
  }
  if (config.workers > 0) return config.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult execute_runs(const ExperimentConfig& config) {
  config.validate();
  const SourceDistribution source = config.source();
  ExperimentResult result;

  // Feasibility of every schedule is checked before any work starts.
  for (int d : config.d) {
    for (std::int64_t T : config.T) {
      StepsizeSchedule check(schedule_params(config, source, d, T));
      (void)check;
      if (regime_ratio(d, T) > 1.0) {
        std::ostringstream os;
        os << "d=" << d << ", T=" << T << ": d^4/T = " << format_double(regime_ratio(d, T))
           << " exceeds 1, outside the regime covered by the convergence bounds";
        result.warnings.push_back(os.str());
      }
    }
  }

  const std::vector<Job> jobs = plan_jobs(config);
  result.runs.resize(jobs.size());
  const unsigned workers =
      std::min<unsigned>(resolve_workers(config), static_cast<unsigned>(jobs.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::size_t first_error_index = jobs.size();
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      try {
        result.runs[i] = execute_job(config, source, jobs[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        // Keep the error of the lowest job index so failures do not depend on scheduling.
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result = execute_runs(config);
  ensure_directory(config.output_dir);
  if (config.write_traces) {
    for (const auto& r : result.runs) {
      const auto path =
          config.output_dir / (config.name + "_trace_" + std::to_string(r.run_id) + ".csv");
      const LabeledTrace labeled{r.run_id, &r.trace};
      emit_trace_file(path, std::span<const LabeledTrace>(&labeled, 1));
      result.files.push_back(path);
    }
  }
  const auto summary_path = config.output_dir / (config.name + "_summary.csv");
  write_text(summary_path, summary_csv(result));
  result.files.push_back(summary_path);
  return result;
}

SlopeFit fit_loglog_slope(const std::vector<ScalingPoint>& points,
                          std::vector<std::string>* warnings) {
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    if (!(p.mean_error > 0.0) || !std::isfinite(p.mean_error) || !(p.value > 0.0) ||
        !std::isfinite(p.value)) {
      if (warnings) {
        warnings->push_back("point " + format_double(p.value) +
                            " excluded from the fit: mean error " + format_double(p.mean_error) +
                            " is not positive and finite");
      }
      continue;
    }
    xs.push_back(std::log(p.value));
    ys.push_back(std::log(p.mean_error));
  }
  const auto n = static_cast<int>(xs.size());
  if (n < 3) {
    throw Error(ErrorKind::FitFailed,
                "slope fit needs at least 3 valid points, got " + std::to_string(n));
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::FitFailed, "sweep values are all equal");

  SlopeFit fit;
  fit.n_used = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    ssr += r * r;
  }
  fit.slope_stderr = std::sqrt(ssr / (n - 2) / sxx);
  return fit;
}

ScalingSummary summarize_scaling(const ExperimentConfig& config, const ExperimentResult& result) {
  ScalingSummary summary = aggregate_points(config, result);
  std::vector<ScalingPoint> fit_points;
  for (const auto& p : summary.points) {
    const int d = summary.axis == SweepAxis::D ? static_cast<int>(p.value) : config.d.front();
    const auto T =
        summary.axis == SweepAxis::T ? static_cast<std::int64_t>(p.value) : config.T.front();
    if (config.regime_max && regime_ratio(d, T) > *config.regime_max) {
      summary.warnings.push_back("point " + format_double(p.value) +
                                 " left out of the fit: d^4/T above regime_max");
      continue;
    }
    fit_points.push_back(p);
  }
  const SlopeFit fit = fit_loglog_slope(fit_points, &summary.warnings);
  summary.fitted_slope = fit.slope;
  summary.slope_stderr = fit.slope_stderr;
  return summary;
}

ScalingSummary scaling_sweep(const ExperimentConfig& config, ExperimentResult* out) {
  if (!config.sweep_axis()) {
    throw Error(ErrorKind::InvalidConfig, "scaling sweeps need a list for d or T");
  }
  ExperimentResult result = run_experiment(config);
  // The per-point CSV is written before fitting so the data survives a failed fit.
  const auto path = config.output_dir / (config.name + "_scaling.csv");
  emit_scaling_file(path, aggregate_points(config, result));
  result.files.push_back(path);
  if (out) *out = result;
  return summarize_scaling(config, result);
}

}  // namespace tensorica
