// Command-line front end: simulate, scaling, validate, psi2, spacing, gronwall.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tensorica/config.hpp"
#include "tensorica/csv.hpp"
#include "tensorica/error.hpp"
#include "tensorica/harness.hpp"
#include "tensorica/mathkit.hpp"
#include "tensorica/validation.hpp"

namespace {

using namespace tensorica;

enum ExitCode { kOk = 0, kUsage = 1, kInfeasible = 2, kRuntime = 3, kValidation = 4 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidDistribution:
    case ErrorKind::InvalidDimension:
    case ErrorKind::InvalidArgument:
    case ErrorKind::ScheduleInfeasible:
    case ErrorKind::InfeasibleDimension:
    case ErrorKind::IndexOutOfRange:
      return kInfeasible;
    default:
      return kRuntime;
  }
}

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
  std::vector<std::string> settings;  // key=value
  // Shorthand overrides, applied after --set.
  std::string d, T, distribution, schedule, init;
  std::optional<int> replications;
  std::optional<unsigned> workers;
};

ExperimentConfig build_config(const GlobalOptions& g) {
  ExperimentConfig config = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  for (const auto& s : g.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + s + "'");
    }
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  const std::pair<const char*, const std::string*> shorthands[] = {
      {"d", &g.d}, {"T", &g.T}, {"distribution", &g.distribution},
      {"schedule", &g.schedule}, {"init", &g.init}};
  for (const auto& [key, value] : shorthands) {
    if (!value->empty()) apply_setting(config, key, *value);
  }
  if (g.replications) config.replications = *g.replications;
  if (g.workers) config.workers = *g.workers;
  if (g.seed) config.seed = *g.seed;
  if (!g.out.empty()) config.output_dir = g.out;
  return config;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_simulate(const GlobalOptions& g) {
  const ExperimentConfig config = build_config(g);
  const ExperimentResult result = run_experiment(config);
  print_warnings(result.warnings);
  if (!g.quiet) {
    std::cout << "run  d      T        final_tan    window_mean  warm_entry\n";
    for (const auto& r : result.runs) {
      std::cout << r.run_id << "  " << r.d << "  " << r.T << "  " << format_double(r.final_error)
                << "  " << format_double(r.window_error) << "  "
                << (r.warm_entry ? std::to_string(*r.warm_entry) : std::string("-")) << '\n';
    }
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
  }
  return kOk;
}

int cmd_scaling(const GlobalOptions& g, const std::string& axis) {
  ExperimentConfig config = build_config(g);
  if (!axis.empty() && !config.sweep_axis()) {
    if (axis == "T") {
      if (g.T.empty()) config.T = {10'000, 50'000, 200'000, 1'000'000};
    } else if (axis == "d") {
      if (g.d.empty()) config.d = {7, 12, 20, 33, 54};
    }
  }
  if (!config.sweep_axis()) {
    throw Error(ErrorKind::InvalidConfig, "scaling needs --axis or a list for d or T");
  }
  if (!axis.empty() && to_string(*config.sweep_axis()) != axis) {
    throw Error(ErrorKind::InvalidConfig, "--axis " + axis + " does not match the list given");
  }
  if (g.config_path.empty() && config.name == "experiment") config.name = "scaling_" + axis;
  const ScalingSummary summary = scaling_sweep(config);
  print_warnings(summary.warnings);
  std::cout << "axis " << to_string(summary.axis) << '\n';
  std::cout << "value  mean_error  stderr  n_runs\n";
  for (const auto& p : summary.points) {
    std::cout << format_double(p.value) << "  " << format_double(p.mean_error) << "  "
              << format_double(p.stderr_) << "  " << p.n_runs << '\n';
  }
  std::cout << "fitted_slope " << format_double(summary.fitted_slope) << " +- "
            << format_double(summary.slope_stderr) << '\n';
  return kOk;
}

int cmd_validate(const GlobalOptions& g) {
  const std::uint64_t seed = g.seed.value_or(1);
  const std::vector<PropertyResult> results = run_validation_suite(seed);
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    if (!g.quiet || !r.passed) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    }
  }
  std::cout << (all ? "all properties pass" : "validation failed") << '\n';
  return all ? kOk : kValidation;
}

int cmd_psi2(const GlobalOptions& g, const std::string& which, std::int64_t n, double alpha) {
  const std::uint64_t seed = g.seed.value_or(kDefaultOrliczSeed);
  OrliczEstimate est;
  std::optional<double> B;
  if (which == "normal") {
    const Sampler normal = [](Rng& rng) { return std::normal_distribution<double>()(rng); };
    est = estimate_psi_alpha_norm(normal, alpha, n, seed);
  } else {
    ExperimentConfig config = build_config(g);
    config.distribution = parse_source_kind(which);
    const SourceDistribution dist = config.source();
    est = estimate_psi_alpha_norm(sample_source(dist, static_cast<std::size_t>(n), seed), alpha);
    if (alpha == 2.0) B = est.K_hat * std::sqrt(8.0 / 3.0);
  }
  std::cout << "alpha " << format_double(est.alpha) << '\n'
            << "K_hat " << format_double(est.K_hat) << '\n'
            << "stderr " << format_double(est.stderr_) << '\n'
            << "tolerance " << format_double(est.tolerance) << '\n'
            << "n " << est.n_samples << '\n';
  if (B) std::cout << "B " << format_double(*B) << '\n';
  return kOk;
}

int cmd_spacing(const GlobalOptions& g, int d, double eps, std::int64_t trials) {
  const SpacingResult r = spacing_experiment(d, eps, trials, g.seed.value_or(1));
  std::cout << "threshold " << format_double(r.threshold) << '\n'
            << "probability " << format_double(r.empirical_prob) << '\n'
            << "stderr " << format_double(r.stderr_) << '\n'
            << "trials " << r.n_trials << '\n'
            << "bound " << format_double(1.0 - 3.0 * eps) << '\n';
  return kOk;
}

int cmd_gronwall(const GlobalOptions& g, std::int64_t instances) {
  const PropertyResult r = check_gronwall_audit(instances, g.seed.value_or(1));
  std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  return r.passed ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online tensorial ICA: streaming solver, diagnostics and experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment config file (key = value lines)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--quiet", g.quiet, "Print only essential output");
  app.add_option("--set", g.settings, "Override any config key (key=value, repeatable)");
  app.add_option("--d", g.d, "Dimension or comma-separated list");
  app.add_option("--T", g.T, "Horizon or comma-separated list");
  app.add_option("--distribution", g.distribution, "mixture-gaussian | gaussian-bernoulli");
  app.add_option("--schedule", g.schedule,
                 "two-phase-practical | two-phase | constant-warm | constant-uniform | fixed");
  app.add_option("--init", g.init, "uniform | warm");
  app.add_option("--replications", g.replications, "Replications per point");
  app.add_option("--workers", g.workers, "Worker threads (TENSORICA_WORKERS takes precedence)");

  auto* simulate = app.add_subcommand("simulate", "Run replicated experiments and write CSV traces");

  std::string axis;
  auto* scaling = app.add_subcommand("scaling", "Sweep d or T and fit the log-log error slope");
  scaling->add_option("--axis", axis, "Sweep axis")->check(CLI::IsMember({"d", "T"}));

  app.add_subcommand("validate", "Run the property suite; exit 4 on any failure");

  std::string psi_source = "normal";
  std::int64_t psi_n = 1'000'000;
  double psi_alpha = 2.0;
  auto* psi2 = app.add_subcommand("psi2", "Estimate the Orlicz psi_alpha norm of a source");
  psi2->add_option("--source", psi_source, "normal | mixture-gaussian | gaussian-bernoulli");
  psi2->add_option("--n", psi_n, "Sample size (>= 1e4)");
  psi2->add_option("--alpha", psi_alpha, "Orlicz index");

  int sp_d = 50;
  double sp_eps = 0.1;
  std::int64_t sp_trials = 10'000;
  auto* spacing = app.add_subcommand("spacing", "Order-statistic spacing experiment");
  spacing->add_option("--dim", sp_d, "Dimension");
  spacing->add_option("--eps", sp_eps, "Epsilon in (0, 1/3)");
  spacing->add_option("--trials", sp_trials, "Number of trials");

  std::int64_t gr_instances = 10'000;
  auto* gronwall = app.add_subcommand("gronwall", "Randomized audit of the reversed Gronwall bound");
  gronwall->add_option("--instances", gr_instances, "Number of random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(g);
    if (scaling->parsed()) return cmd_scaling(g, axis);
    if (psi2->parsed()) return cmd_psi2(g, psi_source, psi_n, psi_alpha);
    if (spacing->parsed()) return cmd_spacing(g, sp_d, sp_eps, sp_trials);
    if (gronwall->parsed()) return cmd_gronwall(g, gr_instances);
    return cmd_validate(g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
