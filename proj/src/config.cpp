#include "tensorica/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tensorica/csv.hpp"
#include "tensorica/error.hpp"

namespace tensorica {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = value.find(',', start);
    out.push_back(trim(value.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::InvalidConfig,
              "invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

// Accepts plain integers and exact scientific forms such as 1e6 or 2e5.
std::int64_t parse_int(std::string_view key, std::string_view text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc() && ptr == text.data() + text.size()) return v;
  double x = 0.0;
  auto [p2, ec2] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec2 == std::errc() && p2 == text.data() + text.size() && x == std::floor(x) &&
      std::abs(x) < 9e15) {
    return static_cast<std::int64_t>(x);
  }
  bad_value(key, text);
}

double parse_double(std::string_view key, std::string_view text) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text);
  return x;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(key, text);
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

std::string to_string(SweepAxis axis) { return axis == SweepAxis::D ? "d" : "T"; }

void ExperimentConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "name must be non-empty and contain no path separators");
  }
  if (d.empty() || T.empty()) throw Error(ErrorKind::InvalidConfig, "d and T must be non-empty");
  if (d.size() > 1 && T.size() > 1) {
    throw Error(ErrorKind::InvalidConfig, "at most one of d and T may be a list");
  }
  for (int v : d) {
    if (v < 2) throw Error(ErrorKind::InvalidConfig, "every d must be >= 2");
  }
  for (auto v : T) {
    if (v < 1) throw Error(ErrorKind::InvalidConfig, "every T must be >= 1");
  }
  if (replications < 1) throw Error(ErrorKind::InvalidConfig, "replications must be >= 1");
  if (record_stride < 0) throw Error(ErrorKind::InvalidConfig, "record_stride must be >= 0");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "window_fraction must lie in (0, 1]");
  }
  if (schedule == ScheduleKind::Fixed && !(fixed_eta >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "fixed schedule needs eta >= 0");
  }
  if (kurtosis_warmup && *kurtosis_warmup < 1) {
    throw Error(ErrorKind::InvalidConfig, "kurtosis_warmup must be >= 1");
  }
  if (const auto* w = std::get_if<InitWarm>(&init)) {
    for (int v : d) {
      if (w->component < 1 || w->component > v) {
        throw Error(ErrorKind::InvalidConfig, "warm_component must lie in [1, d]");
      }
    }
  }
  if (std::holds_alternative<InitGiven>(init)) {
    throw Error(ErrorKind::InvalidConfig, "explicit initial vectors are not supported in configs");
  }
  (void)source();
}

SourceDistribution ExperimentConfig::source() const {
  SourceDistribution dist = distribution == SourceKind::MixtureGaussian
                                ? SourceDistribution::mixture_gaussian(mixture)
                                : SourceDistribution::gaussian_bernoulli(bernoulli);
  if (B) dist.set_sub_gaussian_B(*B);
  return dist;
}

std::optional<SweepAxis> ExperimentConfig::sweep_axis() const {
  if (d.size() > 1) return SweepAxis::D;
  if (T.size() > 1) return SweepAxis::T;
  return std::nullopt;
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "name") {
    c.name = std::string(value);
  } else if (key == "d") {
    c.d.clear();
    for (auto item : split_list(value)) c.d.push_back(static_cast<int>(parse_int(key, item)));
  } else if (key == "T") {
    c.T.clear();
    for (auto item : split_list(value)) c.T.push_back(parse_int(key, item));
  } else if (key == "distribution") {
    c.distribution = parse_source_kind(std::string(value));
  } else if (key == "mixture_p") {
    c.mixture.p = parse_double(key, value);
  } else if (key == "mixture_offset") {
    c.mixture.offset = parse_double(key, value);
  } else if (key == "mixture_variance") {
    c.mixture.variance = parse_double(key, value);
  } else if (key == "bernoulli_p") {
    c.bernoulli.p = parse_double(key, value);
  } else if (key == "bernoulli_variance") {
    c.bernoulli.variance = parse_double(key, value);
  } else if (key == "B") {
    c.B = parse_double(key, value);
  } else if (key == "schedule") {
    c.schedule = parse_schedule_kind(std::string(value));
  } else if (key == "eta") {
    c.fixed_eta = parse_double(key, value);
  } else if (key == "init") {
    if (value == "uniform") {
      c.init = InitUniform{};
    } else if (value == "warm") {
      if (!std::holds_alternative<InitWarm>(c.init)) c.init = InitWarm{};
    } else {
      bad_value(key, value);
    }
  } else if (key == "warm_component" || key == "warm_tan") {
    if (!std::holds_alternative<InitWarm>(c.init)) c.init = InitWarm{};
    auto& w = std::get<InitWarm>(c.init);
    if (key == "warm_component") {
      w.component = static_cast<int>(parse_int(key, value));
    } else {
      w.tan_angle = parse_double(key, value);
    }
  } else if (key == "kurtosis") {
    if (value == "known") {
      c.kurtosis_warmup.reset();
    } else if (value == "estimate") {
      if (!c.kurtosis_warmup) c.kurtosis_warmup = 10'000;
    } else {
      bad_value(key, value);
    }
  } else if (key == "kurtosis_warmup") {
    c.kurtosis_warmup = parse_int(key, value);
  } else if (key == "replications") {
    c.replications = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
    c.seed = seed;
  } else if (key == "record_stride") {
    c.record_stride = parse_int(key, value);
  } else if (key == "full_resolution") {
    c.full_resolution = parse_bool(key, value);
  } else if (key == "output_dir") {
    c.output_dir = std::string(value);
  } else if (key == "window_fraction") {
    c.window_fraction = parse_double(key, value);
  } else if (key == "regime_max") {
    c.regime_max = parse_double(key, value);
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(parse_int(key, value));
  } else if (key == "write_traces") {
    c.write_traces = parse_bool(key, value);
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::InvalidConfig,
                    "line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "name = " << c.name << "\n";
  os << "d = " << join(c.d) << "\n";
  os << "T = " << join(c.T) << "\n";
  os << "distribution = " << to_string(c.distribution) << "\n";
  os << "mixture_p = " << format_double(c.mixture.p) << "\n";
  os << "mixture_offset = " << format_double(c.mixture.offset) << "\n";
  os << "mixture_variance = " << format_double(c.mixture.variance) << "\n";
  os << "bernoulli_p = " << format_double(c.bernoulli.p) << "\n";
  os << "bernoulli_variance = " << format_double(c.bernoulli.variance) << "\n";
  if (c.B) os << "B = " << format_double(*c.B) << "\n";
  os << "schedule = " << to_string(c.schedule) << "\n";
  os << "eta = " << format_double(c.fixed_eta) << "\n";
  if (const auto* w = std::get_if<InitWarm>(&c.init)) {
    os << "init = warm\nwarm_component = " << w->component
       << "\nwarm_tan = " << format_double(w->tan_angle) << "\n";
  } else {
    os << "init = uniform\n";
  }
  if (c.kurtosis_warmup) {
    os << "kurtosis = estimate\nkurtosis_warmup = " << *c.kurtosis_warmup << "\n";
  } else {
    os << "kurtosis = known\n";
  }
  os << "replications = " << c.replications << "\n";
  os << "seed = " << c.seed << "\n";
  os << "record_stride = " << c.record_stride << "\n";
  os << "full_resolution = " << (c.full_resolution ? "true" : "false") << "\n";
  os << "output_dir = " << c.output_dir.string() << "\n";
  os << "window_fraction = " << format_double(c.window_fraction) << "\n";
  if (c.regime_max) os << "regime_max = " << format_double(*c.regime_max) << "\n";
  os << "workers = " << c.workers << "\n";
  os << "write_traces = " << (c.write_traces ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace tensorica
