#include "tensorica/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "tensorica/error.hpp"
#include "tensorica/harness.hpp"

namespace tensorica {

std::string format_double(double x) {
  if (!std::isfinite(x)) return {};
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error(ErrorKind::Io, "float formatting failed");
  return std::string(buf.data(), ptr);
}

std::string format_optional(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string();
}

void write_trace_csv(std::ostream& os, std::span<const LabeledTrace> traces) {
  os << kTraceHeader << '\n';
  for (const auto& entry : traces) {
    for (const auto& r : entry.trace->records) {
      os << entry.run_id << ',' << r.t << ',' << r.phase << ',' << format_double(r.tan_angle_min)
         << ',' << r.component_index << '\n';
    }
  }
}

void write_scaling_csv(std::ostream& os, const ScalingSummary& summary) {
  os << kScalingHeader << '\n';
  for (const auto& p : summary.points) {
    os << to_string(summary.axis) << ',' << format_double(p.value) << ','
       << format_double(p.mean_error) << ',' << format_double(p.stderr_) << ',' << p.n_runs
       << '\n';
  }
}

namespace {

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& body) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write to " + path.string() + " failed");
}

}  // namespace

void emit_trace_file(const std::filesystem::path& path, std::span<const LabeledTrace> traces) {
  write_file(path, [&](std::ostream& os) { write_trace_csv(os, traces); });
}

void emit_scaling_file(const std::filesystem::path& path, const ScalingSummary& summary) {
  write_file(path, [&](std::ostream& os) { write_scaling_csv(os, summary); });
}

}  // namespace tensorica
