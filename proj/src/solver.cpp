#include "tensorica/solver.hpp"

#include <cmath>
#include <sstream>

#include "tensorica/error.hpp"
#include "tensorica/mathkit.hpp"

namespace tensorica {

namespace {

double log_factor(double argument, const char* condition) {
  if (!(argument > 1.0) || !std::isfinite(argument)) {
    std::ostringstream os;
    os << "scaling condition " << condition << " > 1 violated (value " << argument << ")";
    throw Error(ErrorKind::ScheduleInfeasible, os.str());
  }
  return std::log(argument);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void advance(Vector& u, const Vector& x, double signed_eta, Vector& scratch) {
  const double p = u.dot(x);
  const double gain = signed_eta * p * p * p;
  if (gain == 0.0) return;  // Pi_1 fixes points already on the sphere
  scratch = u;
  scratch.noalias() += gain * x;
  const double n = scratch.norm();
  if (!(n > 1e-300) || !std::isfinite(n)) {
    throw Error(ErrorKind::DegenerateVector, "pre-projection vector vanished");
  }
  u = scratch / n;
}

}  // namespace

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::ConstantWarm: return "constant-warm";
    case ScheduleKind::ConstantUniform: return "constant-uniform";
    case ScheduleKind::TwoPhase: return "two-phase";
    case ScheduleKind::TwoPhasePractical: return "two-phase-practical";
    case ScheduleKind::Fixed: return "fixed";
  }
  return "fixed";
}

ScheduleKind parse_schedule_kind(const std::string& text) {
  for (auto k : {ScheduleKind::ConstantWarm, ScheduleKind::ConstantUniform, ScheduleKind::TwoPhase,
                 ScheduleKind::TwoPhasePractical, ScheduleKind::Fixed}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown schedule '" + text + "'");
}

StepsizeSchedule::StepsizeSchedule(const ScheduleParams& params) : params_(params) {
  if (params_.T < 1) throw Error(ErrorKind::InvalidArgument, "schedule horizon T must be >= 1");
  if (params_.kind == ScheduleKind::Fixed) {
    if (!(params_.fixed_eta >= 0.0) || !std::isfinite(params_.fixed_eta)) {
      throw Error(ErrorKind::InvalidArgument, "fixed stepsize must be finite and >= 0");
    }
    eta1_ = eta2_ = params_.fixed_eta;
    return;
  }
  const double k = std::abs(params_.mu4 - 3.0);
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error(ErrorKind::ScheduleInfeasible, "stepsize schedules require mu4 != 3");
  }
  const bool needs_d = params_.kind != ScheduleKind::ConstantWarm;
  if (needs_d && params_.d < 2) throw Error(ErrorKind::InvalidDimension, "dimension must be >= 2");
  const auto T = static_cast<double>(params_.T);
  const double d = params_.d;

  const bool logarithmic = params_.kind != ScheduleKind::TwoPhasePractical;
  double B8 = 0.0;
  if (logarithmic) {
    if (!params_.B || !(*params_.B > 0.0)) {
      throw Error(ErrorKind::ScheduleInfeasible, "logarithmic schedule requires B > 0");
    }
    B8 = std::pow(*params_.B, 8);
  }

  switch (params_.kind) {
    case ScheduleKind::ConstantWarm:
      eta1_ = eta2_ = 9.0 * log_factor(2.0 * k * k * T / (9.0 * B8), "2 (mu4-3)^2 T / (9 B^8)") /
                      (2.0 * k * T);
      break;
    case ScheduleKind::ConstantUniform:
      eta1_ = eta2_ = 4.0 * d * log_factor(k * k * T / (4.0 * B8 * d), "(mu4-3)^2 T / (4 B^8 d)") /
                      (k * T);
      break;
    case ScheduleKind::TwoPhase:
      eta1_ = 8.0 * d * log_factor(k * k * T / (8.0 * B8 * d), "(mu4-3)^2 T / (8 B^8 d)") / (k * T);
      eta2_ = 9.0 * log_factor(k * k * T / (9.0 * B8), "(mu4-3)^2 T / (9 B^8)") / (k * T);
      break;
    case ScheduleKind::TwoPhasePractical:
      eta1_ = 8.0 * d / (k * T);
      eta2_ = 9.0 / (k * T);
      break;
    case ScheduleKind::Fixed: break;
  }
}

bool StepsizeSchedule::is_two_phase() const noexcept {
  return params_.kind == ScheduleKind::TwoPhase || params_.kind == ScheduleKind::TwoPhasePractical;
}

int StepsizeSchedule::phase(std::int64_t t) const noexcept {
  return is_two_phase() && t > params_.T / 2 ? 2 : 1;
}

double StepsizeSchedule::at(std::int64_t t) const {
  if (t < 1 || t > params_.T) {
    throw Error(ErrorKind::InvalidArgument, "stepsize requested outside 1 <= t <= T");
  }
  return phase(t) == 1 ? eta1_ : eta2_;
}

double stepsize_at(const StepsizeSchedule& schedule, std::int64_t t) { return schedule.at(t); }

SolverState sgd_step(const SolverState& state, const Vector& x, double eta) {
  if (!(eta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "stepsize must be non-negative");
  if (x.size() != state.u.dimension()) {
    throw Error(ErrorKind::InvalidDimension, "observation dimension mismatch");
  }
  const double p = state.u.vec().dot(x);
  const double gain = eta * state.kurtosis_sign * p * p * p;
  if (gain == 0.0) return SolverState{state.u, state.t + 1, state.kurtosis_sign};
  Vector w = state.u.vec() + gain * x;
  try {
    return SolverState{project_sphere(w), state.t + 1, state.kurtosis_sign};
  } catch (const Error& e) {
    throw e.with_iteration(state.t + 1);
  }
}

UnitVector init_uniform(int d, std::uint64_t seed) {
  if (d < 2) throw Error(ErrorKind::InvalidDimension, "dimension must be at least 2");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Vector chi(d);
  for (;;) {
    for (int i = 0; i < d; ++i) chi[i] = normal(rng);
    if (chi.norm() > 0.0) return project_sphere(chi);
  }
}

UnitVector init_warm(const MixingModel& model, int component, double tan_angle,
                     std::uint64_t seed) {
  const int d = model.dimension();
  if (component < 1 || component > d) {
    throw Error(ErrorKind::IndexOutOfRange, "component index must lie in [1, d]");
  }
  if (!(tan_angle >= 0.0) || !std::isfinite(tan_angle)) {
    throw Error(ErrorKind::InvalidArgument, "warm tan angle must be finite and >= 0");
  }
  const Vector a = model.component(component);
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Vector w(d);
  double n = 0.0;
  while (n < 1e-8) {
    for (int i = 0; i < d; ++i) w[i] = normal(rng);
    w -= a.dot(w) * a;
    n = w.norm();
  }
  w /= n;
  const double theta = std::atan(tan_angle);
  return project_sphere(std::cos(theta) * a + std::sin(theta) * w);
}

int estimate_kurtosis_sign(ObservationStream& stream, std::int64_t n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "warm-up length must be >= 1");
  const double d = stream.model().dimension();
  Vector x(stream.model().dimension()), z(stream.model().dimension());
  double sum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    stream.next_observation(x, z);
    const double r2 = x.squaredNorm();
    sum += r2 * r2;
  }
  return sum / static_cast<double>(n) - d * (d + 2.0) > 0.0 ? 1 : -1;
}

std::int64_t default_record_stride(std::int64_t T) { return std::max<std::int64_t>(1, T / 2000); }

RunTrace run(const MixingModel& model, const RunConfig& config) {
  if (config.T < 1) throw Error(ErrorKind::InvalidArgument, "T must be at least 1");
  const int d = model.dimension();

  ScheduleParams sp = config.schedule;
  sp.T = config.T;
  if (sp.d == 0) sp.d = d;
  if (sp.d != d) throw Error(ErrorKind::InvalidDimension, "schedule dimension differs from model");
  if (sp.mu4 == 0.0) sp.mu4 = model.source.mu4();
  const bool logarithmic =
      sp.kind != ScheduleKind::TwoPhasePractical && sp.kind != ScheduleKind::Fixed;
  if (logarithmic && !sp.B) sp.B = resolve_sub_gaussian_B(model.source);
  const StepsizeSchedule schedule(sp);

  UnitVector u0 = std::visit(
      [&](const auto& init) -> UnitVector {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, InitUniform>) {
          return init_uniform(d, derive_seed(config.seed, SeedPurpose::Init));
        } else if constexpr (std::is_same_v<T, InitWarm>) {
          return init_warm(model, init.component, init.tan_angle,
                           derive_seed(config.seed, SeedPurpose::Init));
        } else {
          if (init.u.size() != d) throw Error(ErrorKind::InvalidDimension, "init dimension");
          return project_sphere(init.u);
        }
      },
      config.init);

  int sign = model.source.kurtosis_sign();
  if (config.kurtosis_warmup) {
    ObservationStream warmup(model, derive_seed(config.seed, SeedPurpose::Warmup));
    sign = estimate_kurtosis_sign(warmup, *config.kurtosis_warmup);
  }

  std::int64_t stride = config.record_stride > 0 ? config.record_stride
                                                 : default_record_stride(config.T);
  if (config.full_resolution) stride = 1;

  RunTrace trace;
  trace.seed = config.seed;
  {
    std::ostringstream os;
    os.precision(17);
    os << model.source.describe() << "|d=" << d << "|T=" << config.T << "|schedule="
       << to_string(sp.kind) << "|eta=" << schedule.eta1() << "," << schedule.eta2()
       << "|init=" << config.init.index() << "|seed=" << config.seed << "|sign=" << sign
       << "|stride=" << stride;
    trace.config_fingerprint = fnv1a(os.str());
  }
  trace.records.reserve(static_cast<std::size_t>(config.T / stride + 1));

  ObservationStream stream(model, derive_seed(config.seed, SeedPurpose::Stream));
  Vector u = u0.vec();
  Vector x(d), z(d), scratch(d);
  for (std::int64_t t = 1; t <= config.T; ++t) {
    stream.next_observation(x, z);
    const double eta = schedule.at(t);
    try {
      advance(u, x, sign * eta, scratch);
    } catch (const Error& e) {
      throw e.with_iteration(t);
    }
    if (t % stride == 0 || t == config.T) {
      const ClosestComponent cc = closest_component(u, model.A);
      TraceRecord rec;
      rec.t = t;
      rec.tan_angle_min = cc.tan_abs;
      rec.component_index = cc.index;
      rec.phase = schedule.phase(t);
      if (config.record_snapshots) rec.u_snapshot = u;
      trace.records.push_back(std::move(rec));
    }
  }
  trace.final_u = u;
  return trace;
}

}  // namespace tensorica
