#include "lzcd/models.hpp"

#include <algorithm>
#include <cmath>

#include "lzcd/error.hpp"

namespace lzcd {

namespace {
constexpr double kPi = std::numbers::pi;
}

char pulse_code(PulseKind kind) {
  switch (kind) {
    case PulseKind::Lorentzian: return 'L';
    case PulseKind::Gaussian: return 'g';
    case PulseKind::Sinc: return 's';
    case PulseKind::Rect: return 'r';
    case PulseKind::Triangle: return 't';
  }
  return '?';
}

PulseKind parse_pulse_kind(std::string_view code) {
  if (code == "L") return PulseKind::Lorentzian;
  if (code == "g") return PulseKind::Gaussian;
  if (code == "s") return PulseKind::Sinc;
  if (code == "r") return PulseKind::Rect;
  if (code == "t") return PulseKind::Triangle;
  throw InvalidArgument("unknown pulse kind '" + std::string(code) + "' (expected L, g, s, r or t)");
}

double eval_pulse(const PulseShape& p, double t) {
  if (!(p.b > 0.0)) throw InvalidArgument("eval_pulse: control coupling b must be positive");
  const double b = p.b;
  const double half_b = 0.5 * b;
  switch (p.kind) {
    case PulseKind::Lorentzian: return half_b / (b * b * t * t + 1.0);
    case PulseKind::Gaussian: return half_b * std::exp(-b * b * t * t / kPi);
    case PulseKind::Sinc: {
      const double x = b * t;
      if (std::abs(x) < 1e-4) return half_b * (1.0 - x * x / 6.0);
      return 0.5 * std::sin(x) / t;
    }
    case PulseKind::Rect: return std::abs(t) < kPi / (2.0 * b) ? half_b : 0.0;
    case PulseKind::Triangle:
      return std::abs(t) < kPi / b ? 0.5 * (b - std::abs(t) * b * b / kPi) : 0.0;
  }
  return 0.0;
}

std::vector<double> pulse_breakpoints(const PulseShape& p) {
  switch (p.kind) {
    case PulseKind::Rect: return {-kPi / (2.0 * p.b), kPi / (2.0 * p.b)};
    case PulseKind::Triangle: return {-kPi / p.b, 0.0, kPi / p.b};
    default: return {};
  }
}

ErrorKind parse_error_kind(int code) {
  switch (code) {
    case 0: return ErrorKind::None;
    case 1: return ErrorKind::ScaleBoth;
    case 2: return ErrorKind::FixPeak;
    case 3: return ErrorKind::FixArea;
    default: throw InvalidArgument("error kind must be one of 1, 2, 3 (or 0 for none)");
  }
}

PerturbedPulse::PerturbedPulse(PulseShape pulse, ErrorModel error) : pulse_(pulse), error_(error) {
  const double eps = error.epsilon;
  switch (error.kind) {
    case ErrorKind::None: break;
    case ErrorKind::ScaleBoth: amplitude_ = 1.0 + eps; break;
    case ErrorKind::FixPeak: time_scale_ = 1.0 - eps; break;
    case ErrorKind::FixArea:
      amplitude_ = 1.0 + eps;
      time_scale_ = 1.0 - eps;
      break;
  }
}

double PerturbedPulse::operator()(double t) const {
  return amplitude_ * eval_pulse(pulse_, time_scale_ * t);
}

double PerturbedPulse::nominal_area() const { return 0.5 * kPi * amplitude_ / time_scale_; }

std::vector<double> PerturbedPulse::breakpoints() const {
  auto pts = pulse_breakpoints(pulse_);
  for (double& x : pts) x /= time_scale_;
  return pts;
}

PerturbedPulse apply_error(const PulseShape& p, const ErrorModel& e) {
  if (!(p.b > 0.0)) throw InvalidArgument("apply_error: control coupling b must be positive");
  if (e.kind != ErrorKind::None) {
    if (!(e.epsilon > -1.0 && e.epsilon < 1.0))
      throw InvalidArgument("apply_error: epsilon must lie in (-1, 1)");
    if ((e.kind == ErrorKind::FixPeak || e.kind == ErrorKind::FixArea) &&
        p.kind != PulseKind::Lorentzian)
      throw InvalidArgument("apply_error: error kinds 2 and 3 are defined for the Lorentzian pulse only");
  }
  return PerturbedPulse(p, e);
}

std::string_view sweep_name(SweepKind kind) { return kind == SweepKind::Lin ? "Lin" : "Tan"; }

SweepKind parse_sweep_kind(std::string_view name) {
  if (name == "Lin" || name == "lin") return SweepKind::Lin;
  if (name == "Tan" || name == "tan") return SweepKind::Tan;
  throw InvalidArgument("unknown sweep kind '" + std::string(name) + "' (expected Lin or Tan)");
}

void validate(const SweepSpec& s) {
  if (!(s.lambda0 > 0.0)) throw InvalidArgument("sweep: lambda0 must be positive");
  if (s.kind == SweepKind::Tan && !(s.c > 0.0))
    throw InvalidArgument("sweep: Tan shape parameter c must be positive");
}

SweepValue eval_sweep(const SweepSpec& s, double u) {
  if (s.kind == SweepKind::Lin) return {s.lambda0 * (u - 0.5), s.lambda0};
  if (!(s.c > 0.0)) throw InvalidArgument("eval_sweep: Tan shape parameter c must be positive");
  const double theta = std::atan(1.0 / s.c);
  const double tn = std::tan(theta * (2.0 * u - 1.0));
  const double half = 0.5 * s.lambda0 * s.c;
  return {half * tn, half * (1.0 + tn * tn) * 2.0 * theta};
}

std::optional<double> invert_sweep(const SweepSpec& s, double x) {
  const double half = 0.5 * s.lambda0;
  if (std::abs(x) > half * (1.0 + 1e-12)) return std::nullopt;
  x = std::clamp(x, -half, half);
  if (s.kind == SweepKind::Lin) return 0.5 + x / s.lambda0;
  const double theta = std::atan(1.0 / s.c);
  return std::clamp(0.5 * (1.0 + std::atan(x / (half * s.c)) / theta), 0.0, 1.0);
}

void validate(const GLZParams& p) {
  if (!(p.T > 0.0)) throw InvalidArgument("GLZParams: protocol time T must be positive");
  if (!(p.b >= 0.0)) throw InvalidArgument("GLZParams: control coupling b must be non-negative");
  if (!std::isfinite(p.a) || !std::isfinite(p.phi))
    throw InvalidArgument("GLZParams: gap and angle must be finite");
  validate(p.sweep);
  if (p.b > 0.0) {
    validate(p.pulse_sweep);
    (void)apply_error(p.pulse_shape(), p.error);
  }
}

GLZParams with_control(GLZParams p, double b) {
  p.b = b;
  if (p.pulse_sweep.kind == SweepKind::Tan) p.pulse_sweep.c = b;
  return p;
}

GLZParams with_gap(GLZParams p, double a) {
  p.a = a;
  return p;
}

GLZParams with_tan_sweeps(GLZParams p, double c) {
  p.sweep = {SweepKind::Tan, p.sweep.lambda0, c};
  p.pulse_sweep = {SweepKind::Tan, p.pulse_sweep.lambda0, p.b};
  return p;
}

PauliVector bare_hamiltonian_at(const GLZParams& p, double u) {
  const double lambda = eval_sweep(p.sweep, u).lambda;
  return {0.0, p.T * p.a, 0.0, -p.T * lambda};
}

PauliVector hamiltonian_at(const GLZParams& p, double u) {
  PauliVector h = bare_hamiltonian_at(p, u);
  if (p.b > 0.0) {
    const auto [lambda, dlambda] = eval_sweep(p.pulse_sweep, u);
    const double drive = dlambda * PerturbedPulse(p.pulse_shape(), p.error)(lambda);
    h.n1 += drive * std::cos(p.phi);
    h.n2 += drive * std::sin(p.phi);
  }
  return h;
}

double cd_pulse_reference(double a, double t) {
  if (a == 0.0) throw InvalidArgument("cd_pulse_reference: the counterdiabatic term is undefined at a = 0");
  return 0.5 * a / (t * t + a * a);
}

}  // namespace lzcd
