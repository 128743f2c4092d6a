#pragma once

// Hamiltonians, pulse shapes, sweep functions and pulse imperfections of the
// generalized Landau-Zener (GLZ) family on the finite window u in [0, 1]:
//
//   H(u) = T (-lambda(u; c) s3 + a s1) + lambda'(u; b) f(lambda(u; b)) sigma_phi
//
// All quantities are in the rescaled, dimensionless units of the LZ problem.

#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lzcd/pauli.hpp"

namespace lzcd {

enum class PulseKind { Lorentzian, Gaussian, Sinc, Rect, Triangle };

/// Single-letter code used in config files and CSV headers: L, g, s, r, t.
char pulse_code(PulseKind kind);
PulseKind parse_pulse_kind(std::string_view code);
inline constexpr PulseKind kAllPulseKinds[] = {PulseKind::Lorentzian, PulseKind::Gaussian,
                                               PulseKind::Sinc, PulseKind::Rect,
                                               PulseKind::Triangle};

/// Control pulse f(t; b), normalized so that f(0) = b/2 and its integral
/// over the real line is pi/2.
struct PulseShape {
  PulseKind kind = PulseKind::Lorentzian;
  double b = 1.0;
};

double eval_pulse(const PulseShape& p, double t);

/// Points where the pulse or its derivative is discontinuous (t-domain).
std::vector<double> pulse_breakpoints(const PulseShape& p);

enum class ErrorKind { None = 0, ScaleBoth = 1, FixPeak = 2, FixArea = 3 };

/// Imperfection of the control pulse. Kind 1 scales the amplitude, kind 2
/// stretches time by (1 - eps) at fixed peak, kind 3 does both.
struct ErrorModel {
  ErrorKind kind = ErrorKind::None;
  double epsilon = 0.0;
};

ErrorKind parse_error_kind(int code);

/// Pulse with an imperfection applied, evaluated in the raw pulse argument.
class PerturbedPulse {
 public:
  PerturbedPulse(PulseShape pulse, ErrorModel error);

  double operator()(double t) const;
  const PulseShape& shape() const { return pulse_; }
  const ErrorModel& error() const { return error_; }
  /// Area under the perturbed pulse when it has a closed form.
  double nominal_area() const;
  std::vector<double> breakpoints() const;

 private:
  PulseShape pulse_;
  ErrorModel error_;
  double amplitude_ = 1.0;
  double time_scale_ = 1.0;
};

/// Validates (kind, epsilon) against the pulse and returns the evaluator.
/// Kinds 2 and 3 are only defined for the Lorentzian.
PerturbedPulse apply_error(const PulseShape& p, const ErrorModel& e);

enum class SweepKind { Lin, Tan };

std::string_view sweep_name(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view name);

/// lambda_Lin(u) = lambda0 (u - 1/2)
/// lambda_Tan(u; c) = (lambda0/2) c tan(atan(1/c) (2u - 1))
/// Both take the values -lambda0/2 and +lambda0/2 at u = 0 and u = 1.
struct SweepSpec {
  SweepKind kind = SweepKind::Lin;
  double lambda0 = 10.0;
  double c = 1.0;
};

struct SweepValue {
  double lambda = 0.0;
  double dlambda_du = 0.0;
};

SweepValue eval_sweep(const SweepSpec& s, double u);

/// u in [0, 1] with lambda(u) = x, or nullopt when x is out of range.
std::optional<double> invert_sweep(const SweepSpec& s, double x);

void validate(const SweepSpec& s);

struct GLZParams {
  double a = 0.0;                           // gap coupling
  double b = 0.0;                           // control coupling; 0 switches control off
  double phi = std::numbers::pi / 2;        // control axis angle
  PulseKind pulse = PulseKind::Lorentzian;  // control pulse shape
  ErrorModel error{};                       // pulse imperfection
  SweepSpec sweep{};                        // sweep of the s3 term, lambda(u; c)
  SweepSpec pulse_sweep{};                  // sweep of the pulse argument, lambda(u; b)
  double T = 10.0;                          // protocol time

  PulseShape pulse_shape() const { return {pulse, b}; }
};

void validate(const GLZParams& p);

/// Returns p with control coupling b. A Tan pulse sweep follows the coupling
/// (its shape parameter is b itself).
GLZParams with_control(GLZParams p, double b);
GLZParams with_gap(GLZParams p, double a);

/// Configure both sweeps as Tan sweeps: the s3 term uses shape parameter c,
/// the pulse argument uses the control coupling.
GLZParams with_tan_sweeps(GLZParams p, double c);

PauliVector hamiltonian_at(const GLZParams& p, double u);

/// Bare part T(-lambda(u) s3 + a s1) whose eigenstates define adiabaticity.
PauliVector bare_hamiltonian_at(const GLZParams& p, double u);

/// Exact counterdiabatic Lorentzian (1/2) a / (t^2 + a^2).
double cd_pulse_reference(double a, double t);

}  // namespace lzcd
