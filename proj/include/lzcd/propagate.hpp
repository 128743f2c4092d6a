#pragma once

// Numerical propagation of the two-level Schroedinger equation.
//
// The production path integrates the GLZ family on the finite window
// u in [0, 1] (see models.hpp). A raw-time mode, i d/dt psi = H(t) psi with
// H(t) = -t s3 + a s1 + f(t) sigma_phi, serves the symmetry identities and
// the comparison with the exact parabolic-cylinder propagator.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <string_view>
#include <vector>

#include "lzcd/models.hpp"
#include "lzcd/pauli.hpp"

namespace lzcd {

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = 0.05;
  /// Coordinates the stepper must land on exactly (in the integration variable).
  std::vector<double> breakpoints{};

  void validate() const;
};

/// Number of uniform grid points used for recorded trajectories.
inline constexpr std::size_t kTrajectoryPoints = 1001;

struct TrajectoryRecord {
  std::vector<double> grid;        // u values (empty unless recorded)
  std::vector<double> prob;        // |<e(u)|psi(u)>|^2
  std::vector<double> norm_error;  // |psi(u)|^2 - 1
  double final_prob = 0.0;
  double area = 0.0;  // trapezoid integral of prob over the window, dt = T du
  double max_norm_error = 0.0;
  double error_estimate = 0.0;  // accumulated local error of the state, bounds |dP| up to a factor ~2
  std::size_t steps = 0;
  std::size_t renormalizations = 0;
  StateVector final_state{};
};

/// Propagates the instantaneous ground state of the bare Hamiltonian at u = 0
/// to u = 1 and projects onto the instantaneous excited state there.
TrajectoryRecord propagate(const GLZParams& params, const IntegratorConfig& cfg = {},
                           bool record = false);

double transition_probability(const GLZParams& params, const IntegratorConfig& cfg = {});

/// Integral of the instantaneous transition probability over the window.
double adiabaticity_area(const GLZParams& params, const IntegratorConfig& cfg = {});

/// Transition probability of the LZ problem with an instantaneous kick
/// K = exp(-i (pi/2) sigma_phi) at t = 0, on the symmetric window [-t_f, t_f].
/// The two b = 0 half-window propagators are integrated; the kick is exact.
/// Probabilities are taken between instantaneous eigenstates at -t_f and t_f.
double delta_kick_probability(double a, double phi, double t_f, const IntegratorConfig& cfg = {});

/// Same composition with a general kick exp(-i n.sigma); returns the
/// eigenstate-projected amplitude <e(t_f)| U |g(-t_f)>.
cplx delta_kick_amplitude(double a, const PauliVector& n, double t_f,
                          const IntegratorConfig& cfg = {});

/// Raw-time GLZ Hamiltonian -t s3 + a s1 + f(t) sigma_phi.
struct RawGLZ {
  double a = 0.0;
  double b = 0.0;
  double phi = std::numbers::pi / 2;
  PulseKind pulse = PulseKind::Lorentzian;
  ErrorModel error{};
};

PauliVector raw_hamiltonian_at(const RawGLZ& p, double t);

/// Propagator U(t_f, t_i) in raw time (t_f < t_i integrates backwards).
Unitary2 propagate_raw(const RawGLZ& p, double t_f, double t_i, const IntegratorConfig& cfg = {});

/// Bare LZ propagator U_0(t_f, t_i; a).
Unitary2 lz_propagator(double a, double t_f, double t_i, const IntegratorConfig& cfg = {});

/// CSV dump of a recorded trajectory: `#` header lines echoing the
/// parameters, then columns u,t,P,norm_error.
void write_trajectory_csv(std::ostream& os, const GLZParams& params, const TrajectoryRecord& rec);

/// Receives integrator warnings (norm drift). Defaults to stderr; an empty
/// handler silences them.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);

}  // namespace lzcd
