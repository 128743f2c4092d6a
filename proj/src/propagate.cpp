#include "lzcd/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <ostream>

#include "dopri5.hpp"
#include "lzcd/error.hpp"
#include "lzcd/version.hpp"

namespace lzcd {

namespace {

constexpr double kPi = std::numbers::pi;

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) { std::cerr << "lzcd warning: " << msg << '\n'; };
  return handler;
}

// Half-width of the pulse core, in units of the pulse argument.
constexpr double kZoneHalfWidths = 5.0;
constexpr double kZoneStepFraction = 0.1;

struct NoObserver {
  void operator()(double, const StateVector&) const {}
};

}  // namespace

namespace detail {
void emit_warning(std::string_view msg) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(msg);
}
}  // namespace detail

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

void IntegratorConfig::validate() const {
  if (!(rtol >= 1e-13)) throw InvalidArgument("IntegratorConfig: rtol must be >= 1e-13");
  if (!(atol >= 1e-15)) throw InvalidArgument("IntegratorConfig: atol must be >= 1e-15");
  if (!(max_step > 0.0)) throw InvalidArgument("IntegratorConfig: max_step must be positive");
}

TrajectoryRecord propagate(const GLZParams& params, const IntegratorConfig& cfg, bool record) {
  validate(params);
  cfg.validate();

  std::vector<double> stops = cfg.breakpoints;
  std::vector<detail::StepZone> zones;
  std::optional<PerturbedPulse> pulse;
  if (params.b > 0.0) {
    pulse.emplace(apply_error(params.pulse_shape(), params.error));
    // the pulse is centred where the pulse sweep crosses zero
    const double uc = *invert_sweep(params.pulse_sweep, 0.0);
    const double slope = eval_sweep(params.pulse_sweep, uc).dlambda_du;
    const double width = 1.0 / (params.b * slope);
    zones.push_back({std::max(0.0, uc - kZoneHalfWidths * width), std::min(1.0, uc + kZoneHalfWidths * width),
                     kZoneStepFraction * width});
    for (double x : pulse->breakpoints())
      if (auto u = invert_sweep(params.pulse_sweep, x)) stops.push_back(*u);
  }

  const auto ham = [&](double u) {
    const double lambda = eval_sweep(params.sweep, u).lambda;
    PauliVector h{0.0, params.T * params.a, 0.0, -params.T * lambda};
    if (pulse) {
      const auto [lp, dlp] = eval_sweep(params.pulse_sweep, u);
      const double drive = dlp * (*pulse)(lp);
      h.n1 += drive * std::cos(params.phi);
      h.n2 += drive * std::sin(params.phi);
    }
    return h;
  };

  TrajectoryRecord rec;
  const StateVector psi0 = ground_state(bare_hamiltonian_at(params, 0.0));
  auto prob_at = [&](double u, const StateVector& psi) {
    return std::norm(inner(excited_state(bare_hamiltonian_at(params, u)), psi));
  };

  detail::EvolveStats stats;
  StateVector psi;
  if (record) {
    const std::size_t n = kTrajectoryPoints;
    rec.grid.resize(n);
    rec.prob.assign(n, 0.0);
    rec.norm_error.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rec.grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    rec.prob[0] = prob_at(0.0, psi0);
    rec.norm_error[0] = psi0.norm2() - 1.0;
    stops.insert(stops.end(), rec.grid.begin() + 1, rec.grid.end());
    std::size_t next = 1;
    auto observer = [&](double u, const StateVector& s) {
      while (next < n && rec.grid[next] <= u) {
        if (rec.grid[next] == u) {
          rec.prob[next] = prob_at(u, s);
          rec.norm_error[next] = s.norm2() - 1.0;
        }
        ++next;
      }
    };
    psi = detail::evolve(ham, 0.0, 1.0, psi0, cfg, std::move(stops), zones, observer, stats);
    double area = 0.0;
    for (std::size_t i = 1; i < n; ++i)
      area += 0.5 * (rec.prob[i] + rec.prob[i - 1]) * (rec.grid[i] - rec.grid[i - 1]);
    rec.area = params.T * area;
  } else {
    psi = detail::evolve(ham, 0.0, 1.0, psi0, cfg, std::move(stops), zones, NoObserver{}, stats);
  }

  rec.final_state = psi;
  rec.final_prob = prob_at(1.0, psi);
  rec.max_norm_error = stats.max_norm_error;
  rec.error_estimate = stats.error_estimate;
  rec.steps = stats.steps;
  rec.renormalizations = stats.renormalizations;
  return rec;
}

double transition_probability(const GLZParams& params, const IntegratorConfig& cfg) {
  return propagate(params, cfg, false).final_prob;
}

double adiabaticity_area(const GLZParams& params, const IntegratorConfig& cfg) {
  return propagate(params, cfg, true).area;
}

PauliVector raw_hamiltonian_at(const RawGLZ& p, double t) {
  PauliVector h{0.0, p.a, 0.0, -t};
  if (p.b > 0.0) {
    const double f = apply_error({p.pulse, p.b}, p.error)(t);
    h.n1 += f * std::cos(p.phi);
    h.n2 += f * std::sin(p.phi);
  }
  return h;
}

Unitary2 propagate_raw(const RawGLZ& p, double t_f, double t_i, const IntegratorConfig& cfg) {
  cfg.validate();
  std::vector<double> stops = cfg.breakpoints;
  std::vector<detail::StepZone> zones;
  std::optional<PerturbedPulse> pulse;
  if (p.b > 0.0) {
    pulse.emplace(apply_error({p.pulse, p.b}, p.error));
    const double width = 1.0 / p.b;
    zones.push_back({-kZoneHalfWidths * width, kZoneHalfWidths * width, kZoneStepFraction * width});
    const auto bp = pulse->breakpoints();
    stops.insert(stops.end(), bp.begin(), bp.end());
  }
  const auto ham = [&](double t) {
    PauliVector h{0.0, p.a, 0.0, -t};
    if (pulse) {
      const double f = (*pulse)(t);
      h.n1 += f * std::cos(p.phi);
      h.n2 += f * std::sin(p.phi);
    }
    return h;
  };
  detail::EvolveStats stats;
  // first column of U is U|+> = (A, -B*)
  const StateVector col =
      detail::evolve(ham, t_i, t_f, StateVector::up(), cfg, std::move(stops), zones, NoObserver{}, stats);
  return {col.plus, -std::conj(col.minus)};
}

Unitary2 lz_propagator(double a, double t_f, double t_i, const IntegratorConfig& cfg) {
  return propagate_raw(RawGLZ{a, 0.0}, t_f, t_i, cfg);
}

cplx delta_kick_amplitude(double a, const PauliVector& n, double t_f, const IntegratorConfig& cfg) {
  if (!(t_f > 0.0)) throw InvalidArgument("delta_kick: t_f must be positive");
  const Unitary2 before = lz_propagator(a, 0.0, -t_f, cfg);
  const Unitary2 after = lz_propagator(a, t_f, 0.0, cfg);
  const Unitary2 total = compose(after, compose(pauli_exp(n), before));
  const StateVector g = ground_state({0.0, a, 0.0, t_f});
  const StateVector e = excited_state({0.0, a, 0.0, -t_f});
  return inner(e, apply(total, g));
}

double delta_kick_probability(double a, double phi, double t_f, const IntegratorConfig& cfg) {
  return std::norm(delta_kick_amplitude(a, (kPi / 2) * sigma_phi(phi), t_f, cfg));
}

void write_trajectory_csv(std::ostream& os, const GLZParams& p, const TrajectoryRecord& rec) {
  os << std::setprecision(17);
  os << "# version=" << kVersion << "\n# table=trajectory\n";
  os << "# a=" << p.a << "\n# b=" << p.b << "\n# phi=" << p.phi << "\n# pulse=" << pulse_code(p.pulse)
     << "\n# error_kind=" << static_cast<int>(p.error.kind) << "\n# epsilon=" << p.error.epsilon
     << "\n# sweep=" << sweep_name(p.sweep.kind) << "\n# lambda0=" << p.sweep.lambda0 << "\n# c=" << p.sweep.c
     << "\n# T=" << p.T << "\n# final_prob=" << rec.final_prob << "\n# area=" << rec.area << '\n';
  os << "u,t,P,norm_error\n";
  for (std::size_t i = 0; i < rec.grid.size(); ++i) {
    const double u = rec.grid[i];
    os << u << ',' << p.T * (u - 0.5) << ',' << rec.prob[i] << ',' << rec.norm_error[i] << '\n';
  }
}

}  // namespace lzcd
