#pragma once

// Embedded Dormand-Prince 5(4) stepper with PI step control for
// d psi / dx = -i H(x) psi on a two-component state.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "lzcd/error.hpp"
#include "lzcd/pauli.hpp"
#include "lzcd/propagate.hpp"

namespace lzcd::detail {

/// Region in which the step is capped (narrow pulses).
struct StepZone {
  double lo = 0.0;
  double hi = 0.0;
  double max_step = 0.0;
};

struct EvolveStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t renormalizations = 0;
  double max_norm_error = 0.0;
  double error_estimate = 0.0;  // sum of local error norms of accepted steps
};

/// Norm drift beyond this triggers renormalization and a warning.
inline constexpr double kNormDriftLimit = 1e-8;

void emit_warning(std::string_view msg);

struct State4 {
  cplx p, m;
};

inline State4 axpy(const State4& y, double h, std::initializer_list<std::pair<double, const State4*>> terms) {
  State4 r = y;
  for (const auto& [c, k] : terms) {
    r.p += h * c * k->p;
    r.m += h * c * k->m;
  }
  return r;
}

template <class Ham>
State4 rhs(const Ham& ham, double x, const State4& y) {
  const PauliVector h = ham(x);
  const StateVector hy = apply(h, StateVector{y.p, y.m});
  return {cplx{hy.plus.imag(), -hy.plus.real()}, cplx{hy.minus.imag(), -hy.minus.real()}};
}

/// Integrates from x0 to x1. `stops` (any order) are landed on exactly; at
/// each stop `observer(x, psi)` is called. Zone boundaries are stops too.
template <class Ham, class Observer>
StateVector evolve(const Ham& ham, double x0, double x1, StateVector psi, const IntegratorConfig& cfg,
                   std::vector<double> stops, std::span<const StepZone> zones, Observer&& observer,
                   EvolveStats& stats) {
  cfg.validate();
  if (x0 == x1) return psi;
  const double dir = x1 > x0 ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);

  for (const auto& z : zones) {
    stops.push_back(z.lo);
    stops.push_back(z.hi);
  }
  stops.push_back(x1);
  // keep stops strictly inside (x0, x1], ordered along the direction of travel
  std::erase_if(stops, [&](double s) { return !(dir * (s - x0) > 0.0 && dir * (x1 - s) >= 0.0); });
  std::sort(stops.begin(), stops.end(), [&](double l, double r) { return dir * l < dir * r; });
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  auto cap_at = [&](double x, double step_dir_sign) {
    double cap = cfg.max_step;
    for (const auto& z : zones) {
      // the zone is entered only at its boundary, which is a stop
      const double probe = x + step_dir_sign * 1e-15 * std::max(1.0, std::abs(x));
      if (probe >= std::min(z.lo, z.hi) && probe <= std::max(z.lo, z.hi)) cap = std::min(cap, z.max_step);
    }
    return cap;
  };

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double safety = 0.9, alpha = 0.7 / 5.0, beta = 0.4 / 5.0;

  double x = x0;
  State4 y{psi.plus, psi.minus};
  State4 k1 = rhs(ham, x, y);

  // initial step from the local frequency scale
  const double freq = std::sqrt(std::norm(k1.p) + std::norm(k1.m)) / std::sqrt(psi.norm2());
  double h = std::min({cfg.max_step, 0.01 * span, freq > 0.0 ? 0.1 / freq : span});
  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t next_stop = 0;
  bool warned = false;

  while (dir * (x1 - x) > 0.0) {
    h = std::min(h, cap_at(x, dir));
    double step = h;
    bool hits_stop = false;
    const double target = stops[next_stop];
    if (step >= dir * (target - x)) {
      step = dir * (target - x);
      hits_stop = true;
    }
    if (step < 1e-13 * std::max(1.0, std::abs(x))) {
      // a stop closer than rounding: just land on it
      if (hits_stop) {
        x = target;
        ++next_stop;
        StateVector cur{y.p, y.m};
        observer(x, cur);
        continue;
      }
      std::ostringstream msg;
      msg << "step size underflow at x = " << x;
      throw StepUnderflow(msg.str(), x);
    }
    const double hs = dir * step;

    const State4 k2 = rhs(ham, x + c2 * hs, axpy(y, hs, {{a21, &k1}}));
    const State4 k3 = rhs(ham, x + c3 * hs, axpy(y, hs, {{a31, &k1}, {a32, &k2}}));
    const State4 k4 = rhs(ham, x + c4 * hs, axpy(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State4 k5 =
        rhs(ham, x + c5 * hs, axpy(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const double x_new = hits_stop ? target : x + hs;
    const State4 k6 =
        rhs(ham, x + hs, axpy(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State4 y_new = axpy(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State4 k7 = rhs(ham, x_new, y_new);
    const State4 err = axpy(State4{}, hs, {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});

    const double sp = cfg.atol + cfg.rtol * std::max(std::abs(y.p), std::abs(y_new.p));
    const double sm = cfg.atol + cfg.rtol * std::max(std::abs(y.m), std::abs(y_new.m));
    const double en = std::sqrt(0.5 * (std::norm(err.p) / (sp * sp) + std::norm(err.m) / (sm * sm)));

    if (en <= 1.0) {
      ++stats.steps;
      stats.error_estimate += std::sqrt(std::norm(err.p) + std::norm(err.m));
      x = x_new;
      y = y_new;
      k1 = k7;
      const double n2 = std::norm(y.p) + std::norm(y.m);
      const double drift = std::abs(n2 - 1.0);
      stats.max_norm_error = std::max(stats.max_norm_error, drift);
      if (drift > kNormDriftLimit) {
        const double s = 1.0 / std::sqrt(n2);
        y.p *= s;
        y.m *= s;
        k1 = rhs(ham, x, y);
        ++stats.renormalizations;
        if (!warned) {
          std::ostringstream msg;
          msg << "norm drift " << drift << " at x = " << x << "; state renormalized";
          emit_warning(msg.str());
          warned = true;
        }
      }
      if (hits_stop) {
        ++next_stop;
        observer(x, StateVector{y.p, y.m});
      }
      double fac = safety * std::pow(std::max(en, 1e-10), -alpha) * std::pow(err_old, beta);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      // a step truncated at a stop says nothing about the natural step size
      if (!hits_stop || step >= h) h = fac * step;
      err_old = std::max(en, 1e-4);
      last_rejected = false;
    } else {
      ++stats.rejected;
      h = step * std::max(0.2, safety * std::pow(en, -0.2));
      last_rejected = true;
    }
  }
  return {y.p, y.m};
}

}  // namespace lzcd::detail
