// Acceptance run: one PASS/FAIL line per criterion with the measured values
// and wall time. Exit status counts failures that are not listed as known.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lzcd/ensemble.hpp"
#include "lzcd/propagate.hpp"
#include "lzcd/specfun.hpp"

using namespace lzcd;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
  // set when the tolerance cannot be met by the exact quantity itself
  std::string known_gap{};
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

GLZParams glz(double a, double b, double phi, PulseKind pulse = PulseKind::Lorentzian) {
  GLZParams p;
  p.a = a;
  p.b = b;
  p.phi = phi;
  p.pulse = pulse;
  return p;
}

double area_of(PulseKind kind, double b) {
  using boost::math::quadrature::gauss_kronrod;
  PulseShape p{kind, b};
  auto f = [&](double t) { return eval_pulse(p, t); };
  switch (kind) {
    case PulseKind::Lorentzian:
    case PulseKind::Gaussian:
      return boost::math::quadrature::sinh_sinh<double>().integrate(f, 1e-12);
    case PulseKind::Sinc:
      return 2.0 * boost::math::quadrature::ooura_fourier_sin<double>().integrate([](double t) { return 0.5 / t; }, b).first;
    default: {
      auto bp = pulse_breakpoints(p);
      double s = 0.0;
      std::vector<double> pts{bp.front(), bp.size() == 3 ? bp[1] : 0.0, bp.back()};
      for (int i = 0; i < 2; ++i) s += gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1], 0, 1e-14);
      return s;
    }
  }
}

Outcome lz_recovery() {
  double worst = 0.0;
  for (double a : {0.25, 0.5, 1.0, 1.5})
    worst = std::max(worst, std::abs(transition_probability(glz(a, 0.0, 0.0)) - std::exp(-pi * a * a)));
  return {worst <= 2e-3, fmt("max |P - exp(-pi a^2)| = %.3g (tol 2e-3)", worst)};
}

Outcome cd_exact() {
  double pf = 0.0, pmax = 0.0;
  for (double a : {0.3, 0.5, 1.0}) {
    auto r = propagate(glz(a, 1.0 / a, pi / 2), {}, true);
    pf = std::max(pf, r.final_prob);
    for (double p : r.prob) pmax = std::max(pmax, p);
  }
  return {pf <= 1e-4 && pmax <= 1e-3, fmt("max P_final = %.3g (tol 1e-4), max P(t) = %.3g (tol 1e-3)", pf, pmax)};
}

Outcome kick_vs_closed_form() {
  std::size_t warnings = 0;
  set_warning_handler([&](std::string_view) { ++warnings; });
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 5; ++j) {
      double a = 0.2 * (i + 1), phi = pi / 2 * j / 4.0;
      worst = std::max(worst, std::abs(delta_kick_probability(a, phi, 20.0) - p_infinity(a, phi)));
    }
  set_warning_handler([](std::string_view m) { std::fprintf(stderr, "lzcd warning: %.*s\n", int(m.size()), m.data()); });
  return {worst <= 2e-3, fmt("max deviation on 10x5 grid = %.3g (tol 2e-3), %zu norm renormalizations", worst, warnings)};
}

Outcome chi_anchors() {
  double at0 = std::abs(chi(0.0) - pi / 4);
  double odd = 0.0;
  for (int k = 1; k <= 50; ++k) odd = std::max(odd, std::abs(chi(0.1 * k) - chi(-0.1 * k)));
  double at5 = std::abs(pi / 2 - chi(5.0));
  return {at0 <= 1e-10 && odd <= 1e-12 && at5 <= 0.02,
          fmt("|chi(0) - pi/4| = %.2g, max |chi(a) - chi(-a)| = %.2g, pi/2 - chi(5) = %.7f (tol 0.02)", at0, odd, at5)};
}

Outcome phi0_minimal() {
  std::size_t violations = 0;
  for (int i = 0; i < 200; ++i) {
    double a = -3.0 + 6.0 * i / 199.0, p0 = p_infinity(a, 0.0);
    for (int j = 0; j < 50; ++j)
      if (p0 > p_infinity(a, pi / 2 * j / 49.0) + 1e-12) ++violations;
  }
  return {violations == 0, fmt("%zu violations on 200x50 grid", violations)};
}

Outcome averaged_lz() {
  double x = avg_plz(0.5, 0.1), y = avg_plz(1.0, 0.2);
  bool ok = std::abs(x - 0.4633) <= 5e-4 && std::abs(y - 0.0726) <= 5e-4;
  std::string d = fmt("avg_plz(0.5,0.1) = %.5f, avg_plz(1,0.2) = %.5f", x, y);
  for (auto [mu, s] : {std::pair{0.5, 0.1}, {1.0, 0.2}}) {
    auto r = average_probability({mu, s, 42}, 0.0, 0.0, GLZParams{}, 10000);
    double z = std::abs(r.mean - avg_plz(mu, s)) / r.std_error;
    ok = ok && z <= 3.0;
    d += fmt("; MC(%.1f,%.1f) = %.5f +- %.5f (%.2f SE)", mu, s, r.mean, r.std_error, z);
  }
  return {ok, d};
}

Outcome dirac_crossover() {
  auto gap = [](double s) { return average_p_infinity(0.0, s, pi / 2) - avg_plz(0.0, s); };
  std::uintmax_t iters = 100;
  auto [lo, hi] = boost::math::tools::toms748_solve(gap, 0.5, 1.5, boost::math::tools::eps_tolerance<double>(40), iters);
  double sstar = 0.5 * (lo + hi);
  double closest = -INFINITY;
  for (int k = 0; k <= 300; ++k) {
    double s = 0.05 + 2.95 * k / 300.0;
    closest = std::max(closest, average_p_infinity(0.0, s, 0.0) - avg_plz(0.0, s));
  }
  return {std::abs(sstar - 0.84) <= 0.05 && closest < 0.0,
          fmt("sigma*(pi/2) = %.5f (0.84 +- 0.05); max over sigma of <P_inf(phi=0)> - <P_LZ> = %.3g", sstar, closest)};
}

Outcome sigma1_beats_sigma2() {
  bool ok = true;
  std::string d;
  for (double mu : {0.3, 0.5, 1.0}) {
    GapDistribution dist{mu, mu / 5, 2024};
    auto x = optimize_bstar(dist, 0.0, GLZParams{}, 1000);
    auto y = optimize_bstar(dist, pi / 2, GLZParams{}, 1000);
    double se = std::hypot(x.p_star.std_error, y.p_star.std_error);
    double sep = (y.p_star.mean - x.p_star.mean) / se;
    ok = ok && sep >= 2.0;
    d += fmt("%smu=%.1f: P*(0) = %.3g, P*(pi/2) = %.3g, %.1f SE", d.empty() ? "" : "; ", mu, x.p_star.mean,
             y.p_star.mean, sep);
  }
  return {ok, d};
}

Outcome area_tradeoff() {
  GapDistribution dist{0.5, 0.1, 2024};
  auto x = average_area(dist, 0.0, GLZParams{}, 1000);
  auto y = average_area(dist, pi / 2, GLZParams{}, 1000);
  double single = adiabaticity_area(glz(0.5, 2.0, pi / 2));
  return {x.mean > y.mean && single <= 1e-3,
          fmt("area(phi=0) = %.4g, area(phi=pi/2) = %.4g, single-gap CD area = %.3g (tol 1e-3)", x.mean, y.mean, single)};
}

Outcome symmetries() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ua(-1.5, 1.5), ut(1.0, 10.0), ub(0.1, 6.0), up(0.0, pi / 2);
  double half = 0.0, sym = 0.0, parity = 0.0, angle = 0.0;
  for (int k = 0; k < 20; ++k) {
    double a = ua(rng), tf = ut(rng);
    auto plus = lz_propagator(a, tf, 0.0), minus = lz_propagator(a, 0.0, -tf);
    half = std::max({half, std::abs(minus.A - std::conj(plus.A)), std::abs(minus.B - plus.B)});
    auto full = compose(plus, minus);
    sym = std::max({sym, std::abs(full.A.imag()), std::abs(full.A - (2 * std::norm(plus.A) - 1)),
                    std::abs(full.B - 2.0 * plus.A * plus.B)});
    double b = ub(rng), phi = up(rng);
    parity = std::max(parity, std::abs(transition_probability(glz(a, b, phi)) - transition_probability(glz(-a, b, phi + pi))));
  }
  for (double b : {0.5, 2.0, 8.0}) {
    double p0 = transition_probability(glz(0.0, b, 0.0));
    for (double phi : {pi / 4, pi / 2}) angle = std::max(angle, std::abs(transition_probability(glz(0.0, b, phi)) - p0));
  }
  double worst = std::max({half, sym, parity, angle});
  return {worst <= 1e-6, fmt("half-window %.2g, symmetric window %.2g, parity %.2g, angle at a=0 %.2g (tol 1e-6)", half,
                             sym, parity, angle)};
}

Outcome pcf_agreement() {
  const double ts[] = {-6.0, -4.5, -2.0, 0.0, 1.0, 3.5, 6.0};
  double worst = 0.0;
  for (double a : {0.3, 0.7, 1.2})
    for (double ti : ts)
      for (double tf : ts) {
        if (ti == tf) continue;
        auto x = pcf_lz_propagator(a, tf, ti), y = lz_propagator(a, tf, ti);
        worst = std::max({worst, std::abs(x.A - y.A), std::abs(x.B - y.B)});
      }
  return {worst <= 1e-6, fmt("max entrywise difference over 42 windows x 3 gaps = %.3g (tol 1e-6)", worst)};
}

Outcome pulse_catalog() {
  double area_err = 0.0;
  bool peaks = true;
  for (PulseKind k : kAllPulseKinds)
    for (double b : {0.5, 1.0, 2.0, 5.0}) {
      area_err = std::max(area_err, std::abs(area_of(k, b) - pi / 2));
      peaks = peaks && eval_pulse({k, b}, 0.0) == b / 2;
    }
  bool ok = area_err <= 1e-6 && peaks;
  std::string d = fmt("max area error %.2g, peaks %s", area_err, peaks ? "exact" : "off");
  for (double mu : {0.3, 0.6})
    for (double phi : {0.0, pi / 2}) {
      GapDistribution dist{mu, mu / 5, 2024};
      auto L = optimize_bstar(dist, phi, glz(0, 0, 0, PulseKind::Lorentzian), 1000);
      auto s = optimize_bstar(dist, phi, glz(0, 0, 0, PulseKind::Sinc), 1000);
      double se = std::hypot(L.p_star.std_error, s.p_star.std_error);
      ok = ok && s.p_star.mean <= L.p_star.mean - 2 * se;
      d += fmt("; mu=%.1f phi=%s: P*(s) = %.3g, P*(L) = %.3g, %.1f SE", mu, phi == 0.0 ? "0" : "pi/2", s.p_star.mean,
               L.p_star.mean, (L.p_star.mean - s.p_star.mean) / se);
    }
  return {ok, d};
}

Outcome sigma_squared() {
  bool ok = true;
  std::string d;
  const double s[] = {0.02, 0.04, 0.08};
  for (double phi : {0.0, pi / 2}) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double sigma : s) {
      auto r = optimize_bstar({0.5, sigma, 2024}, phi, GLZParams{}, 1000);
      double x = std::log(sigma), y = std::log(r.p_star.mean);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    ok = ok && std::abs(slope - 2.0) <= 0.3;
    d += fmt("%sslope(phi=%s) = %.3f", d.empty() ? "" : ", ", phi == 0.0 ? "0" : "pi/2", slope);
  }
  return {ok, d + " (2 +- 0.3)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "LZ formula recovery", 1, lz_recovery},
      {2, "CD exactness", 1, cd_exact},
      {3, "closed-form P_inf vs numeric delta kick", 30, kick_vs_closed_form},
      {4, "chi anchors", 1, chi_anchors,
       "pi/2 - chi(5) = 0.0200215 in 40-digit arithmetic; pi/2 - chi(a) first drops to 0.02 at a = 5.0027"},
      {5, "phi = 0 minimality of P_inf", 1, phi0_minimal},
      {6, "averaged LZ anchors", 60, averaged_lz},
      {7, "Dirac-ensemble crossover", 10, dirac_crossover},
      {8, "sigma1 beats sigma2", 600, sigma1_beats_sigma2},
      {9, "adiabaticity trade-off", 120, area_tradeoff},
      {10, "symmetry suite", 60, symmetries},
      {11, "PCF propagator agreement", 30, pcf_agreement},
      {12, "pulse catalog", 600, pulse_catalog},
      {13, "sigma^2 scaling of P*", 300, sigma_squared},
  };

  int unexpected = 0, passed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool ok = o.pass && in_time;
    std::printf("%s %2d %s: %s [%.2f s of %.0f s]\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs, c.budget_s);
    if (!ok && !c.known_gap.empty()) std::printf("     known: %s\n", c.known_gap.c_str());
    if (ok) ++passed;
    else if (c.known_gap.empty() || !in_time) ++unexpected;
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass, %d unexpected failures\n", passed, criteria.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
