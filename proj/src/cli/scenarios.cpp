#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "lzcd/cli.hpp"
#include "lzcd/ensemble.hpp"
#include "lzcd/error.hpp"
#include "lzcd/propagate.hpp"
#include "lzcd/specfun.hpp"
#include "lzcd/version.hpp"

namespace lzcd::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f(double x) { return format_double(x); }

// CSV body builder
class Table {
 public:
  explicit Table(std::string columns) : columns_(std::move(columns)) {}

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((body_ << (first ? "" : ",") << cell(cells), first = false), ...);
    body_ << '\n';
  }

  const std::string& columns() const { return columns_; }
  std::string body() const { return body_.str(); }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(char c) { return std::string(1, c); }
  static std::string cell(std::size_t n) { return std::to_string(n); }
  static std::string cell(int n) { return std::to_string(n); }

  std::string columns_;
  std::ostringstream body_;
};

// Single writer for one scenario: every emitted file goes through here.
class Emitter {
 public:
  Emitter(const Scenario& s) : s_(s), dir_(s.out / s.name), mark_(Clock::now()) {}

  void emit(const std::string& file, const std::string& panel, const Table& t) {
    std::ostringstream os;
    os << "# version=" << kVersion << '\n';
    os << "# scenario=" << s_.name << '\n';
    os << "# panel=" << panel << '\n';
    for (const auto& [key, values] : echo(s_))
      for (const auto& v : values) os << "# " << key << '=' << v << '\n';
    os << t.columns() << '\n' << t.body();
    write(file, os.str());
  }

  void write(const std::string& file, const std::string& content) {
    const fs::path path = dir_ / file;
    if (std::find(written_.begin(), written_.end(), path) != written_.end())
      throw Error("scenario emitted " + file + " twice");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string());
    written_.push_back(path);
    out << content;
    out.close();
    if (!out) throw Error("cannot write " + path.string());
    files_.push_back({(fs::path(s_.name) / file).generic_string(), content.size(), fnv1a64_hex(content), since(mark_)});
    mark_ = Clock::now();
  }

  void discard() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
    files_.clear();
  }

  std::vector<FileRecord>& files() { return files_; }

 private:
  const Scenario& s_;
  fs::path dir_;
  Clock::time_point mark_;
  std::vector<fs::path> written_;
  std::vector<FileRecord> files_;
};

IntegratorConfig integrator(const Scenario& s) {
  IntegratorConfig c;
  c.rtol = s.rtol;
  return c;
}

EnsembleOptions ensemble_options(const Scenario& s) {
  EnsembleOptions o;
  o.integrator = integrator(s);
  o.serial = s.serial;
  return o;
}

GLZParams base_model(PulseKind pulse, SweepKind sweep, double c, double T, ErrorModel error = {}) {
  GLZParams m;
  m.pulse = pulse;
  m.T = T;
  m.error = error;
  if (sweep == SweepKind::Tan) m = with_tan_sweeps(m, c);
  return m;
}

GLZParams member(const GLZParams& model, double a, double b, double phi) {
  GLZParams p = with_gap(with_control(model, b), a);
  p.phi = phi;
  return p;
}

std::string panel_text(std::initializer_list<std::pair<const char*, std::string>> kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += (out.empty() ? "" : " ") + std::string(k) + "=" + v;
  return out;
}

std::string idx(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

// b0(mu) for the ensemble scenarios, falling back to the deepest dip
struct ControlChoice {
  double b = 0.0;
  std::string status = "ok";
};

ControlChoice choose_b0(double mu, double phi, const GLZParams& model, const EnsembleOptions& opts) {
  try {
    return {control_b0(mu, phi, model, opts), "ok"};
  } catch (const NoRoot& e) {
    return {e.b_min(), "no_root"};
  }
}

struct PStar {
  double b = 0.0;
  EnsembleResult r;
  std::string status;
};

PStar p_star(const GapDistribution& dist, double phi, const GLZParams& model, const Scenario& s,
             const EnsembleOptions& opts) {
  if (s.optimize) {
    auto res = optimize_bstar(dist, phi, model, s.samples, opts);
    std::string status = res.fallback ? "fallback" : (res.b0_from_min ? "no_root" : "ok");
    return {res.b_star, std::move(res.p_star), status};
  }
  const auto c = choose_b0(dist.mu, phi, model, opts);
  return {c.b, average_probability(dist, c.b, phi, model, s.samples, opts), c.status};
}

// ---------------------------------------------------------------------------

void run_surface(const Scenario& s, Emitter& em) {
  const auto cfg = integrator(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j)
    for (auto pulse : s.pulse)
      for (auto sweep : s.sweep)
        for (std::size_t k = 0; k < s.T.size(); ++k) {
          const GLZParams model = base_model(pulse, sweep, s.c, s.T[k]);
          const std::size_t nb = s.b.size();
          const auto P = parallel_map(
              s.a.size() * nb,
              [&](std::size_t i) { return transition_probability(member(model, s.a[i / nb], s.b[i % nb], s.phi[j]), cfg); },
              ensemble_options(s));
          Table t("a,b,P");
          for (std::size_t i = 0; i < P.size(); ++i) t.row(s.a[i / nb], s.b[i % nb], P[i]);
          em.emit("surface_" + idx("phi", j) + "_" + pulse_code(pulse) + "_" + std::string(sweep_name(sweep)) + "_" +
                      idx("T", k) + ".csv",
                  panel_text({{"phi", f(s.phi[j])}, {"pulse", std::string(1, pulse_code(pulse))},
                              {"sweep", std::string(sweep_name(sweep))}, {"T", f(s.T[k])}}),
                  t);
        }
}

void run_cc(const Scenario& s, Emitter& em) {
  const auto cfg = integrator(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j)
    for (auto pulse : s.pulse)
      for (auto sweep : s.sweep)
        for (std::size_t k = 0; k < s.T.size(); ++k) {
          const GLZParams model = base_model(pulse, sweep, s.c, s.T[k]);
          struct Pt {
            double b0, residual;
            bool root;
          };
          const auto pts = parallel_map(
              s.a.size(),
              [&](std::size_t i) {
                try {
                  const auto c = characteristic_b0(s.a[i], s.phi[j], model, cfg);
                  return Pt{c.b0, c.residual, true};
                } catch (const NoRoot& e) {
                  return Pt{e.b_min(), e.p_min(), false};
                }
              },
              ensemble_options(s));
          Table t("a,b0,residual,status");
          for (std::size_t i = 0; i < pts.size(); ++i)
            t.row(s.a[i], pts[i].root ? pts[i].b0 : kNaN, pts[i].residual, pts[i].root ? "ok" : "no_root");
          em.emit("cc_" + idx("phi", j) + "_" + pulse_code(pulse) + "_" + std::string(sweep_name(sweep)) + "_" +
                      idx("T", k) + ".csv",
                  panel_text({{"phi", f(s.phi[j])}, {"pulse", std::string(1, pulse_code(pulse))},
                              {"sweep", std::string(sweep_name(sweep))}, {"T", f(s.T[k])}}),
                  t);
        }
}

void run_timedep(const Scenario& s, Emitter& em) {
  const auto cfg = integrator(s);
  for (auto pulse : s.pulse)
    for (auto sweep : s.sweep)
      for (std::size_t k = 0; k < s.T.size(); ++k) {
        const GLZParams model = base_model(pulse, sweep, s.c, s.T[k]);
        for (std::size_t i = 0; i < s.a.size(); ++i)
          for (std::size_t j = 0; j < s.phi.size(); ++j) {
            std::vector<std::pair<std::string, double>> runs;
            for (std::size_t m = 0; m < s.b.size(); ++m) runs.emplace_back(idx("b", m), s.b[m]);
            std::string b0_status = "ok";
            try {
              runs.emplace_back("bcc", characteristic_b0(s.a[i], s.phi[j], model, cfg).b0);
            } catch (const NoRoot& e) {
              runs.emplace_back("bcc", e.b_min());
              b0_status = "no_root";
            }
            for (const auto& [label, b] : runs) {
              const auto rec = propagate(member(model, s.a[i], b, s.phi[j]), cfg, true);
              Table t("u,t,P,norm_error");
              for (std::size_t n = 0; n < rec.grid.size(); ++n)
                t.row(rec.grid[n], s.T[k] * (rec.grid[n] - 0.5), rec.prob[n], rec.norm_error[n]);
              em.emit("timedep_" + idx("a", i) + "_" + idx("phi", j) + "_" + pulse_code(pulse) + "_" +
                          std::string(sweep_name(sweep)) + "_" + idx("T", k) + "_" + label + ".csv",
                      panel_text({{"a", f(s.a[i])},
                                  {"b", f(b)},
                                  {"phi", f(s.phi[j])},
                                  {"pulse", std::string(1, pulse_code(pulse))},
                                  {"sweep", std::string(sweep_name(sweep))},
                                  {"T", f(s.T[k])},
                                  {"final_prob", f(rec.final_prob)},
                                  {"area", f(rec.area)},
                                  {"b_source", label == "bcc" ? "characteristic:" + b0_status : "grid"}}),
                      t);
            }
          }
      }
}

double crossover_sigma(double phi, const std::vector<double>& sigma) {
  auto g = [&](double sg) { return average_p_infinity(0.0, sg, phi) - avg_plz(0.0, sg); };
  for (std::size_t i = 0; i + 1 < sigma.size(); ++i) {
    const double g0 = g(sigma[i]), g1 = g(sigma[i + 1]);
    if (g0 == 0.0) return sigma[i];
    if ((g0 < 0.0) != (g1 < 0.0)) {
      std::uintmax_t iters = 100;
      const auto [lo, hi] = boost::math::tools::toms748_solve(g, sigma[i], sigma[i + 1], g0, g1,
                                                              boost::math::tools::eps_tolerance<double>(40), iters);
      return 0.5 * (lo + hi);
    }
  }
  return kNaN;
}

void run_dirac(const Scenario& s, Emitter& em) {
  {
    Table t("phi,a,chi,p_inf,p_small_a,p_large_a");
    for (double phi : s.phi)
      for (double a : s.a)
        t.row(phi, a, chi(a), p_infinity(a, phi), p_infinity_asymptotic(a, phi, AsymptoticRegime::Small),
              a > 0.0 ? p_infinity_asymptotic(a, phi, AsymptoticRegime::Large) : kNaN);
    em.emit("dirac_pinf.csv", "closed-form kick probability", t);
  }
  {
    Table t("phi,sigma,avg_p_inf,avg_plz");
    for (double phi : s.phi)
      for (double sg : s.sigma) t.row(phi, sg, average_p_infinity(0.0, sg, phi), avg_plz(0.0, sg));
    em.emit("dirac_average.csv", "averages over N(0, sigma^2)", t);
  }
  {
    std::vector<double> sorted = s.sigma;
    std::sort(sorted.begin(), sorted.end());
    Table t("phi,sigma_star");
    for (double phi : s.phi) t.row(phi, crossover_sigma(phi, sorted));
    em.emit("dirac_crossover.csv", "sigma where the kick average meets the free average", t);
  }
}

void run_pstar_vs_sigma(const Scenario& s, Emitter& em) {
  const auto opts = ensemble_options(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j) {
    Table t("pulse,sweep,T,mu,sigma,b,P_mean,P_std_error,nonpositive_gaps,avg_plz,status");
    for (auto pulse : s.pulse)
      for (auto sweep : s.sweep)
        for (double T : s.T) {
          const GLZParams model = base_model(pulse, sweep, s.c, T);
          for (double mu : s.mu)
            for (double sg : s.sigma) {
              const auto ps = p_star({mu, sg, s.seed}, s.phi[j], model, s, opts);
              t.row(pulse_code(pulse), std::string(sweep_name(sweep)), T, mu, sg, ps.b, ps.r.mean, ps.r.std_error,
                    ps.r.nonpositive_gaps, avg_plz(mu, sg), ps.status);
            }
        }
    em.emit("pstar_vs_sigma_" + idx("phi", j) + ".csv", panel_text({{"phi", f(s.phi[j])}}), t);
  }
}

void run_pstar_vs_mu(const Scenario& s, Emitter& em) {
  const auto opts = ensemble_options(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j) {
    Table t("pulse,sweep,T,sigma_ratio,mu,sigma,b,P_mean,P_std_error,nonpositive_gaps,avg_plz,status");
    for (auto pulse : s.pulse)
      for (auto sweep : s.sweep)
        for (double T : s.T) {
          const GLZParams model = base_model(pulse, sweep, s.c, T);
          for (double ratio : s.sigma_ratio)
            for (double mu : s.mu) {
              const double sg = ratio * mu;
              const auto ps = p_star({mu, sg, s.seed}, s.phi[j], model, s, opts);
              t.row(pulse_code(pulse), std::string(sweep_name(sweep)), T, ratio, mu, sg, ps.b, ps.r.mean,
                    ps.r.std_error, ps.r.nonpositive_gaps, avg_plz(mu, sg), ps.status);
            }
        }
    em.emit("pstar_vs_mu_" + idx("phi", j) + ".csv", panel_text({{"phi", f(s.phi[j])}}), t);
  }
}

void run_area(const Scenario& s, Emitter& em) {
  const auto opts = ensemble_options(s);
  const auto cfg = integrator(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j) {
    Table t("pulse,sweep,T,sigma_ratio,mu,sigma,b,area_mean,area_std_error,area_single_gap,area_free_mean,status");
    for (auto pulse : s.pulse)
      for (auto sweep : s.sweep)
        for (double T : s.T) {
          const GLZParams model = base_model(pulse, sweep, s.c, T);
          for (double ratio : s.sigma_ratio)
            for (double mu : s.mu) {
              const GapDistribution dist{mu, ratio * mu, s.seed};
              const auto c = choose_b0(mu, s.phi[j], model, opts);
              const auto gaps = sample_gaps(dist, s.samples);
              const auto areas = parallel_map(
                  gaps.size(), [&](std::size_t i) { return adiabaticity_area(member(model, gaps[i], c.b, s.phi[j]), cfg); },
                  opts);
              const auto free_areas = parallel_map(
                  gaps.size(), [&](std::size_t i) { return adiabaticity_area(member(model, gaps[i], 0.0, s.phi[j]), cfg); },
                  opts);
              auto mean_se = [](const std::vector<double>& v) {
                double m = 0.0;
                for (double x : v) m += x;
                m /= static_cast<double>(v.size());
                double ss = 0.0;
                for (double x : v) ss += (x - m) * (x - m);
                const double n = static_cast<double>(v.size());
                return std::pair{m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
              };
              const auto [am, ase] = mean_se(areas);
              const double single = adiabaticity_area(member(model, mu, c.b, s.phi[j]), cfg);
              t.row(pulse_code(pulse), std::string(sweep_name(sweep)), T, ratio, mu, ratio * mu, c.b, am, ase, single,
                    mean_se(free_areas).first, c.status);
            }
        }
    em.emit("area_" + idx("phi", j) + ".csv", panel_text({{"phi", f(s.phi[j])}}), t);
  }
}

void run_heatmap(const Scenario& s, Emitter& em) {
  const auto opts = ensemble_options(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j)
    for (auto kind : s.error_kind)
      for (std::size_t k = 0; k < s.T.size(); ++k) {
        const double T = s.T[k];
        const GLZParams nominal = base_model(PulseKind::Lorentzian, SweepKind::Lin, s.c, T);
        Table t("mu,sigma,epsilon,b,P_mean,P_std_error,status");
        for (double mu : s.mu) {
          // the control is tuned for the nominal pulse; the imperfection is not known to it
          const auto c = choose_b0(mu, s.phi[j], nominal, opts);
          for (double eps : s.epsilon)
            for (double sg : s.sigma) {
              const GLZParams model = base_model(PulseKind::Lorentzian, SweepKind::Lin, s.c, T, {kind, eps});
              const GapDistribution dist{mu, sg, s.seed};
              if (s.optimize) {
                const auto ps = p_star(dist, s.phi[j], model, s, opts);
                t.row(mu, sg, eps, ps.b, ps.r.mean, ps.r.std_error, ps.status);
              } else {
                const auto r = average_probability(dist, c.b, s.phi[j], model, s.samples, opts);
                t.row(mu, sg, eps, c.b, r.mean, r.std_error, c.status);
              }
            }
        }
        em.emit("heatmap_" + idx("phi", j) + "_kind" + std::to_string(static_cast<int>(kind)) + "_" + idx("T", k) + ".csv",
                panel_text({{"phi", f(s.phi[j])}, {"error_kind", std::to_string(static_cast<int>(kind))}, {"T", f(T)}}), t);
      }
}

void run_pulses(const Scenario& s, Emitter& em) {
  {
    Table t("pulse,t,f");
    for (auto pulse : s.pulse)
      for (int i = 0; i <= 240; ++i) {
        const double x = -6.0 + 0.05 * i;
        t.row(pulse_code(pulse), x, eval_pulse({pulse, 1.0}, x));
      }
    em.emit("pulses_shapes.csv", panel_text({{"b", "1"}}), t);
  }
  const auto opts = ensemble_options(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j) {
    Table t("pulse,T,sigma_ratio,mu,sigma,b,P_mean,P_std_error,status");
    for (auto pulse : s.pulse)
      for (double T : s.T) {
        const GLZParams model = base_model(pulse, SweepKind::Lin, s.c, T);
        for (double ratio : s.sigma_ratio)
          for (double mu : s.mu) {
            const auto ps = p_star({mu, ratio * mu, s.seed}, s.phi[j], model, s, opts);
            t.row(pulse_code(pulse), T, ratio, mu, ratio * mu, ps.b, ps.r.mean, ps.r.std_error, ps.status);
          }
      }
    em.emit("pulses_" + idx("phi", j) + ".csv", panel_text({{"phi", f(s.phi[j])}}), t);
  }
}

void run_sweeps(const Scenario& s, Emitter& em) {
  const auto opts = ensemble_options(s);
  for (std::size_t j = 0; j < s.phi.size(); ++j) {
    Table t("sweep,sigma_ratio,mu,sigma,T,b0,P_mean,P_std_error,b0_T_avg,P_mean_T_avg,P_std_error_T_avg,status");
    for (auto sweep : s.sweep)
      for (double ratio : s.sigma_ratio)
        for (double mu : s.mu) {
          const GapDistribution dist{mu, ratio * mu, s.seed};
          std::vector<ControlChoice> b0(s.T.size());
          double b0_sum = 0.0;
          for (std::size_t k = 0; k < s.T.size(); ++k) {
            b0[k] = choose_b0(mu, s.phi[j], base_model(PulseKind::Lorentzian, sweep, mu, s.T[k]), opts);
            b0_sum += b0[k].b;
          }
          const double b0_avg = b0_sum / static_cast<double>(s.T.size());
          for (std::size_t k = 0; k < s.T.size(); ++k) {
            const GLZParams model = base_model(PulseKind::Lorentzian, sweep, mu, s.T[k]);
            PStar at_t;
            if (s.optimize) {
              at_t = p_star(dist, s.phi[j], model, s, opts);
            } else {
              at_t = {b0[k].b, average_probability(dist, b0[k].b, s.phi[j], model, s.samples, opts), b0[k].status};
            }
            const auto avg = average_probability(dist, b0_avg, s.phi[j], model, s.samples, opts);
            t.row(std::string(sweep_name(sweep)), ratio, mu, ratio * mu, s.T[k], at_t.b, at_t.r.mean, at_t.r.std_error,
                  b0_avg, avg.mean, avg.std_error, at_t.status);
          }
        }
    em.emit("sweeps_" + idx("phi", j) + ".csv", panel_text({{"phi", f(s.phi[j])}, {"lambda0", "10"}, {"c", "mu"}}), t);
  }
}

void run_identities(const Scenario& s, Emitter& em) {
  const auto cfg = integrator(s);
  std::mt19937_64 rng(s.seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  {
    Table t("a,t_f,A_plus_re,A_plus_im,B_plus_re,B_plus_im,A_minus_re,A_minus_im,B_minus_re,B_minus_im,"
            "err_A_conj,err_B_equal,full_A_im,err_full_A");
    for (std::size_t i = 0; i < s.samples; ++i) {
      const double a = uniform(0.1, 2.0), tf = uniform(2.0, 8.0);
      const Unitary2 plus = lz_propagator(a, tf, 0.0, cfg);
      const Unitary2 minus = lz_propagator(a, 0.0, -tf, cfg);
      const Unitary2 full = compose(plus, minus);
      const double predicted = std::norm(plus.A) - std::norm(plus.B);
      t.row(a, tf, plus.A.real(), plus.A.imag(), plus.B.real(), plus.B.imag(), minus.A.real(), minus.A.imag(),
            minus.B.real(), minus.B.imag(), std::abs(minus.A - std::conj(plus.A)), std::abs(minus.B - plus.B),
            full.A.imag(), std::abs(full.A - predicted));
    }
    em.emit("identities_halfwindow.csv", "bare half-window propagators", t);
  }
  {
    Table t("a,b,phi,P,P_mirror,diff");
    for (std::size_t i = 0; i < s.samples; ++i) {
      const double a = uniform(-2.0, 2.0), b = uniform(0.2, 4.0), phi = uniform(0.0, kPi / 2);
      GLZParams p = member(GLZParams{}, a, b, phi);
      // (a, b) -> (-a, -b): flipping b flips the odd pulse, i.e. phi -> phi + pi
      GLZParams q = member(GLZParams{}, -a, b, phi + kPi);
      const double P = transition_probability(p, cfg), Q = transition_probability(q, cfg);
      t.row(a, b, phi, P, Q, std::abs(P - Q));
    }
    em.emit("identities_parity.csv", "P(a,b) against P(-a,-b)", t);
  }
  {
    Table t("b,phi,P,diff_to_first_phi");
    for (double b : s.b) {
      double first = kNaN;
      for (double phi : s.phi) {
        const double P = transition_probability(member(GLZParams{}, 0.0, b, phi), cfg);
        if (std::isnan(first)) first = P;
        t.row(b, phi, P, std::abs(P - first));
      }
    }
    em.emit("identities_angle.csv", "angle independence at zero gap", t);
  }
  {
    Table t("a,t_f,t_i,max_entry_diff");
    IntegratorConfig tight = cfg;
    tight.rtol = std::min(cfg.rtol, 1e-11);
    tight.atol = 1e-14;
    for (double a : {0.3, 0.7, 1.2})
      for (std::size_t i = 0; i < std::max<std::size_t>(1, s.samples / 4); ++i) {
        const double tf = uniform(-kPcfMaxTime, kPcfMaxTime), ti = uniform(-kPcfMaxTime, kPcfMaxTime);
        const Unitary2 exact = pcf_lz_propagator(a, tf, ti);
        const Unitary2 num = lz_propagator(a, tf, ti, tight);
        t.row(a, tf, ti, std::max(std::abs(exact.A - num.A), std::abs(exact.B - num.B)));
      }
    em.emit("identities_pcf.csv", "parabolic-cylinder propagator against integration", t);
  }
}

using Runner = void (*)(const Scenario&, Emitter&);

Runner runner_for(const std::string& name) {
  static const std::map<std::string, Runner> table = {
      {"surface", run_surface},   {"cc", run_cc},         {"timedep", run_timedep},
      {"dirac", run_dirac},       {"pstar-vs-sigma", run_pstar_vs_sigma},
      {"pstar-vs-mu", run_pstar_vs_mu}, {"area", run_area}, {"heatmap", run_heatmap},
      {"pulses", run_pulses},     {"sweeps", run_sweeps}, {"identities", run_identities}};
  return table.at(name);
}

nlohmann::json files_json(const std::vector<FileRecord>& files) {
  auto arr = nlohmann::json::array();
  for (const auto& fr : files)
    arr.push_back({{"path", fr.path}, {"bytes", fr.bytes}, {"fnv1a64", fr.fnv1a64}, {"seconds", fr.seconds}});
  return arr;
}

nlohmann::json report_json(const ScenarioReport& r) {
  nlohmann::json j{{"scenario", r.name}, {"status", r.ok ? "ok" : "failed"}, {"wall_seconds", r.seconds},
                   {"files", files_json(r.files)}};
  if (!r.ok) j["error"] = r.error;
  return j;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError({"output directory " + dir.string() + " cannot be created"});
  const fs::path probe = dir / ".lzcd-write-probe";
  {
    std::ofstream out(probe);
    out << "probe";
    if (!out) {
      fs::remove(probe, ec);
      throw ConfigError({"output directory " + dir.string() + " is not writable"});
    }
  }
  fs::remove(probe, ec);
}

ScenarioReport run_scenario(const Scenario& s) {
  validate(s);
  const fs::path dir = s.out / s.name;
  const bool existed = fs::exists(dir);
  ensure_writable(dir);

  ScenarioReport rep;
  rep.name = s.name;
  const auto t0 = Clock::now();
  Emitter em(s);
  try {
    runner_for(s.name)(s, em);
    rep.ok = true;
  } catch (const std::exception& e) {
    em.discard();
    rep.error = e.what();
  }
  rep.seconds = since(t0);
  rep.files = em.files();

  nlohmann::json j = report_json(rep);
  j["version"] = kVersion;
  j["seed"] = s.seed;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : echo(s)) params[k] = v;
  j["params"] = params;
  std::error_code ec;
  if (rep.ok) {
    write_json(dir / "manifest.json", j);
  } else if (!existed) {
    fs::remove_all(dir, ec);
  } else {
    // a previous manifest may list files that were just overwritten and removed
    fs::remove(dir / "manifest.json", ec);
  }
  return rep;
}

bool RunAllReport::ok() const {
  return std::all_of(scenarios.begin(), scenarios.end(), [](const ScenarioReport& r) { return r.ok; });
}

RunAllReport run_all(std::uint64_t seed, const ConfigMap& config, const GlobalOptions& flags) {
  GlobalOptions g = flags;
  g.seed = seed;
  fs::path out = Scenario{}.out;
  if (auto it = config.find("out"); it != config.end() && !it->second.empty()) out = it->second.back();
  if (g.out) out = *g.out;
  g.out = out;
  ensure_writable(out);

  RunAllReport all;
  const auto t0 = Clock::now();
  for (const auto& name : scenario_names()) {
    try {
      all.scenarios.push_back(run_scenario(make_scenario(name, config, g)));
    } catch (const std::exception& e) {
      ScenarioReport r;
      r.name = name;
      r.error = e.what();
      all.scenarios.push_back(std::move(r));
    }
  }
  nlohmann::json j{{"version", kVersion}, {"seed", seed}, {"wall_seconds", since(t0)}};
  auto arr = nlohmann::json::array();
  for (const auto& r : all.scenarios) arr.push_back(report_json(r));
  j["scenarios"] = arr;
  all.manifest = out / "manifest.json";
  write_json(all.manifest, j);
  return all;
}

}  // namespace lzcd::cli
