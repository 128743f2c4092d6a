// lzcd command-line front-end.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "lzcd/cli.hpp"
#include "lzcd/ensemble.hpp"
#include "lzcd/error.hpp"
#include "lzcd/propagate.hpp"
#include "lzcd/specfun.hpp"
#include "lzcd/version.hpp"

using namespace lzcd;
using lzcd::cli::ConfigMap;

namespace {

// Command-line values, kept as text so they can override config entries.
struct Overrides {
  std::map<std::string, std::vector<std::string>> values;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    app->add_option("--" + key, values[key], help)->delimiter(',');
  }
};

ConfigMap merge(ConfigMap config, const Overrides& o) {
  for (const auto& [k, v] : o.values)
    if (!v.empty()) config[k] = v;
  return config;
}

class Params {
 public:
  explicit Params(ConfigMap m) : m_(std::move(m)) {}

  double real(const std::string& key, double fallback) { return axis(key, {fallback}).front(); }

  std::vector<double> axis(const std::string& key, std::vector<double> fallback) {
    auto it = m_.find(key);
    if (it == m_.end()) return fallback;
    std::vector<double> out;
    for (const auto& t : it->second) {
      try {
        out.push_back(key == "phi" ? cli::parse_angle(t) : std::stod(t));
      } catch (const std::exception&) {
        problems_.push_back(key + ": '" + t + "' is not a number");
      }
    }
    return out;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    auto it = m_.find(key);
    return it == m_.end() ? fallback : it->second.back();
  }

  template <class F>
  auto parsed(const std::string& key, const std::string& fallback, F&& f) -> decltype(f(fallback)) {
    try {
      return f(text(key, fallback));
    } catch (const Error& e) {
      problems_.push_back(key + ": " + e.what());
      return f(fallback);
    }
  }

  GLZParams model() {
    GLZParams p;
    p.pulse = parsed("pulse", "L", [](const std::string& s) { return parse_pulse_kind(s); });
    const auto sweep = parsed("sweep", "Lin", [](const std::string& s) { return parse_sweep_kind(s); });
    const int kind = static_cast<int>(real("error_kind", 0));
    p.error.kind = parsed("error_kind", "0", [&](const std::string&) { return parse_error_kind(kind); });
    p.error.epsilon = real("epsilon", 0.0);
    p.T = real("T", 10.0);
    if (sweep == SweepKind::Tan) p = with_tan_sweeps(p, real("c", 1.0));
    return p;
  }

  void check() const {
    if (!problems_.empty()) throw ConfigError(problems_);
  }

 private:
  ConfigMap m_;
  std::vector<std::string> problems_;
};

IntegratorConfig integrator(const cli::GlobalOptions& g) {
  IntegratorConfig c;
  if (g.rtol) c.rtol = *g.rtol;
  c.validate();
  return c;
}

EnsembleOptions ensemble_options(const cli::GlobalOptions& g) {
  EnsembleOptions o;
  o.integrator = integrator(g);
  o.serial = g.serial;
  return o;
}

std::string fmt(double x) { return cli::format_double(x); }

std::vector<std::string> fmt(const std::vector<double>& xs) {
  std::vector<std::string> out;
  for (double x : xs) out.push_back(fmt(x));
  return out;
}

void echo_model(ConfigMap& e, const GLZParams& m) {
  e["pulse"] = {std::string(1, pulse_code(m.pulse))};
  e["error_kind"] = {std::to_string(static_cast<int>(m.error.kind))};
  e["epsilon"] = {fmt(m.error.epsilon)};
  e["sweep"] = {std::string(sweep_name(m.sweep.kind))};
  e["c"] = {fmt(m.sweep.c)};
  e["T"] = {fmt(m.T)};
}

// Output of one direct subcommand: stdout, or the --out file plus a
// <out>.manifest.json next to it.
class Output {
 public:
  Output(const cli::GlobalOptions& g, std::string command) : g_(g), command_(std::move(command)) {}

  ConfigMap echo;

  // `#` header with the parameter echo, then the body
  template <class F>
  void csv(F&& body) {
    std::ostringstream os;
    os << "# version=" << kVersion << "\n# command=" << command_ << '\n';
    for (const auto& [k, vs] : echo)
      for (const auto& v : vs) os << "# " << k << '=' << v << '\n';
    body(os);
    finish(os.str());
  }

  template <class F>
  void raw(F&& body) {
    std::ostringstream os;
    body(os);
    finish(os.str());
  }

 private:
  void finish(const std::string& text) {
    if (!g_.out) {
      std::cout << text;
      return;
    }
    const std::filesystem::path path = *g_.out;
    {
      std::ofstream os(path, std::ios::binary);
      os << text;
      if (!os) throw ConfigError({"cannot write " + path.string()});
    }
    nlohmann::json j{{"version", kVersion},
                     {"command", command_},
                     {"status", "ok"},
                     {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count()},
                     {"files", {{{"path", path.filename().string()}, {"bytes", text.size()}, {"fnv1a64", cli::fnv1a64_hex(text)}}}}};
    if (g_.seed) j["seed"] = *g_.seed;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : echo) params[k] = v;
    j["params"] = params;
    std::ofstream(path.string() + ".manifest.json") << j.dump(2) << '\n';
  }

  const cli::GlobalOptions& g_;
  std::string command_;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterdiabatic control of Landau-Zener transitions with random gaps"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  cli::GlobalOptions g;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::string out, config_path;
  double rtol = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  auto* samples_opt = app.add_option("--samples", samples, "Monte-Carlo sample count");
  auto* out_opt = app.add_option("--out", out, "output file or directory");
  auto* rtol_opt = app.add_option("--rtol", rtol, "integrator relative tolerance");
  app.add_flag("--serial", g.serial, "single thread, reference summation order");
  app.add_option("--config", config_path, "flat key = value config file");

  Overrides sim, grid, cc, opt, dirac, avg;
  bool trajectory = false;

  auto* c_sim = app.add_subcommand("simulate", "propagate one parameter set");
  for (const char* k : {"a", "b", "phi", "pulse", "error_kind", "epsilon", "sweep", "c", "T"}) sim.add(c_sim, k, k);
  c_sim->add_flag("--trajectory", trajectory, "dump P(u) on the 1001-point grid as CSV");

  auto* c_sweep = app.add_subcommand("sweep", "P over a grid of (a, b, phi)");
  for (const char* k : {"a", "b", "phi", "pulse", "error_kind", "epsilon", "sweep", "c", "T"}) grid.add(c_sweep, k, k);

  auto* c_cc = app.add_subcommand("cc", "characteristic curve b0(a; phi)");
  for (const char* k : {"a", "phi", "pulse", "sweep", "c", "T"}) cc.add(c_cc, k, k);

  auto* c_opt = app.add_subcommand("optimize", "optimal coupling b* for a gap distribution");
  for (const char* k : {"mu", "sigma", "phi", "pulse", "error_kind", "epsilon", "sweep", "c", "T"}) opt.add(c_opt, k, k);

  auto* c_dirac = app.add_subcommand("dirac", "closed-form kick limit");
  for (const char* k : {"a", "phi", "mu", "sigma"}) dirac.add(c_dirac, k, k);

  auto* c_avg = app.add_subcommand("average", "ensemble average of P at fixed b");
  for (const char* k : {"mu", "sigma", "b", "phi", "pulse", "error_kind", "epsilon", "sweep", "c", "T"})
    avg.add(c_avg, k, k);

  std::string scenario_name;
  auto* c_scen = app.add_subcommand("scenario", "run one named scenario");
  c_scen->add_option("name", scenario_name, "scenario name")->required();
  auto* c_all = app.add_subcommand("all", "run every scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seed_opt) g.seed = seed;
    if (*samples_opt) g.samples = samples;
    if (*out_opt) g.out = out;
    if (*rtol_opt) g.rtol = rtol;
    ConfigMap config = config_path.empty() ? ConfigMap{} : cli::load_config(config_path);
    // config entries for the global options apply when the flag is absent
    auto cfg_last = [&](const char* k) -> const std::string* {
      auto it = config.find(k);
      return it == config.end() || it->second.empty() ? nullptr : &it->second.back();
    };
    if (!g.seed && cfg_last("seed")) g.seed = std::stoull(*cfg_last("seed"));
    if (!g.samples && cfg_last("samples")) g.samples = std::stoull(*cfg_last("samples"));
    if (!g.rtol && cfg_last("rtol")) g.rtol = std::stod(*cfg_last("rtol"));

    if (*c_sim) {
      Params p(merge(config, sim));
      GLZParams m = p.model();
      m = with_gap(with_control(m, p.real("b", 0.0)), p.real("a", 0.5));
      m.phi = p.real("phi", std::numbers::pi / 2);
      p.check();
      const auto rec = propagate(m, integrator(g), trajectory);
      Output out(g, "simulate");
      out.echo = {{"a", {fmt(m.a)}}, {"b", {fmt(m.b)}}, {"phi", {fmt(m.phi)}}};
      echo_model(out.echo, m);
      if (trajectory) {
        out.raw([&](std::ostream& os) { write_trajectory_csv(os, m, rec); });
      } else {
        nlohmann::json j{{"final_prob", rec.final_prob},   {"max_norm_error", rec.max_norm_error},
                         {"error_estimate", rec.error_estimate}, {"steps", rec.steps},
                         {"renormalizations", rec.renormalizations}};
        for (const auto& [k, v] : out.echo) j["params"][k] = v.front();
        out.raw([&](std::ostream& os) { os << j.dump(2) << '\n'; });
      }
    } else if (*c_sweep) {
      Params p(merge(config, grid));
      const GLZParams m = p.model();
      const auto as = p.axis("a", {0.5}), bs = p.axis("b", {0.0}), phis = p.axis("phi", {std::numbers::pi / 2});
      p.check();
      const auto cfgi = integrator(g);
      const std::size_t n = as.size() * bs.size() * phis.size();
      const auto P = parallel_map(
          n,
          [&](std::size_t i) {
            GLZParams q = with_gap(with_control(m, bs[(i / phis.size()) % bs.size()]), as[i / (phis.size() * bs.size())]);
            q.phi = phis[i % phis.size()];
            return transition_probability(q, cfgi);
          },
          ensemble_options(g));
      Output out(g, "sweep");
      out.echo = {{"a", fmt(as)}, {"b", fmt(bs)}, {"phi", fmt(phis)}};
      echo_model(out.echo, m);
      out.csv([&](std::ostream& os) {
        os << "a,b,phi,P\n";
        for (std::size_t i = 0; i < n; ++i)
          os << fmt(as[i / (phis.size() * bs.size())]) << ','
             << fmt(bs[(i / phis.size()) % bs.size()]) << ',' << fmt(phis[i % phis.size()]) << ',' << fmt(P[i])
             << '\n';
      });
    } else if (*c_cc) {
      Params p(merge(config, cc));
      const GLZParams m = p.model();
      std::vector<double> def_a;
      for (int i = 0; i < 20; ++i) def_a.push_back(0.05 + 0.1 * i);
      const auto as = p.axis("a", def_a);
      const double phi = p.real("phi", std::numbers::pi / 2);
      p.check();
      const auto cfgi = integrator(g);
      std::vector<CharacteristicPoint> curve(as.size());
      parallel_for(
          as.size(),
          [&](std::size_t i) {
            try {
              curve[i] = characteristic_b0(as[i], phi, m, cfgi);
            } catch (const NoRoot& e) {
              curve[i] = {as[i], std::numeric_limits<double>::quiet_NaN(), phi, e.p_min()};
            }
          },
          g.serial);
      Output out(g, "cc");
      out.echo = {{"a", fmt(as)}, {"phi", {fmt(phi)}}};
      echo_model(out.echo, m);
      out.raw([&](std::ostream& os) { write_cc_csv(os, curve, m); });
    } else if (*c_opt) {
      Params p(merge(config, opt));
      const GLZParams m = p.model();
      const GapDistribution dist{p.real("mu", 0.5), p.real("sigma", 0.1), g.seed.value_or(42)};
      const double phi = p.real("phi", std::numbers::pi / 2);
      p.check();
      const auto res = optimize_bstar(dist, phi, m, g.samples.value_or(1000), ensemble_options(g));
      auto j = nlohmann::json::parse(to_json(res.p_star, m));
      j["b_star"] = res.b_star;
      j["b0"] = res.b0;
      j["bracket"] = {res.lo, res.hi};
      j["fallback"] = res.fallback;
      j["b0_from_min"] = res.b0_from_min;
      j["evaluations"] = res.evaluations;
      Output out(g, "optimize");
      out.echo = {{"mu", {fmt(dist.mu)}}, {"sigma", {fmt(dist.sigma)}}, {"phi", {fmt(phi)}}};
      echo_model(out.echo, m);
      out.raw([&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else if (*c_dirac) {
      Params p(merge(config, dirac));
      const auto as = p.axis("a", {0.0, 0.5, 1.0, 1.5, 2.0});
      const auto phis = p.axis("phi", {0.0, std::numbers::pi / 4, std::numbers::pi / 2});
      const auto sigmas = p.axis("sigma", {});
      const double mu = p.real("mu", 0.0);
      p.check();
      Output out(g, "dirac");
      out.echo = {{"phi", fmt(phis)}};
      if (sigmas.empty()) {
        out.echo["a"] = fmt(as);
        out.csv([&](std::ostream& os) {
          os << "a,phi,chi,p_inf\n";
          for (double a : as)
            for (double phi : phis)
              os << fmt(a) << ',' << fmt(phi) << ',' << fmt(chi(a)) << ',' << fmt(p_infinity(a, phi)) << '\n';
        });
      } else {
        // Gaussian gap averages of the kick limit and of the bare LZ formula
        out.echo["mu"] = {fmt(mu)};
        out.echo["sigma"] = fmt(sigmas);
        out.csv([&](std::ostream& os) {
          os << "mu,sigma,phi,avg_p_inf,avg_plz\n";
          for (double s : sigmas)
            for (double phi : phis)
              os << fmt(mu) << ',' << fmt(s) << ',' << fmt(phi) << ',' << fmt(average_p_infinity(mu, s, phi)) << ','
                 << fmt(avg_plz(mu, s)) << '\n';
        });
      }
    } else if (*c_avg) {
      Params p(merge(config, avg));
      const GLZParams m = p.model();
      const GapDistribution dist{p.real("mu", 0.5), p.real("sigma", 0.1), g.seed.value_or(42)};
      const double b = p.real("b", 0.0), phi = p.real("phi", std::numbers::pi / 2);
      p.check();
      const auto r = average_probability(dist, b, phi, m, g.samples.value_or(1000), ensemble_options(g));
      Output out(g, "average");
      out.echo = {{"mu", {fmt(dist.mu)}}, {"sigma", {fmt(dist.sigma)}}, {"b", {fmt(b)}}, {"phi", {fmt(phi)}}};
      echo_model(out.echo, m);
      out.raw([&](std::ostream& os) { os << to_json(r, m) << '\n'; });
    } else if (*c_scen) {
      const auto s = cli::make_scenario(scenario_name, config, g);
      const auto rep = cli::run_scenario(s);
      for (const auto& f : rep.files) std::printf("%s  %s\n", f.fnv1a64.c_str(), f.path.c_str());
      if (!rep.ok) {
        std::fprintf(stderr, "scenario %s failed: %s\n", rep.name.c_str(), rep.error.c_str());
        return 1;
      }
    } else if (*c_all) {
      const auto rep = cli::run_all(g.seed.value_or(7), config, g);
      for (const auto& r : rep.scenarios)
        std::printf("%-15s %s %.1fs%s%s\n", r.name.c_str(), r.ok ? "ok    " : "FAILED", r.seconds,
                    r.ok ? "" : "  ", r.error.c_str());
      std::printf("manifest: %s\n", rep.manifest.string().c_str());
      return rep.ok() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
