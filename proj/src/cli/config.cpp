#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>

#include "lzcd/cli.hpp"
#include "lzcd/error.hpp"

namespace lzcd::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

constexpr double kPi = std::numbers::pi;

// keys that describe the file rather than the scenario
const std::set<std::string, std::less<>> kMetaKeys = {"scenario", "version", "panel"};

const std::set<std::string, std::less<>> kKnownKeys = {
    "a",     "b",      "mu",   "sigma", "sigma_ratio", "phi",  "epsilon", "T",     "pulse",
    "error_kind", "sweep", "c", "samples", "seed",   "rtol", "optimize", "serial", "out"};

const std::vector<std::string> kNames = {"surface",   "cc",      "timedep", "dirac",  "pstar-vs-sigma", "pstar-vs-mu",
                                         "area",      "heatmap", "pulses",  "sweeps", "identities"};

const std::map<std::string, std::vector<std::string>, std::less<>> kKeys = {
    {"surface", {"a", "b", "phi", "pulse", "sweep", "c", "T", "seed", "rtol"}},
    {"cc", {"a", "phi", "pulse", "sweep", "c", "T", "seed", "rtol"}},
    {"timedep", {"a", "b", "phi", "pulse", "sweep", "c", "T", "seed", "rtol"}},
    {"dirac", {"a", "sigma", "phi", "seed", "rtol"}},
    {"pstar-vs-sigma", {"mu", "sigma", "phi", "pulse", "sweep", "c", "T", "samples", "optimize", "seed", "rtol"}},
    {"pstar-vs-mu", {"mu", "sigma_ratio", "phi", "pulse", "sweep", "c", "T", "samples", "optimize", "seed", "rtol"}},
    {"area", {"mu", "sigma_ratio", "phi", "pulse", "sweep", "c", "T", "samples", "seed", "rtol"}},
    {"heatmap", {"mu", "sigma", "epsilon", "error_kind", "phi", "T", "samples", "optimize", "seed", "rtol"}},
    {"pulses", {"mu", "sigma_ratio", "phi", "pulse", "T", "samples", "optimize", "seed", "rtol"}},
    {"sweeps", {"mu", "sigma_ratio", "phi", "sweep", "T", "samples", "optimize", "seed", "rtol"}},
    {"identities", {"b", "phi", "samples", "seed", "rtol"}},
};

bool uses(const Scenario& s, std::string_view key) {
  const auto& k = scenario_keys(s.name);
  return std::find(k.begin(), k.end(), key) != k.end();
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  double real(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      problems_.push_back(key + ": '" + text + "' is not a finite number");
      return 0.0;
    }
    return v;
  }

  std::uint64_t integer(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      problems_.push_back(key + ": '" + text + "' is not a non-negative integer");
      return 0;
    }
    return v;
  }

  double angle(const std::string& key, const std::string& text) {
    try {
      return parse_angle(text);
    } catch (const Error&) {
      problems_.push_back(key + ": '" + text + "' is not an angle");
      return 0.0;
    }
  }

  bool flag(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    problems_.push_back(key + ": '" + text + "' is not a boolean");
    return false;
  }

  template <class T, class F>
  std::vector<T> axis(const std::string& key, const std::vector<std::string>& raw, F&& one) {
    std::vector<T> out;
    out.reserve(raw.size());
    for (const auto& r : raw) out.push_back(one(key, r));
    return out;
  }

  template <class F>
  auto guarded(const std::string& key, const std::string& text, F&& parse) -> decltype(parse(text)) {
    try {
      return parse(text);
    } catch (const Error& e) {
      problems_.push_back(key + ": " + e.what());
      return {};
    }
  }

 private:
  std::vector<std::string>& problems_;
};

void apply(Scenario& s, const std::string& key, const std::vector<std::string>& raw, Reader& rd,
           std::vector<std::string>& problems) {
  auto reals = [&] { return rd.axis<double>(key, raw, [&](auto& k, auto& t) { return rd.real(k, t); }); };
  auto last = [&]() -> const std::string& { return raw.back(); };
  if (raw.empty()) {
    problems.push_back(key + ": no value");
    return;
  }
  if (key == "a") s.a = reals();
  else if (key == "b") s.b = reals();
  else if (key == "mu") s.mu = reals();
  else if (key == "sigma") s.sigma = reals();
  else if (key == "sigma_ratio") s.sigma_ratio = reals();
  else if (key == "epsilon") s.epsilon = reals();
  else if (key == "T") s.T = reals();
  else if (key == "phi") s.phi = rd.axis<double>(key, raw, [&](auto& k, auto& t) { return rd.angle(k, t); });
  else if (key == "pulse")
    s.pulse = rd.axis<PulseKind>(key, raw, [&](auto& k, auto& t) {
      return rd.guarded(k, t, [](const std::string& x) { return parse_pulse_kind(x); });
    });
  else if (key == "sweep")
    s.sweep = rd.axis<SweepKind>(key, raw, [&](auto& k, auto& t) {
      return rd.guarded(k, t, [](const std::string& x) { return parse_sweep_kind(x); });
    });
  else if (key == "error_kind")
    s.error_kind = rd.axis<ErrorKind>(key, raw, [&](auto& k, auto& t) {
      const auto code = rd.integer(k, t);
      return rd.guarded(k, t, [&](const std::string&) { return parse_error_kind(static_cast<int>(code)); });
    });
  else if (key == "c") s.c = rd.real(key, last());
  else if (key == "samples") s.samples = static_cast<std::size_t>(rd.integer(key, last()));
  else if (key == "seed") s.seed = rd.integer(key, last());
  else if (key == "rtol") s.rtol = rd.real(key, last());
  else if (key == "optimize") s.optimize = rd.flag(key, last());
  else if (key == "serial") s.serial = rd.flag(key, last());
  else if (key == "out") s.out = last();
}

template <class T>
std::vector<std::string> texts(const std::vector<T>& v, auto&& f) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(f(x));
  return out;
}

}  // namespace

double parse_angle(std::string_view text) {
  text = trim(text);
  const auto pos = text.find("pi");
  if (pos == std::string_view::npos) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
      throw InvalidArgument("not an angle: " + std::string(text));
    return v;
  }
  // [coef[*]]pi[/den]
  std::string_view coef = trim(text.substr(0, pos));
  std::string_view rest = trim(text.substr(pos + 2));
  double k = 1.0;
  if (!coef.empty() && coef.back() == '*') coef = trim(coef.substr(0, coef.size() - 1));
  if (coef == "-") {
    k = -1.0;
  } else if (!coef.empty() && coef != "+") {
    auto [ptr, ec] = std::from_chars(coef.data(), coef.data() + coef.size(), k);
    if (ec != std::errc() || ptr != coef.data() + coef.size()) throw InvalidArgument("not an angle: " + std::string(text));
  }
  double den = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw InvalidArgument("not an angle: " + std::string(text));
    rest = trim(rest.substr(1));
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), den);
    if (ec != std::errc() || ptr != rest.data() + rest.size() || den == 0.0)
      throw InvalidArgument("not an angle: " + std::string(text));
  }
  return k * kPi / den;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::vector<std::string> problems;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key(trim(v.substr(0, eq)));
    const std::string value(trim(v.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (!kKnownKeys.contains(key) && !kMetaKeys.contains(key)) {
      problems.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    out[key].push_back(value);
  }
  if (!problems.empty()) throw ConfigError(problems);
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  return parse_config(in);
}

const std::vector<std::string>& scenario_names() { return kNames; }

const std::vector<std::string>& scenario_keys(std::string_view name) {
  const auto it = kKeys.find(name);
  if (it == kKeys.end()) throw ConfigError({"unknown scenario '" + std::string(name) + "'"});
  return it->second;
}

Scenario default_scenario(std::string_view name) {
  (void)scenario_keys(name);
  Scenario s;
  s.name = std::string(name);
  // neutral defaults for axes a scenario does not use
  s.a = {0.5};
  s.b = {2.0};
  s.mu = {0.5};
  s.sigma = {0.1};
  s.sigma_ratio = {0.2};
  s.phi = {0.0, kPi / 2};
  s.epsilon = {0.0};
  s.T = {10.0};
  s.pulse = {PulseKind::Lorentzian};
  s.error_kind = {ErrorKind::None};
  s.sweep = {SweepKind::Lin};

  if (name == "surface") {
    s.a = linspace(0.0, 3.0, 31);
    s.b = linspace(0.0, 8.0, 33);
  } else if (name == "cc") {
    s.a = linspace(0.05, 1.95, 20);
  } else if (name == "timedep") {
    s.a = {0.5};
    s.b = {0.0, 1.0, 2.0, 4.0};
  } else if (name == "dirac") {
    s.a = linspace(0.0, 3.0, 121);
    s.sigma = linspace(0.05, 3.0, 60);
    s.phi = {0.0, kPi / 4, kPi / 2};
  } else if (name == "pstar-vs-sigma") {
    s.mu = {0.5, 1.0};
    s.sigma = {0.02, 0.05, 0.1, 0.15, 0.2};
  } else if (name == "pstar-vs-mu") {
    s.mu = linspace(0.2, 1.8, 9);
  } else if (name == "area") {
    s.mu = linspace(0.2, 1.8, 9);
    s.samples = 300;
  } else if (name == "heatmap") {
    s.sigma = {0.02, 0.04, 0.06, 0.08, 0.1};
    s.epsilon = {-0.2, -0.1, 0.0, 0.1, 0.2};
    s.error_kind = {ErrorKind::ScaleBoth, ErrorKind::FixPeak, ErrorKind::FixArea};
    s.samples = 300;
  } else if (name == "pulses") {
    s.mu = linspace(0.2, 1.8, 9);
    s.pulse = {PulseKind::Lorentzian, PulseKind::Gaussian, PulseKind::Sinc, PulseKind::Rect, PulseKind::Triangle};
    s.samples = 300;
  } else if (name == "sweeps") {
    s.T = {2.5, 5.0, 10.0, 20.0};
    s.sweep = {SweepKind::Lin, SweepKind::Tan};
    s.samples = 300;
  } else if (name == "identities") {
    s.b = {0.5, 2.0, 8.0};
    s.phi = {0.0, kPi / 4, kPi / 2};
    s.samples = 20;
  }
  return s;
}

Scenario make_scenario(std::string_view name, const ConfigMap& config, const GlobalOptions& flags) {
  Scenario s = default_scenario(name);
  std::vector<std::string> problems;
  Reader rd(problems);
  for (const auto& [key, raw] : config) {
    if (kMetaKeys.contains(key)) continue;
    if (!kKnownKeys.contains(key)) {
      problems.push_back("unknown key '" + key + "'");
      continue;
    }
    apply(s, key, raw, rd, problems);
  }
  if (flags.seed) s.seed = *flags.seed;
  if (flags.samples) s.samples = *flags.samples;
  if (flags.rtol) s.rtol = *flags.rtol;
  if (flags.out) s.out = *flags.out;
  if (flags.serial) s.serial = true;
  if (!problems.empty()) throw ConfigError(problems);
  validate(s);
  return s;
}

void validate(const Scenario& s) {
  std::vector<std::string> p;
  const auto& keys = scenario_keys(s.name);
  auto used = [&](std::string_view k) { return std::find(keys.begin(), keys.end(), k) != keys.end(); };
  auto check_axis = [&](std::string_view key, std::size_t size) {
    if (used(key) && size == 0) p.push_back(std::string(key) + ": grid axis is empty");
  };
  check_axis("a", s.a.size());
  check_axis("b", s.b.size());
  check_axis("mu", s.mu.size());
  check_axis("sigma", s.sigma.size());
  check_axis("sigma_ratio", s.sigma_ratio.size());
  check_axis("phi", s.phi.size());
  check_axis("epsilon", s.epsilon.size());
  check_axis("T", s.T.size());
  check_axis("pulse", s.pulse.size());
  check_axis("error_kind", s.error_kind.size());
  check_axis("sweep", s.sweep.size());

  auto all = [](const std::vector<double>& v, auto pred) { return std::all_of(v.begin(), v.end(), pred); };
  if (used("b") && !all(s.b, [](double x) { return x >= 0.0; })) p.push_back("b: couplings must be >= 0");
  if (used("T") && !all(s.T, [](double x) { return x > 0.0; })) p.push_back("T: protocol times must be > 0");
  if (used("sigma") && !all(s.sigma, [](double x) { return x >= 0.0; })) p.push_back("sigma: must be >= 0");
  if (used("sigma_ratio") && !all(s.sigma_ratio, [](double x) { return x >= 0.0; }))
    p.push_back("sigma_ratio: must be >= 0");
  if (used("epsilon") && !all(s.epsilon, [](double x) { return x > -1.0 && x < 1.0; }))
    p.push_back("epsilon: must lie in (-1, 1)");
  if (used("c") && !(s.c > 0.0)) p.push_back("c: Tan sweep shape parameter must be > 0");
  if (!(s.rtol >= 1e-13)) p.push_back("rtol: must be >= 1e-13");
  if (s.samples < 1) p.push_back("samples: must be >= 1");
  if (used("optimize") && s.optimize && s.samples < 100) p.push_back("samples: optimize needs at least 100");

  // b0(mu) is only searched on the trusted range 0 < mu < 2
  if (used("mu") && s.name != "dirac" && !all(s.mu, [](double x) { return x > 0.0 && x < 2.0; }))
    p.push_back("mu: must lie in (0, 2)");
  if (s.name == "cc" && !all(s.a, [](double x) { return x > 0.0 && x < 2.0; })) p.push_back("a: must lie in (0, 2)");
  if (s.name == "timedep" && !all(s.a, [](double x) { return x > 0.0 && x < 2.0; }))
    p.push_back("a: must lie in (0, 2) (the b0 trajectory needs it)");
  if (s.name == "heatmap") {
    const bool perturbs_time = std::any_of(s.error_kind.begin(), s.error_kind.end(), [](ErrorKind k) {
      return k == ErrorKind::FixPeak || k == ErrorKind::FixArea;
    });
    if (perturbs_time && !std::all_of(s.pulse.begin(), s.pulse.end(), [](PulseKind k) { return k == PulseKind::Lorentzian; }))
      p.push_back("error_kind: kinds 2 and 3 are defined for the Lorentzian pulse only");
  }
  if (!p.empty()) throw ConfigError(p);
}

ConfigMap echo(const Scenario& s) {
  ConfigMap m;
  auto put = [&](const std::string& key, std::vector<std::string> v) {
    if (uses(s, key)) m[key] = std::move(v);
  };
  auto reals = [](const std::vector<double>& v) { return texts(v, [](double x) { return format_double(x); }); };
  put("a", reals(s.a));
  put("b", reals(s.b));
  put("mu", reals(s.mu));
  put("sigma", reals(s.sigma));
  put("sigma_ratio", reals(s.sigma_ratio));
  put("phi", reals(s.phi));
  put("epsilon", reals(s.epsilon));
  put("T", reals(s.T));
  put("pulse", texts(s.pulse, [](PulseKind k) { return std::string(1, pulse_code(k)); }));
  put("error_kind", texts(s.error_kind, [](ErrorKind k) { return std::to_string(static_cast<int>(k)); }));
  put("sweep", texts(s.sweep, [](SweepKind k) { return std::string(sweep_name(k)); }));
  put("c", {format_double(s.c)});
  put("samples", {std::to_string(s.samples)});
  put("optimize", {s.optimize ? "1" : "0"});
  put("seed", {std::to_string(s.seed)});
  put("rtol", {format_double(s.rtol)});
  return m;
}

bool same_fragment(const Scenario& x, const Scenario& y) { return x.name == y.name && echo(x) == echo(y); }

ConfigMap read_csv_header(std::istream& in) {
  ConfigMap m;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    std::string_view v = trim(std::string_view(line).substr(1));
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) continue;
    m[std::string(trim(v.substr(0, eq)))].push_back(std::string(trim(v.substr(eq + 1))));
  }
  return m;
}

Scenario scenario_from_header(const ConfigMap& header) {
  const auto it = header.find("scenario");
  if (it == header.end() || it->second.empty()) throw ConfigError({"header has no scenario line"});
  return make_scenario(it->second.front(), header, {});
}

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace lzcd::cli
