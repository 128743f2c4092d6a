#include "lzcd/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lzcd/error.hpp"
#include "lzcd/version.hpp"

namespace lzcd {

namespace {

constexpr double kPi = std::numbers::pi;

// splitmix64 finalizer; used as a counter-based generator keyed by the seed
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// 53 random bits in (0, 1]
double unit_open_low(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53; }

double standard_normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t key = mix64(seed + kGolden);
  const double u1 = unit_open_low(mix64(key + kGolden * (2 * index + 1)));
  const double u2 = unit_open_low(mix64(key + kGolden * (2 * index + 2)));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

GLZParams member(const GLZParams& model, double a, double b, double phi) {
  GLZParams p = with_gap(with_control(model, b), a);
  p.phi = phi;
  return p;
}

std::string describe(const GLZParams& p) {
  std::ostringstream os;
  os << std::setprecision(17) << "a=" << p.a << " b=" << p.b << " phi=" << p.phi << " pulse=" << pulse_code(p.pulse)
     << " sweep=" << sweep_name(p.sweep.kind) << " T=" << p.T;
  return os.str();
}

EnsembleResult summarize(std::span<const double> gaps, std::vector<double> values, const EnsembleOptions& opts) {
  EnsembleResult r;
  const std::size_t n = values.size();
  r.n_samples = n;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  r.nonpositive_gaps = static_cast<std::size_t>(std::count_if(gaps.begin(), gaps.end(), [](double a) { return a <= 0.0; }));
  if (opts.keep_samples) r.samples = std::move(values);
  return r;
}

// P(b) for a fixed gap, in the form used by the scans
struct Probe {
  const GLZParams& model;
  double a;
  double phi;
  const IntegratorConfig& cfg;

  double operator()(double b) const {
    return transition_probability(member(model, a, b, phi), cfg);
  }
};

constexpr std::size_t kScanPoints = 96;

}  // namespace

void GapDistribution::validate() const {
  std::vector<std::string> problems;
  if (!std::isfinite(mu)) problems.emplace_back("mu must be finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) problems.emplace_back("sigma must be finite and >= 0");
  if (!problems.empty()) throw InvalidArgument("GapDistribution: " + problems.front());
}

double sample_gap(const GapDistribution& dist, std::uint64_t index) {
  if (dist.sigma == 0.0) return dist.mu;
  return dist.mu + dist.sigma * standard_normal(dist.seed, index);
}

std::vector<double> sample_gaps(const GapDistribution& dist, std::size_t n) {
  dist.validate();
  if (n < 1) throw InvalidArgument("sample_gaps: n must be >= 1");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sample_gap(dist, i);
  return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f, bool serial, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (serial) threads = 1;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex fail_mutex;
  std::size_t fail_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(fail_mutex);
        // report the lowest failing index, as the serial loop would
        if (i < fail_index) {
          fail_index = i;
          failure = std::current_exception();
        }
        next.store(n);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

EnsembleResult average_probability(std::span<const double> gaps, double b, double phi, const GLZParams& model,
                                   const EnsembleOptions& opts) {
  if (gaps.empty()) throw InvalidArgument("average_probability: empty gap sample");
  auto values = parallel_map(
      gaps.size(),
      [&](std::size_t i) {
        const GLZParams p = member(model, gaps[i], b, phi);
        try {
          return transition_probability(p, opts.integrator);
        } catch (const Error& e) {
          throw Error("sample " + std::to_string(i) + " (" + describe(p) + "): " + e.what());
        }
      },
      opts);
  EnsembleResult r = summarize(gaps, std::move(values), opts);
  r.b = b;
  r.phi = phi;
  return r;
}

EnsembleResult average_probability(const GapDistribution& dist, double b, double phi, const GLZParams& model,
                                   std::size_t n, const EnsembleOptions& opts) {
  const auto gaps = sample_gaps(dist, n);
  EnsembleResult r = average_probability(gaps, b, phi, model, opts);
  r.seed = dist.seed;
  r.dist = dist;
  r.in_envelope = dist.in_envelope();
  return r;
}

CharacteristicPoint characteristic_b0(double a, double phi, const GLZParams& model, const IntegratorConfig& cfg) {
  if (!(a > 0.0 && a < 2.0)) throw InvalidArgument("characteristic_b0: gap must satisfy 0 < a < 2");
  Probe probe{model, a, phi, cfg};
  const double lo = 0.1 / a;
  const double hi = 50.0 / a;
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(kScanPoints - 1));

  std::vector<double> bs(kScanPoints), ps(kScanPoints);
  for (std::size_t i = 0; i < kScanPoints; ++i) {
    bs[i] = i + 1 == kScanPoints ? hi : lo * std::pow(ratio, static_cast<double>(i));
    ps[i] = probe(bs[i]);
  }

  double best_b = bs[0], best_p = ps[0];
  for (std::size_t i = 0; i < kScanPoints; ++i) {
    const bool left = i == 0 || ps[i] <= ps[i - 1];
    const bool right = i + 1 == kScanPoints || ps[i] <= ps[i + 1];
    if (!(left && right)) continue;
    double bmin = bs[i], pmin = ps[i];
    if (i > 0 && i + 1 < kScanPoints) {
      const auto [x, fx] = boost::math::tools::brent_find_minima(probe, bs[i - 1], bs[i + 1],
                                                                 std::numeric_limits<double>::digits / 2);
      if (fx <= pmin) {
        bmin = x;
        pmin = fx;
      }
    }
    if (pmin < best_p) {
      best_b = bmin;
      best_p = pmin;
    }
    if (pmin <= kRootTolerance) return {a, bmin, phi, pmin};
  }
  std::ostringstream msg;
  msg << "characteristic_b0: no b in [" << lo << ", " << hi << "] with P <= " << kRootTolerance << " (a=" << a
      << ", phi=" << phi << "); deepest dip P=" << best_p << " at b=" << best_b;
  throw NoRoot(msg.str(), best_b, best_p);
}

double characteristic_b0_t_averaged(double a, double phi, const GLZParams& model, std::span<const double> Ts,
                                    const IntegratorConfig& cfg) {
  if (Ts.empty()) throw InvalidArgument("characteristic_b0_t_averaged: empty T grid");
  double sum = 0.0;
  for (double T : Ts) {
    GLZParams m = model;
    m.T = T;
    sum += characteristic_b0(a, phi, m, cfg).b0;
  }
  return sum / static_cast<double>(Ts.size());
}

double control_b0(double mu, double phi, const GLZParams& model, const EnsembleOptions& opts) {
  if (opts.b0_policy == B0Policy::TAveraged)
    return characteristic_b0_t_averaged(mu, phi, model, opts.t_average_grid, opts.integrator);
  return characteristic_b0(mu, phi, model, opts.integrator).b0;
}

BStarResult optimize_bstar(const GapDistribution& dist, double phi, const GLZParams& model, std::size_t n,
                           const EnsembleOptions& opts) {
  dist.validate();
  if (!(dist.mu > 0.0)) throw InvalidArgument("optimize_bstar: mu must be positive");
  if (n < 100) throw InvalidArgument("optimize_bstar: n must be >= 100");

  BStarResult out;
  try {
    out.b0 = control_b0(dist.mu, phi, model, opts);
  } catch (const NoRoot& e) {
    out.b0 = e.b_min();
    out.b0_from_min = true;
  }
  out.lo = 0.5 * out.b0;
  out.hi = 2.0 * out.b0;

  const auto gaps = sample_gaps(dist, n);
  auto objective = [&](double b) {
    ++out.evaluations;
    return average_probability(gaps, b, phi, model, opts);
  };

  constexpr double inv_phi = 0.6180339887498949;  // 1/golden ratio
  constexpr double rel_tol = 1e-3;
  double lo = out.lo, hi = out.hi;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  EnsembleResult f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > rel_tol * 0.5 * (hi + lo)) {
    if (f1.mean <= f2.mean) {
      hi = x2;
      x2 = x1;
      f2 = std::move(f1);
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = std::move(f2);
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  double b = f1.mean <= f2.mean ? x1 : x2;
  EnsembleResult best = f1.mean <= f2.mean ? std::move(f1) : std::move(f2);

  const double edge = rel_tol * out.b0;
  if (b - out.lo <= edge || out.hi - b <= edge) {
    out.fallback = true;
    b = out.b0;
    best = objective(b);
  }
  out.b_star = b;
  best.seed = dist.seed;
  best.dist = dist;
  best.in_envelope = dist.in_envelope();
  out.p_star = std::move(best);
  return out;
}

EnsembleResult average_area(const GapDistribution& dist, double phi, const GLZParams& model, std::size_t n,
                            const EnsembleOptions& opts) {
  dist.validate();
  const double b = control_b0(dist.mu, phi, model, opts);
  const auto gaps = sample_gaps(dist, n);
  auto values = parallel_map(
      n,
      [&](std::size_t i) {
        const GLZParams p = member(model, gaps[i], b, phi);
        try {
          return adiabaticity_area(p, opts.integrator);
        } catch (const Error& e) {
          throw Error("sample " + std::to_string(i) + " (" + describe(p) + "): " + e.what());
        }
      },
      opts);
  EnsembleResult r = summarize(gaps, std::move(values), opts);
  r.seed = dist.seed;
  r.dist = dist;
  r.b = b;
  r.phi = phi;
  r.in_envelope = dist.in_envelope();
  return r;
}

std::string to_json(const EnsembleResult& r, const GLZParams& model) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["seed"] = r.seed;
  j["n_samples"] = r.n_samples;
  j["mean"] = r.mean;
  j["std_error"] = r.std_error;
  j["nonpositive_gaps"] = r.nonpositive_gaps;
  j["in_envelope"] = r.in_envelope;
  j["distribution"] = {{"mu", r.dist.mu}, {"sigma", r.dist.sigma}};
  j["params"] = {{"b", r.b},
                 {"phi", r.phi},
                 {"pulse", std::string(1, pulse_code(model.pulse))},
                 {"error_kind", static_cast<int>(model.error.kind)},
                 {"epsilon", model.error.epsilon},
                 {"sweep", std::string(sweep_name(model.sweep.kind))},
                 {"lambda0", model.sweep.lambda0},
                 {"c", model.sweep.c},
                 {"T", model.T}};
  if (!r.samples.empty()) j["samples"] = r.samples;
  return j.dump(2);
}

void write_cc_csv(std::ostream& os, std::span<const CharacteristicPoint> curve, const GLZParams& model) {
  os << std::setprecision(17);
  os << "# version=" << kVersion << "\n# table=characteristic_curve\n";
  os << "# pulse=" << pulse_code(model.pulse) << "\n# sweep=" << sweep_name(model.sweep.kind)
     << "\n# lambda0=" << model.sweep.lambda0 << "\n# c=" << model.sweep.c << "\n# T=" << model.T
     << "\n# root_tolerance=" << kRootTolerance << '\n';
  if (!curve.empty()) os << "# phi=" << curve.front().phi << '\n';
  os << "a,b0,residual\n";
  for (const auto& p : curve) os << p.a << ',' << p.b0 << ',' << p.residual << '\n';
}

}  // namespace lzcd
