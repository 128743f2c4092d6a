#pragma once

// Random gaps: sampling, ensemble averages of the transition probability,
// the characteristic curve b0(a; phi) and the optimal coupling b*.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lzcd/models.hpp"
#include "lzcd/propagate.hpp"

namespace lzcd {

/// Normal(mu, sigma^2) gap distribution with its sampling seed.
struct GapDistribution {
  double mu = 0.5;
  double sigma = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
  /// Operating envelope sigma <= mu/5 (negative gaps then have probability < 1e-7).
  bool in_envelope() const { return mu > 0.0 && sigma <= mu / 5.0; }
};

/// Gap received by sample `index`. Depends only on (mu, sigma, seed, index).
double sample_gap(const GapDistribution& dist, std::uint64_t index);
std::vector<double> sample_gaps(const GapDistribution& dist, std::size_t n);

struct EnsembleResult {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  GapDistribution dist{};
  double b = 0.0;
  double phi = 0.0;
  std::size_t nonpositive_gaps = 0;
  bool in_envelope = true;
  std::vector<double> samples{};  // per-sample values, when requested
};

enum class B0Policy { AtConfiguredT, TAveraged };

struct EnsembleOptions {
  IntegratorConfig integrator{};
  bool serial = false;    // single thread, reference summation order
  unsigned threads = 0;   // 0: hardware concurrency
  bool keep_samples = false;
  B0Policy b0_policy = B0Policy::AtConfiguredT;
  std::vector<double> t_average_grid{};  // protocol times for B0Policy::TAveraged
};

/// Calls f(i) for i in [0, n), on a thread pool unless `serial`. The first
/// exception (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f, bool serial, unsigned threads = 0);

/// Results land at their index, so the outcome never depends on scheduling.
template <class F>
auto parallel_map(std::size_t n, F&& f, const EnsembleOptions& opts) {
  std::vector<decltype(f(std::size_t{}))> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(i); }, opts.serial, opts.threads);
  return out;
}

/// Mean of transition_probability over sampled gaps at fixed (b, phi) and the
/// remaining fields of `model`.
EnsembleResult average_probability(const GapDistribution& dist, double b, double phi,
                                   const GLZParams& model, std::size_t n = 1000,
                                   const EnsembleOptions& opts = {});

/// Same average over an explicit gap list (common random numbers).
EnsembleResult average_probability(std::span<const double> gaps, double b, double phi,
                                   const GLZParams& model, const EnsembleOptions& opts = {});

inline constexpr double kRootTolerance = 1e-6;

struct CharacteristicPoint {
  double a = 0.0;
  double b0 = 0.0;
  double phi = 0.0;
  double residual = 0.0;  // P at b0
};

/// Smallest b > 0 with P(a, b; phi) <= 1e-6: a log-spaced scan of
/// [1/(10a), 50/a] locates the dips, each is refined by Brent minimization
/// and the first one reaching the tolerance wins. Requires 0 < a < 2.
/// Throws NoRoot carrying the deepest refined dip otherwise.
CharacteristicPoint characteristic_b0(double a, double phi, const GLZParams& model,
                                      const IntegratorConfig& cfg = {});

/// Mean of b0 over the protocol times `Ts` (lambda0 fixed).
double characteristic_b0_t_averaged(double a, double phi, const GLZParams& model,
                                    std::span<const double> Ts, const IntegratorConfig& cfg = {});

struct BStarResult {
  double b_star = 0.0;
  EnsembleResult p_star{};
  double b0 = 0.0;       // centre of the search bracket
  double lo = 0.0;       // bracket [b0/2, 2 b0]
  double hi = 0.0;
  bool fallback = false;  // minimizer hit the bracket edge; b_star = b0
  bool b0_from_min = false;  // no root at mu: bracket centred on the deepest dip
  std::size_t evaluations = 0;
};

/// Golden-section search of b -> <P(a, b)> on [b0/2, 2 b0] to relative
/// tolerance 1e-3. One gap sample is drawn and reused for every evaluation.
BStarResult optimize_bstar(const GapDistribution& dist, double phi, const GLZParams& model,
                           std::size_t n = 1000, const EnsembleOptions& opts = {});

/// Ensemble mean of adiabaticity_area at the fixed coupling b0(mu).
EnsembleResult average_area(const GapDistribution& dist, double phi, const GLZParams& model,
                            std::size_t n = 1000, const EnsembleOptions& opts = {});

/// b0(mu) under the policy in `opts`.
double control_b0(double mu, double phi, const GLZParams& model, const EnsembleOptions& opts);

std::string to_json(const EnsembleResult& r, const GLZParams& model);

/// Characteristic curve as CSV with `#` parameter echo; columns a,b0,residual.
void write_cc_csv(std::ostream& os, std::span<const CharacteristicPoint> curve, const GLZParams& model);

}  // namespace lzcd
