#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "lzcd/ensemble.hpp"
#include "lzcd/error.hpp"
#include "lzcd/specfun.hpp"

using namespace lzcd;
using std::numbers::pi;

TEST_CASE("gap sampling") {
  SUBCASE("zero width") {
    for (double a : sample_gaps({0.7, 0.0, 3}, 50)) CHECK(a == 0.7);
  }
  SUBCASE("moments") {
    GapDistribution d{0.5, 0.1, 42};
    auto g = sample_gaps(d, 100000);
    double mean = 0.0;
    for (double a : g) mean += a;
    mean /= g.size();
    CHECK(std::abs(mean - 0.5) < 3 * 0.1 / std::sqrt(1e5));
    double var = 0.0;
    for (double a : g) var += (a - mean) * (a - mean);
    var /= g.size() - 1;
    CHECK(std::sqrt(var) == doctest::Approx(0.1).epsilon(0.01));
    // one-sigma mass
    auto inside = std::count_if(g.begin(), g.end(), [](double a) { return std::abs(a - 0.5) < 0.1; });
    CHECK(double(inside) / g.size() == doctest::Approx(0.682689).epsilon(0.01));
  }
  SUBCASE("determinism") {
    GapDistribution d{0.5, 0.1, 42};
    CHECK(sample_gaps(d, 1000) == sample_gaps(d, 1000));
    auto g = sample_gaps(d, 1000);
    for (std::size_t i : {0ul, 17ul, 999ul}) CHECK(sample_gap(d, i) == g[i]);
    d.seed = 43;
    CHECK(sample_gaps(d, 10) != std::vector<double>(g.begin(), g.begin() + 10));
  }
  CHECK_THROWS_AS(sample_gaps({0.5, -0.1, 1}, 10), InvalidArgument);
  CHECK_THROWS_AS(sample_gaps({0.5, 0.1, 1}, 0), InvalidArgument);
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, false, 4);
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

  std::atomic<int> ran{0};
  try {
    parallel_for(200, [&](std::size_t i) {
      ++ran;
      if (i == 50 || i == 150) throw std::runtime_error("bad " + std::to_string(i));
    }, false, 3);
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "bad 50");
  }
}

TEST_CASE("average_probability") {
  GLZParams model;
  SUBCASE("no control reproduces the averaged LZ formula") {
    for (auto [mu, s] : {std::pair{0.5, 0.1}, {1.0, 0.2}}) {
      auto r = average_probability({mu, s, 42}, 0.0, 0.0, model, 10000);
      CHECK(r.n_samples == 10000);
      CHECK(std::abs(r.mean - avg_plz(mu, s)) < 3 * r.std_error);
      CHECK(r.nonpositive_gaps == 0);
      CHECK(r.in_envelope);
    }
  }
  SUBCASE("single gap with its CD pulse") {
    auto r = average_probability({0.5, 0.0, 1}, 2.0, pi / 2, model, 10);
    CHECK(r.mean <= 1e-4);
    CHECK(r.std_error == 0.0);
  }
  SUBCASE("serial and parallel agree bitwise") {
    GapDistribution d{0.6, 0.12, 9};
    EnsembleOptions serial;
    serial.serial = true;
    serial.keep_samples = true;
    EnsembleOptions par;
    par.threads = 4;
    par.keep_samples = true;
    auto x = average_probability(d, 1.4, 0.3, model, 64, serial);
    auto y = average_probability(d, 1.4, 0.3, model, 64, par);
    CHECK(x.mean == y.mean);
    CHECK(x.std_error == y.std_error);
    CHECK(x.samples == y.samples);
    CHECK(average_probability(d, 1.4, 0.3, model, 64, serial).mean == x.mean);
  }
  SUBCASE("explicit gap list") {
    std::vector<double> gaps{0.3, 0.5, 0.9};
    auto r = average_probability(gaps, 0.0, 0.0, model);
    double want = 0.0;
    GLZParams p;
    for (double a : gaps) {
      p.a = a;
      want += transition_probability(p);
    }
    CHECK(r.mean == doctest::Approx(want / 3).epsilon(1e-14));
  }
  SUBCASE("envelope flags") {
    auto r = average_probability({0.5, 0.5, 2}, 0.0, 0.0, model, 200);
    CHECK_FALSE(r.in_envelope);
    CHECK(r.nonpositive_gaps > 0);
    auto g = sample_gaps({0.5, 0.5, 2}, 200);
    CHECK(r.nonpositive_gaps == std::size_t(std::count_if(g.begin(), g.end(), [](double a) { return a <= 0.0; })));
  }
  SUBCASE("failures name the sample") {
    GLZParams bad;
    bad.pulse = PulseKind::Rect;
    bad.error = {ErrorKind::FixPeak, 0.1};
    CHECK_THROWS_AS(average_probability({0.5, 0.1, 1}, 1.0, 0.0, bad, 10), Error);
  }
}

TEST_CASE("characteristic_b0") {
  GLZParams model;
  SUBCASE("perpendicular control follows 1/a") {
    for (double a : {0.25, 0.5, 1.0, 1.25, 1.5}) {
      auto c = characteristic_b0(a, pi / 2, model);
      CHECK(c.b0 * a == doctest::Approx(1.0).epsilon(1e-3));
      CHECK(c.residual <= kRootTolerance);
    }
  }
  SUBCASE("parallel control against a fine scan") {
    auto c = characteristic_b0(0.5, 0.0, model);
    CHECK(c.residual <= kRootTolerance);
    GLZParams p;
    p.a = 0.5;
    p.phi = 0.0;
    // the root is the first dip of P(b) on the scan range
    double lo = 0.2, hi = 100.0, best_b = 0.0, prev = INFINITY;
    bool found = false;
    std::vector<double> vals;
    for (int k = 0; k < 2000; ++k) {
      double b = lo * std::pow(hi / lo, k / 1999.0);
      double v = transition_probability(with_control(p, b));
      if (!found && v > prev && prev < 1e-3) {
        best_b = lo * std::pow(hi / lo, (k - 1) / 1999.0);
        found = true;
      }
      prev = v;
    }
    REQUIRE(found);
    CHECK(c.b0 == doctest::Approx(best_b).epsilon(0.005));
    // nothing below the root gets as low
    for (int k = 0; k < 200; ++k) {
      double b = lo * std::pow(c.b0 * 0.98 / lo, k / 199.0);
      CHECK(transition_probability(with_control(p, b)) > kRootTolerance);
    }
  }
  SUBCASE("T-averaged b0 over one time is b0") {
    std::vector<double> Ts{10.0};
    CHECK(characteristic_b0_t_averaged(0.7, 0.0, model, Ts) == characteristic_b0(0.7, 0.0, model).b0);
  }
  CHECK_THROWS_AS(characteristic_b0(0.0, 0.0, model), InvalidArgument);
  CHECK_THROWS_AS(characteristic_b0(2.0, 0.0, model), InvalidArgument);

  std::vector<CharacteristicPoint> curve{characteristic_b0(0.5, pi / 2, model)};
  std::ostringstream os;
  write_cc_csv(os, curve, model);
  CHECK(os.str().find("a,b0,residual\n0.5,") != std::string::npos);
}

TEST_CASE("optimize_bstar") {
  GLZParams model;
  SUBCASE("narrow distribution recovers b0") {
    auto r = optimize_bstar({0.5, 1e-4, 5}, pi / 2, model, 100);
    CHECK(r.b_star == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(r.lo == doctest::Approx(r.b0 / 2));
    CHECK(r.hi == doctest::Approx(2 * r.b0));
  }
  SUBCASE("parallel control beats perpendicular") {
    auto x = optimize_bstar({0.5, 0.1, 7}, 0.0, model, 400);
    auto y = optimize_bstar({0.5, 0.1, 7}, pi / 2, model, 400);
    double se = std::hypot(x.p_star.std_error, y.p_star.std_error);
    CHECK(y.p_star.mean - x.p_star.mean > 2 * se);
    // common random numbers: the optimum is no worse than b0 on the same sample
    auto at_b0 = average_probability({0.5, 0.1, 7}, x.b0, 0.0, model, 400);
    CHECK(x.p_star.mean <= at_b0.mean);
  }
  CHECK_THROWS_AS(optimize_bstar({0.5, 0.1, 7}, 0.0, model, 99), InvalidArgument);
  CHECK_THROWS_AS(optimize_bstar({0.0, 0.1, 7}, 0.0, model, 100), InvalidArgument);
}

TEST_CASE("quadratic growth of the averaged probability at b0") {
  // same normal deviates scaled by sigma
  GLZParams model;
  double b0 = characteristic_b0(0.5, 0.0, model).b0;
  std::vector<double> s{0.02, 0.04, 0.08}, p;
  for (double sigma : s) p.push_back(average_probability({0.5, sigma, 3}, b0, 0.0, model, 200).mean);
  double slope = std::log(p[2] / p[0]) / std::log(s[2] / s[0]);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("average_area") {
  GLZParams model;
  auto perp_narrow = average_area({0.5, 1e-4, 1}, pi / 2, model, 50);
  CHECK(perp_narrow.mean <= 1e-3);
  auto par = average_area({0.5, 0.1, 1}, 0.0, model, 200);
  auto perp = average_area({0.5, 0.1, 1}, pi / 2, model, 200);
  CHECK(par.mean > perp.mean);
  CHECK(par.b == doctest::Approx(characteristic_b0(0.5, 0.0, model).b0));
  auto par_hi = average_area({1.8, 0.36, 1}, 0.0, model, 200);
  auto perp_hi = average_area({1.8, 0.36, 1}, pi / 2, model, 200);
  CHECK(par_hi.mean < par.mean);
  CHECK(perp_hi.mean < perp.mean);
}

TEST_CASE("JSON") {
  GLZParams model;
  EnsembleOptions o;
  o.keep_samples = true;
  auto r = average_probability({0.5, 0.1, 42}, 2.0, pi / 2, model, 8, o);
  auto j = nlohmann::json::parse(to_json(r, model));
  CHECK(j["seed"] == 42);
  CHECK(j["n_samples"] == 8);
  CHECK(j["mean"].get<double>() == r.mean);
  CHECK(j["std_error"].get<double>() == r.std_error);
  CHECK(j["params"]["pulse"] == "L");
  CHECK(j["samples"].size() == 8);
}
