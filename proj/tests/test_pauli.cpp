#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lzcd/pauli.hpp"

using namespace lzcd;
using std::numbers::pi;

namespace {

// exp(-i n.s) summed term by term on full 2x2 matrices.
Matrix2 taylor_exp(const PauliVector& n, int terms) {
  Matrix2 h = to_matrix(n);
  for (auto& row : h)
    for (auto& x : row) x *= cplx(0.0, -1.0);
  Matrix2 term{{{1.0, 0.0}, {0.0, 1.0}}};
  Matrix2 sum = term;
  for (int k = 1; k < terms; ++k) {
    term = matmul(term, h);
    for (auto& row : term)
      for (auto& x : row) x /= double(k);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sum[i][j] += term[i][j];
  }
  return sum;
}

double max_diff(const Matrix2& x, const Matrix2& y) {
  double d = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(x[i][j] - y[i][j]));
  return d;
}

Unitary2 random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  cplx A(g(rng), g(rng)), B(g(rng), g(rng));
  double r = std::sqrt(std::norm(A) + std::norm(B));
  return {A / r, B / r};
}

}  // namespace

TEST_CASE("apply on basis states") {
  auto psi = apply(Unitary2::identity(), StateVector::down());
  CHECK(psi == StateVector::down());

  // U = [[0, 1], [-1, 0]] swaps the basis up to sign.
  auto flipped = apply(Unitary2{0.0, 1.0}, StateVector::down());
  CHECK(std::abs(flipped.plus - cplx(1.0)) < 1e-15);
  CHECK(std::abs(flipped.minus) < 1e-15);
  auto back = apply(Unitary2{0.0, 1.0}, StateVector::up());
  CHECK(std::abs(back.minus - cplx(-1.0)) < 1e-15);
}

TEST_CASE("apply preserves the norm") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    auto u = random_unitary(rng);
    StateVector psi = StateVector{{g(rng), g(rng)}, {g(rng), g(rng)}}.normalized();
    CHECK(std::abs(apply(u, psi).norm2() - 1.0) < 1e-12);
  }
}

TEST_CASE("compose is the matrix product") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    auto u1 = random_unitary(rng), u2 = random_unitary(rng);
    auto c = compose(u2, u1);
    CHECK(c.is_unimodular());
    CHECK(max_diff(to_matrix(c), matmul(to_matrix(u2), to_matrix(u1))) < 1e-14);
    auto id = compose(u1, u1.adjoint());
    CHECK(std::abs(id.A - cplx(1.0)) < 1e-12);
    CHECK(std::abs(id.B) < 1e-12);
    CHECK(compose(Unitary2::identity(), u1) == u1);
  }
}

TEST_CASE("unimodularity survives long composition chains") {
  std::mt19937_64 rng(3);
  std::vector<Unitary2> pool;
  for (int k = 0; k < 16; ++k) pool.push_back(random_unitary(rng));
  Unitary2 u = Unitary2::identity();
  for (int k = 0; k < 100000; ++k) u = compose(pool[k % pool.size()], u);
  CHECK(std::abs(u.det() - 1.0) < 1e-10);
}

TEST_CASE("pauli_exp") {
  SUBCASE("zero vector is the identity") {
    CHECK(pauli_exp({}) == Unitary2::identity());
  }
  SUBCASE("quarter turn about s1 is -i s1") {
    auto k = pauli_exp({0.0, pi / 2, 0.0, 0.0});
    CHECK(std::abs(k.A) < 1e-15);
    CHECK(std::abs(k.B - cplx(0.0, -1.0)) < 1e-15);
  }
  SUBCASE("matches the Taylor series of the matrix exponential") {
    double phi = 0.3;
    PauliVector n{0.0, pi / 2 * std::cos(phi), pi / 2 * std::sin(phi), 0.0};
    CHECK(max_diff(to_matrix(pauli_exp(n)), taylor_exp(n, 12)) < 1e-6);
    CHECK(max_diff(to_matrix(pauli_exp(n)), taylor_exp(n, 40)) < 1e-14);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
      PauliVector m{0.0, u(rng), u(rng), u(rng)};
      CHECK(max_diff(to_matrix(pauli_exp(m)), taylor_exp(m, 60)) < 1e-12);
    }
  }
  SUBCASE("tiny vectors use the series limit") {
    PauliVector n{0.0, 1e-12, -2e-12, 3e-12};
    auto u = pauli_exp(n);
    CHECK(std::abs(u.A - cplx(1.0, -3e-12)) < 1e-20);
    CHECK(std::abs(u.B - cplx(2e-12, -1e-12)) < 1e-20);
  }
  SUBCASE("unitary for |n| up to 10") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int k = 0; k <= 100; ++k) {
      PauliVector d{0.0, g(rng), g(rng), g(rng)};
      auto n = (0.1 * k / d.length()) * d;
      CHECK(pauli_exp(n).is_unimodular(1e-14));
    }
  }
  SUBCASE("rejects an identity component") {
    CHECK_THROWS(pauli_exp({0.5, 1.0, 0.0, 0.0}));
  }
}

TEST_CASE("sigma_phi") {
  CHECK(sigma_phi(0.0) == PauliVector{0.0, 1.0, 0.0, 0.0});
  auto y = sigma_phi(pi / 2);
  CHECK(y.n1 == doctest::Approx(0.0).epsilon(1e-16));
  CHECK(y.n2 == 1.0);
  auto d = sigma_phi(pi / 4);
  CHECK(d.n1 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(d.n2 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(d.n0 == 0.0);
  CHECK(d.n3 == 0.0);
}

TEST_CASE("s3 sigma_phi s3 = -sigma_phi") {
  Matrix2 s3 = to_matrix(PauliVector{0.0, 0.0, 0.0, 1.0});
  for (int k = 0; k < 20; ++k) {
    double phi = -pi + 2 * pi * k / 19.0;
    Matrix2 sp = to_matrix(sigma_phi(phi));
    Matrix2 lhs = matmul(matmul(s3, sp), s3);
    Matrix2 neg = to_matrix(-1.0 * sigma_phi(phi));
    CHECK(max_diff(lhs, neg) < 1e-15);
  }
}

TEST_CASE("instantaneous eigenstates") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    PauliVector h{0.0, u(rng), 0.0, u(rng)};
    double e = h.length();
    auto g = ground_state(h), x = excited_state(h);
    auto hg = apply(h, g), hx = apply(h, x);
    CHECK(std::abs(hg.plus + e * g.plus) < 1e-12);
    CHECK(std::abs(hg.minus + e * g.minus) < 1e-12);
    CHECK(std::abs(hx.plus - e * x.plus) < 1e-12);
    CHECK(std::abs(hx.minus - e * x.minus) < 1e-12);
    CHECK(std::abs(inner(g, x)) < 1e-14);
  }
  // Far before a positive sweep the ground state is |->.
  auto g = ground_state({0.0, 0.1, 0.0, 50.0});
  CHECK(std::norm(g.minus) > 0.999);
}
