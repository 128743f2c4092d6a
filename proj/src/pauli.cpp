#include "lzcd/pauli.hpp"

#include <cmath>

#include "lzcd/error.hpp"

namespace lzcd {

namespace {
constexpr cplx I{0.0, 1.0};
}

StateVector StateVector::normalized() const {
  const double n = std::sqrt(norm2());
  return {plus / n, minus / n};
}

cplx inner(const StateVector& lhs, const StateVector& rhs) {
  return std::conj(lhs.plus) * rhs.plus + std::conj(lhs.minus) * rhs.minus;
}

cplx Unitary2::operator()(int row, int col) const {
  if (row == 0) return col == 0 ? A : B;
  return col == 0 ? -std::conj(B) : std::conj(A);
}

double PauliVector::length() const { return std::sqrt(n1 * n1 + n2 * n2 + n3 * n3); }

Matrix2 to_matrix(const PauliVector& n) {
  return {{{cplx{n.n0 + n.n3, 0.0}, cplx{n.n1, -n.n2}},
           {cplx{n.n1, n.n2}, cplx{n.n0 - n.n3, 0.0}}}};
}

Matrix2 to_matrix(const Unitary2& u) { return {{{u(0, 0), u(0, 1)}, {u(1, 0), u(1, 1)}}}; }

Matrix2 matmul(const Matrix2& x, const Matrix2& y) {
  Matrix2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
  return r;
}

StateVector apply(const Unitary2& u, const StateVector& psi) {
  return {u.A * psi.plus + u.B * psi.minus, -std::conj(u.B) * psi.plus + std::conj(u.A) * psi.minus};
}

StateVector apply(const PauliVector& h, const StateVector& psi) {
  return {(h.n0 + h.n3) * psi.plus + cplx{h.n1, -h.n2} * psi.minus,
          cplx{h.n1, h.n2} * psi.plus + (h.n0 - h.n3) * psi.minus};
}

Unitary2 compose(const Unitary2& u2, const Unitary2& u1) {
  return {u2.A * u1.A - u2.B * std::conj(u1.B), u2.A * u1.B + u2.B * std::conj(u1.A)};
}

Unitary2 pauli_exp(const PauliVector& n) {
  if (n.n0 != 0.0) throw InvalidArgument("pauli_exp: identity component must vanish");
  const double r = n.length();
  // sin(r)/r, with its Taylor series near the origin
  const double sinc = r < 1e-4 ? 1.0 - r * r / 6.0 + r * r * r * r / 120.0 : std::sin(r) / r;
  const double c = std::cos(r);
  return {cplx{c, -sinc * n.n3}, -I * sinc * cplx{n.n1, -n.n2}};
}

PauliVector sigma_phi(double phi) { return {0.0, std::cos(phi), std::sin(phi), 0.0}; }

StateVector ground_state(const PauliVector& h) {
  const double half = 0.5 * std::atan2(h.n1, h.n3);
  return {-std::sin(half), std::cos(half)};
}

StateVector excited_state(const PauliVector& h) {
  const double half = 0.5 * std::atan2(h.n1, h.n3);
  return {std::cos(half), std::sin(half)};
}

}  // namespace lzcd
