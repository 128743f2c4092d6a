#pragma once

// Exact 2x2 complex algebra for two-level propagation.
//
// Propagators of traceless Hamiltonians live in SU(2) and are stored as the
// Cayley-Klein pair (A, B) of
//
//     U = |  A    B  |
//         | -B*   A* |
//
// with |A|^2 + |B|^2 = 1. States are written in the diabatic basis
// |+> = (1, 0), |-> = (0, 1).

#include <array>
#include <complex>
#include <numbers>

namespace lzcd {

using cplx = std::complex<double>;

/// Tolerance used when checking the unit-norm / unimodular invariants.
inline constexpr double kUnitTolerance = 1e-10;

struct StateVector {
  cplx plus{0.0};
  cplx minus{0.0};

  static constexpr StateVector up() { return {1.0, 0.0}; }
  static constexpr StateVector down() { return {0.0, 1.0}; }

  double norm2() const { return std::norm(plus) + std::norm(minus); }
  StateVector normalized() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// <lhs|rhs>
cplx inner(const StateVector& lhs, const StateVector& rhs);

struct Unitary2 {
  cplx A{1.0};
  cplx B{0.0};

  static constexpr Unitary2 identity() { return {1.0, 0.0}; }

  /// |A|^2 + |B|^2, equal to det U.
  double det() const { return std::norm(A) + std::norm(B); }
  bool is_unimodular(double tol = kUnitTolerance) const { return std::abs(det() - 1.0) <= tol; }

  Unitary2 adjoint() const { return {std::conj(A), -B}; }

  /// Matrix entry (row, col), rows/cols indexed 0 -> |+>, 1 -> |->.
  cplx operator()(int row, int col) const;

  friend bool operator==(const Unitary2&, const Unitary2&) = default;
};

/// Real coefficients of the Hermitian matrix n0*1 + n1*s1 + n2*s2 + n3*s3.
struct PauliVector {
  double n0 = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;

  /// Euclidean length of the Pauli part (n1, n2, n3).
  double length() const;

  friend PauliVector operator+(const PauliVector& x, const PauliVector& y) {
    return {x.n0 + y.n0, x.n1 + y.n1, x.n2 + y.n2, x.n3 + y.n3};
  }
  friend PauliVector operator*(double s, const PauliVector& x) {
    return {s * x.n0, s * x.n1, s * x.n2, s * x.n3};
  }
  friend bool operator==(const PauliVector&, const PauliVector&) = default;
};

using Matrix2 = std::array<std::array<cplx, 2>, 2>;

Matrix2 to_matrix(const PauliVector& n);
Matrix2 to_matrix(const Unitary2& u);
Matrix2 matmul(const Matrix2& x, const Matrix2& y);

StateVector apply(const Unitary2& u, const StateVector& psi);

/// H psi for the Hermitian matrix represented by h.
StateVector apply(const PauliVector& h, const StateVector& psi);

/// Product u2 * u1 (u1 acts first).
Unitary2 compose(const Unitary2& u2, const Unitary2& u1);

/// exp(-i n.sigma) = cos|n| 1 - i sin|n| (n^.sigma). Requires n0 == 0.
Unitary2 pauli_exp(const PauliVector& n);

/// sigma_phi = s1 cos(phi) + s2 sin(phi). Intended for phi in [0, pi/2];
/// other angles are accepted and simply rotate further in the s1-s2 plane.
PauliVector sigma_phi(double phi);

/// Lower / upper eigenvector of a real-symmetric h = n1 s1 + n3 s3 (n2
/// ignored, n0 only shifts the spectrum). Continuous in the mixing angle
/// atan2(n1, n3); at the degenerate point returns |-> / |+>.
StateVector ground_state(const PauliVector& h);
StateVector excited_state(const PauliVector& h);

}  // namespace lzcd
