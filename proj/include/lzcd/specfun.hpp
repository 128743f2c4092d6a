#pragma once

// Closed-form layer: complex Gamma function, the delta-kick transition
// probability P_inf(a; phi) and its asymptotics, the general delta-kick
// amplitude, the exact LZ propagator in parabolic cylinder functions, and the
// Gaussian average of the LZ formula.

#include <complex>

#include "lzcd/pauli.hpp"

namespace lzcd {

/// Principal branch of log Gamma(z): continuous off the negative real axis,
/// real for real z > 0, and satisfying log_gamma(z + 1) = log(z) + log_gamma(z).
/// Throws InvalidArgument at the poles z = 0, -1, -2, ...
cplx log_gamma(cplx z);

/// Gamma(z) = exp(log_gamma(z)).
cplx gamma(cplx z);

/// 1 / Gamma(z); entire, exactly zero at the poles of Gamma.
cplx rgamma(cplx z);

/// chi(a) = pi/4 + arg Gamma((1 - nu)/2) - arg Gamma((2 - nu)/2), nu = i a^2 / 2.
/// Even in a, chi(0) = pi/4, increasing towards pi/2 for a > 0.
double chi(double a);

/// P_inf(a; phi) = (1 - exp(-pi a^2)) cos^2(chi(a) - phi): the transition
/// probability of the LZ problem with a pi-pulse kick along sigma_phi at t = 0.
double p_infinity(double a, double phi);

enum class AsymptoticRegime { Small, Large };

/// Truncated expansions of P_inf. Small: through O(a^4), intended for a <= 0.3.
/// Large: sin^2(phi) + sin(2 phi)/(2 a^2) + cos(2 phi)/(4 a^4), intended for a >= 3.
double p_infinity_asymptotic(double a, double phi, AsymptoticRegime regime);

/// Diagonal amplitude of U_0(inf, 0) exp(-i n.sigma) U_0(0, -inf) in the
/// asymptotic eigenbasis. Only its modulus is gauge invariant.
cplx delta_amplitude_general(double a, const PauliVector& n);

/// Parabolic cylinder function D_nu(z) from its Kummer-series representation,
/// summed in binary128. Certified for |z| <= 6 sqrt(2); throws RangeError beyond.
cplx pcf_d(cplx nu, cplx z);

/// Largest |t| accepted by pcf_lz_propagator.
inline constexpr double kPcfMaxTime = 6.0;

/// Exact LZ propagator U_0(t_f, t_i; a) for H = -t s3 + a s1, as the
/// Cayley-Klein pair built from parabolic cylinder functions.
Unitary2 pcf_lz_propagator(double a, double t_f, double t_i);

/// <exp(-pi a^2)> over a ~ N(mu, sigma^2), in closed form.
double avg_plz(double mu, double sigma);

/// <P_inf(a; phi)> over a ~ N(mu, sigma^2), by adaptive Gauss-Kronrod quadrature.
double average_p_infinity(double mu, double sigma, double phi);

}  // namespace lzcd
