#include "lzcd/specfun.hpp"

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "lzcd/error.hpp"

namespace lzcd {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos series with g = 607/128 and 15 coefficients (Godfrey).
constexpr double kLanczosShift = 5.2421875;  // g + 1/2
constexpr double kLanczosC0 = 0.999999999999997092;
constexpr std::array<double, 14> kLanczos = {
    57.1562356658629235,     -59.5979603554754912,     14.1360979747417471,
    -0.491913816097620199,   0.339946499848118887e-4,  0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5};
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

bool is_pole(cplx z) { return z.imag() == 0.0 && z.real() <= 0.0 && std::floor(z.real()) == z.real(); }

cplx lanczos_log_gamma(cplx z) {
  cplx series = kLanczosC0;
  for (std::size_t j = 0; j < kLanczos.size(); ++j) series += kLanczos[j] / (z + static_cast<double>(j + 1));
  const cplx t = z + kLanczosShift;
  return (z + 0.5) * std::log(t) - t + kLogSqrt2Pi + std::log(series) - std::log(z);
}

}  // namespace

cplx log_gamma(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InvalidArgument("log_gamma: non-finite argument");
  if (is_pole(z)) throw InvalidArgument("log_gamma: pole of the Gamma function");
  if (z.real() >= 0.5) return lanczos_log_gamma(z);
  // log Gamma(z) = log Gamma(z + m) - sum_k log(z + k) keeps the principal branch
  const int m = static_cast<int>(std::ceil(0.5 - z.real()));
  cplx shift = 0.0;
  for (int k = 0; k < m; ++k) shift += std::log(z + static_cast<double>(k));
  return lanczos_log_gamma(z + static_cast<double>(m)) - shift;
}

cplx gamma(cplx z) { return std::exp(log_gamma(z)); }

cplx rgamma(cplx z) {
  if (is_pole(z)) return 0.0;
  return std::exp(-log_gamma(z));
}

double chi(double a) {
  const double q = 0.25 * a * a;  // nu/2 = i q
  return kPi / 4 + log_gamma({0.5, -q}).imag() - log_gamma({1.0, -q}).imag();
}

double p_infinity(double a, double phi) {
  const double c = std::cos(chi(a) - phi);
  return -std::expm1(-kPi * a * a) * c * c;
}

double p_infinity_asymptotic(double a, double phi, AsymptoticRegime regime) {
  if (regime == AsymptoticRegime::Small) {
    const double c = std::cos(phi - kPi / 4);
    const double a2 = a * a;
    return kPi * a2 * c * c - 0.5 * kPi * a2 * a2 * (std::numbers::ln2 * std::cos(2 * phi) + kPi * c * c);
  }
  const double s = std::sin(phi);
  const double a2 = a * a;
  return s * s + std::sin(2 * phi) / (2 * a2) + std::cos(2 * phi) / (4 * a2 * a2);
}

cplx delta_amplitude_general(double a, const PauliVector& n) {
  const double lz_amp = std::exp(-0.5 * kPi * a * a);
  const double r = n.length();
  if (r == 0.0) return lz_amp;
  const double sgn = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  const double mix = std::sqrt(-std::expm1(-kPi * a * a));
  const double x = chi(a);
  const double s = std::sin(r);
  const double real = lz_amp * std::cos(r) - sgn * mix * s * (n.n1 / r * std::cos(x) + n.n2 / r * std::sin(x));
  return {real, -n.n3 / r * s};
}

double avg_plz(double mu, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("avg_plz: sigma must be non-negative");
  const double w = 1.0 + 2.0 * kPi * sigma * sigma;
  return std::exp(-kPi * mu * mu / w) / std::sqrt(w);
}

double average_p_infinity(double mu, double sigma, double phi) {
  if (!(sigma >= 0.0)) throw InvalidArgument("average_p_infinity: sigma must be non-negative");
  if (sigma == 0.0) return p_infinity(mu, phi);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * kPi));
  auto integrand = [&](double a) {
    const double d = (a - mu) / sigma;
    return norm * std::exp(-0.5 * d * d) * p_infinity(a, phi);
  };
  using boost::math::quadrature::gauss_kronrod;
  // split at the origin, where the integrand curves most
  const double lo = mu - 12.0 * sigma;
  const double hi = mu + 12.0 * sigma;
  double total = 0.0;
  if (lo < 0.0 && hi > 0.0) {
    total = gauss_kronrod<double, 61>::integrate(integrand, lo, 0.0, 15, 1e-13) +
            gauss_kronrod<double, 61>::integrate(integrand, 0.0, hi, 15, 1e-13);
  } else {
    total = gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 15, 1e-13);
  }
  return total;
}

}  // namespace lzcd
