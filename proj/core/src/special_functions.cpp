#include "dipolerad/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dipolerad/errors.hpp"

namespace dipolerad {

namespace {

using cd = std::complex<double>;

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// Power series, |z| small. Accurate to ~1e-15 for |z| <= 3.5 (worst-case
/// cancellation there costs ~2 digits).
cd e1_series(cd z) {
  cd sum = 0.0;
  cd term = 1.0;
  for (int k = 1; k <= 64; ++k) {
    term *= -z / static_cast<double>(k);
    const cd add = -term / static_cast<double>(k);
    sum += add;
    if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return -kEulerGamma - std::log(z) + sum;
}

/// Modified Lentz continued fraction for e^z E1(z):
///   E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/( ... ))))
/// Converges for z off the negative real axis; used for moderate |z|.
cd e1_scaled_cf(cd z) {
  const double tiny = 1e-300;
  cd b = z + 1.0;
  cd c = 1.0 / tiny;
  cd d = 1.0 / b;
  cd h = d;
  for (int k = 1; k <= 400; ++k) {
    const cd a = -static_cast<double>(k) * static_cast<double>(k);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) return h;
  }
  throw NumericalError("exp_e1_scaled: continued fraction failed to converge");
}

/// Asymptotic series e^z E1(z) ~ (1/z) sum (-1)^k k! / z^k, truncated at the
/// smallest term. Used for |z| >= 36 where the optimal error is below 1e-14.
cd e1_scaled_asymptotic(cd z) {
  cd sum = 1.0;
  cd term = 1.0;
  double prev = 1.0;
  for (int k = 1; k <= 48; ++k) {
    term *= -static_cast<double>(k) / z;
    const double mag = std::abs(term);
    if (mag > prev) break;  // divergent tail reached
    sum += term;
    if (mag < 1e-17) break;
    prev = mag;
  }
  return sum / z;
}

}  // namespace

std::complex<double> exp_e1_scaled(std::complex<double> z) {
  if (z.imag() == 0.0 && z.real() <= 0.0)
    throw std::domain_error("exp_e1_scaled: argument on the branch cut (-inf, 0]");
  const double az = std::abs(z);
  if (az < 3.5) return std::exp(z) * e1_series(z);
  if (az < 36.0) return e1_scaled_cf(z);
  return e1_scaled_asymptotic(z);
}

std::complex<double> exp_e1(std::complex<double> z) { return std::exp(-z) * exp_e1_scaled(z); }

SiCi sine_cosine_integral(double x) {
  if (!(x > 0.0)) throw std::domain_error("sine_cosine_integral: requires x > 0");
  SiCi out;
  if (x <= 2.0) {
    // Taylor series; alternating, modest cancellation on this range.
    const double x2 = x * x;
    double si = x, ci = 0.0;
    double term_si = x;
    double term_ci = 1.0;
    for (int k = 1; k <= 40; ++k) {
      term_ci *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
      ci += term_ci / (2.0 * k);
      term_si *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      si += term_si / (2.0 * k + 1.0);
      if (std::abs(term_si) < 1e-18 && std::abs(term_ci) < 1e-18) break;
    }
    out.si = si;
    out.ci = kEulerGamma + std::log(x) + ci;
    return out;
  }
  // E1(ix) = -Ci(x) + i (Si(x) - pi/2)
  const cd e1 = std::exp(cd(0.0, -x)) * exp_e1_scaled(cd(0.0, x));
  out.ci = -e1.real();
  out.si = 0.5 * std::numbers::pi + e1.imag();
  return out;
}

}  // namespace dipolerad
