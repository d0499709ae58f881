#pragma once
#include <complex>

namespace dipolerad {

struct SiCi {
  double si = 0.0;  // Si(x) = int_0^x sin(t)/t dt
  double ci = 0.0;  // Ci(x) = gamma + ln x + int_0^x (cos(t)-1)/t dt
};

/// Sine and cosine integrals for x > 0 (power series for small x, complex
/// exponential-integral continued fraction / asymptotics beyond).
SiCi sine_cosine_integral(double x);

/// Scaled exponential integral e^z E1(z) for z off the cut (-inf, 0].
/// Using the scaled form keeps magnitudes O(1/|z|) for any argument, which
/// matters when |Re z| is large and e^{-z} would overflow.
std::complex<double> exp_e1_scaled(std::complex<double> z);

/// E1(z) itself; convenience wrapper, valid while e^{-z} is representable.
std::complex<double> exp_e1(std::complex<double> z);

}  // namespace dipolerad
