#pragma once
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dipolerad {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule (Newton iteration on the Legendre recurrence).
/// Exact for polynomials of degree <= 2n-1; nodes accurate to ~1 ulp.
GaussRule gauss_legendre(int n);

/// Shared cached rule for panel quadrature (computed once per node count).
const GaussRule& cached_gauss_legendre(int n);

/// Deterministic pairwise (tree) summation; independent of thread count by
/// construction since it is a pure function of the input order.
double pairwise_sum(std::span<const double> v);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> v);

/// Finite-difference weights for the m-th derivative at x0 on the given
/// stencil nodes (Fornberg's recurrence). weights[k][j] multiplies f(x[j])
/// for the k-th derivative, k = 0..m.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x, int m);

}  // namespace dipolerad
