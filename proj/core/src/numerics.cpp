#include "dipolerad/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dipolerad {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.x.assign(n, 0.0);
  rule.w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one polishing step after convergence
        double q0 = 1.0, q1 = x;
        for (int k = 2; k <= n; ++k) {
          const double q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
          q0 = q1;
          q1 = q2;
        }
        dp = n * (x * q1 - q0) / (x * x - 1.0);
        x -= q1 / dp;
        break;
      }
    }
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

const GaussRule& cached_gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

namespace {

template <typename T>
T pairwise_impl(const T* v, std::size_t n) {
  if (n <= 16) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_impl(v, h) + pairwise_impl(v + h, n - h);
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_impl(v.data(), v.size()); }

std::complex<double> pairwise_sum(std::span<const std::complex<double>> v) {
  return pairwise_impl(v.data(), v.size());
}

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  if (n < m) throw std::invalid_argument("fornberg_weights: stencil too small for derivative order");
  std::vector<std::vector<std::vector<double>>> d(
      m + 1, std::vector<std::vector<double>>(n + 1, std::vector<double>(n + 1, 0.0)));
  d[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i <= n; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      for (int k = 0; k <= std::min(i, m); ++k) {
        d[k][i][j] = ((x[i] - x0) * d[k][i - 1][j] - (k > 0 ? k * d[k - 1][i - 1][j] : 0.0)) / c3;
      }
    }
    for (int k = 0; k <= std::min(i, m); ++k) {
      d[k][i][i] = (c1 / c2) * ((k > 0 ? k * d[k - 1][i - 1][i - 1] : 0.0) -
                                (x[i - 1] - x0) * d[k][i - 1][i - 1]);
    }
    c1 = c2;
  }
  std::vector<std::vector<double>> out(m + 1, std::vector<double>(n + 1, 0.0));
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= n; ++j) out[k][j] = d[k][n][j];
  return out;
}

}  // namespace dipolerad
