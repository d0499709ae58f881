#include "dipolerad/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dipolerad/errors.hpp"
#include "dipolerad/numerics.hpp"

namespace dipolerad {

PolarizationTriad triad_for(const Vec3& in) {
  const double n2 = norm2(in);
  if (n2 <= 0.0 || !std::isfinite(n2)) throw std::invalid_argument("triad_for: zero direction");
  Vec3 x = in;
  if (n2 != 1.0) x = in / std::sqrt(n2);

  const double rho = std::hypot(x.x, x.y);  // sin(theta)
  if (rho < 1e-14) {
    // at the poles phi is undefined; use the canonical Cartesian pair
    if (x.z >= 0.0) return {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    return {{1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, -1.0}};
  }
  const double cph = x.x / rho, sph = x.y / rho;
  const Vec3 e1{x.z * cph, x.z * sph, -rho};  // theta_hat
  const Vec3 e2{-sph, cph, 0.0};              // phi_hat
  return {e1, e2, x};
}

double polarization_sum(const CVec3& d, const Vec3& xhat) {
  const PolarizationTriad t = triad_for(xhat);
  const double triad_form = std::norm(dot(t.e1, d)) + std::norm(dot(t.e2, d));
  const double completeness = norm2(d) - std::norm(dot(t.xhat, d));
  const double scale = std::max(norm2(d), 1e-300);
  if (std::abs(triad_form - completeness) > 1e-10 * scale)
    throw NumericalError("polarization_sum: triad/completeness identity violated");
  return triad_form;
}

SphericalGrid SphericalGrid::product_gauss(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1)
    throw std::invalid_argument("SphericalGrid: orders must be positive");
  const GaussRule rule = gauss_legendre(n_theta);
  SphericalGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  g.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  const double wphi = 2.0 * std::numbers::pi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double u = rule.x[i];  // cos(theta)
    const double st = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      g.nodes.push_back({{st * std::cos(phi), st * std::sin(phi), u}, rule.w[i] * wphi});
    }
  }
  // weight normalization: sum w_i = 4 pi
  std::vector<double> w;
  w.reserve(g.nodes.size());
  for (const auto& n : g.nodes) w.push_back(n.weight);
  const double total = pairwise_sum(w);
  if (std::abs(total - 4.0 * std::numbers::pi) > 1e-10)
    throw NumericalError("SphericalGrid: weights do not sum to 4 pi");
  return g;
}

double integrate_sphere(const std::function<double(const Vec3&)>& f, const SphericalGrid& grid) {
  std::vector<double> terms;
  terms.reserve(grid.nodes.size());
  for (const auto& n : grid.nodes) {
    const double v = f(n.dir);
    if (!std::isfinite(v)) throw NumericalError("integrate_sphere: non-finite integrand sample");
    terms.push_back(n.weight * v);
  }
  return pairwise_sum(terms);
}

}  // namespace dipolerad
