#pragma once
#include <functional>
#include <vector>

#include "dipolerad/vec3.hpp"

namespace dipolerad {

/// Right-handed orthonormal polarization triad {e1, e2, xhat} attached to a
/// direction: e1 = theta_hat, e2 = phi_hat of spherical coordinates, with a
/// canonical Cartesian pair exactly at the poles. All physical outputs go
/// through polarization sums, which are independent of this gauge choice.
struct PolarizationTriad {
  Vec3 e1, e2, xhat;
};

/// Builds the triad for a direction. Inputs off unit norm by more than 1e-10
/// are normalized first; a zero vector is an error.
PolarizationTriad triad_for(const Vec3& xhat);

/// Sum over both polarizations of |e_lambda . d|^2. Evaluates the triad form
/// and the completeness form |d|^2 - |xhat.d|^2 and checks they agree before
/// returning the triad form.
double polarization_sum(const CVec3& d, const Vec3& xhat);

/// Product quadrature on the unit sphere: Gauss-Legendre in cos(theta) x
/// uniform trapezoid in phi. Weights sum to 4 pi.
struct SphericalGrid {
  struct Node {
    Vec3 dir;
    double weight;
  };
  std::vector<Node> nodes;
  int n_theta = 0;
  int n_phi = 0;

  static SphericalGrid product_gauss(int n_theta, int n_phi);
};

/// Sum of w_i f(x_i) with deterministic pairwise reduction.
double integrate_sphere(const std::function<double(const Vec3&)>& f, const SphericalGrid& grid);

}  // namespace dipolerad
