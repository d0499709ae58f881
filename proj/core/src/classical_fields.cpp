#include "dipolerad/classical_fields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dipolerad {

namespace {

const double kFourPi = 4.0 * std::numbers::pi;

Vec3 unit_direction(const Vec3& v) { return triad_for(v).xhat; }

void check_radius(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("field point: radius must be > 0 (singular origin)");
}

}  // namespace

ZoneFields electric_source_field(const DipoleTrajectory& traj, const FieldPoint& p) {
  check_radius(p.radius);
  const Vec3 n = unit_direction(p.xhat);
  const double tr = p.retarded_time();
  const Vec3 d = traj.value(tr);
  const Vec3 v = traj.d1(tr);
  const Vec3 a = traj.d2(tr);
  const double x = p.radius;
  ZoneFields z;
  z.near = (3.0 * dot(n, d) * n - d) / (kFourPi * x * x * x);
  z.intermediate = (3.0 * dot(n, v) * n - v) / (kFourPi * x * x);
  z.far = cross(n, cross(n, a)) / (kFourPi * x);
  return z;
}

RadiationFields radiation_source_fields(const DipoleTrajectory& traj, const FieldPoint& p) {
  check_radius(p.radius);
  const Vec3 n = unit_direction(p.xhat);
  const Vec3 a = traj.d2(p.retarded_time());
  RadiationFields f;
  f.E = cross(n, cross(n, a)) / (kFourPi * p.radius);
  f.B = cross(n, f.E);
  return f;
}

Vec3 radiation_source_potential(const DipoleTrajectory& traj, const FieldPoint& p) {
  check_radius(p.radius);
  const Vec3 n = unit_direction(p.xhat);
  const Vec3 v = traj.d1(p.retarded_time());
  return -1.0 * cross(n, cross(n, v)) / (kFourPi * p.radius);
}

double classical_radiated_power(const DipoleTrajectory& traj, double radius, double t,
                                const SphericalGrid& grid) {
  check_radius(radius);
  const double x2 = radius * radius;
  return integrate_sphere(
      [&](const Vec3& n) {
        const auto f = radiation_source_fields(traj, {n, radius, t});
        return x2 * dot(n, cross(f.E, f.B));
      },
      grid);
}

}  // namespace dipolerad
