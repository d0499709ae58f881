#pragma once
#include "dipolerad/geometry.hpp"
#include "dipolerad/trajectory.hpp"
#include "dipolerad/vec3.hpp"

namespace dipolerad {

/// Observation point: direction, radius and lab time; the source influences
/// it at the retarded time t_r = t - x (c = 1).
struct FieldPoint {
  Vec3 xhat;
  double radius = 1.0;
  double t = 0.0;
  double retarded_time() const { return t - radius; }
};

/// Retarded electric source field split by radial falloff:
///   near         {3 xhat (xhat.d) - d} / (4 pi x^3)
///   intermediate {3 xhat (xhat.d') - d'} / (4 pi x^2)
///   far          xhat x (xhat x d'') / (4 pi x)
/// all evaluated at the retarded time. total() is their exact sum.
struct ZoneFields {
  Vec3 near, intermediate, far;
  Vec3 total() const { return near + intermediate + far; }
};

ZoneFields electric_source_field(const DipoleTrajectory& traj, const FieldPoint& p);

struct RadiationFields {
  Vec3 E;  // equals the far zone field exactly
  Vec3 B;  // xhat x E = -xhat x d''(t_r) / (4 pi x)
};

RadiationFields radiation_source_fields(const DipoleTrajectory& traj, const FieldPoint& p);

/// Radiation vector potential -xhat x (xhat x d'(t_r)) / (4 pi x); its
/// negative time derivative reproduces the radiation electric field.
Vec3 radiation_source_potential(const DipoleTrajectory& traj, const FieldPoint& p);

/// Instantaneous radiated power through the sphere of given radius:
/// int dOmega x^2 xhat . (E_rad x B_rad).
double classical_radiated_power(const DipoleTrajectory& traj, double radius, double t,
                                const SphericalGrid& grid);

}  // namespace dipolerad
