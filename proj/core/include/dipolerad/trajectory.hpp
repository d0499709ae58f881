#pragma once
#include <string_view>
#include <vector>

#include "dipolerad/vec3.hpp"

namespace dipolerad {

/// Prescribed classical dipole trajectory d(t) with first and second
/// derivatives. The harmonic family d0 cos(omega t + phase) uses exact
/// closed-form derivatives; tabulated input is differentiated with
/// 4th-order finite differences on its uniform grid (one-sided stencils of
/// the same order at the edges) and queried by cubic interpolation.
class DipoleTrajectory {
 public:
  static DipoleTrajectory harmonic(const Vec3& d0, double omega, double phase = 0.0);
  static DipoleTrajectory tabulated(double dt, std::vector<Vec3> samples);

  /// {"type":"harmonic","d0":[3],"omega":r,"phase":r} or
  /// {"type":"tabulated","dt":r,"samples":[[3]...]}
  static DipoleTrajectory from_json_text(std::string_view text);

  Vec3 value(double t) const;
  Vec3 d1(double t) const;
  Vec3 d2(double t) const;

  bool is_harmonic() const { return kind_ == Kind::harmonic; }

 private:
  enum class Kind { harmonic, tabulated };
  DipoleTrajectory() = default;

  Vec3 interpolate(const std::vector<Vec3>& table, double t) const;

  Kind kind_ = Kind::harmonic;
  // harmonic
  Vec3 d0_{};
  double omega_ = 0.0;
  double phase_ = 0.0;
  // tabulated
  double dt_ = 0.0;
  std::vector<Vec3> samples_;
  std::vector<Vec3> deriv1_;
  std::vector<Vec3> deriv2_;
};

}  // namespace dipolerad
