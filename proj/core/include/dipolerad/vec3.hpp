#pragma once
#include <cmath>
#include <complex>

namespace dipolerad {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }

/// Complex-valued 3-vector (dipole matrix elements are complex in general).
struct CVec3 {
  std::complex<double> x{0.0, 0.0}, y{0.0, 0.0}, z{0.0, 0.0};

  CVec3() = default;
  CVec3(std::complex<double> px, std::complex<double> py, std::complex<double> pz)
      : x(px), y(py), z(pz) {}
  explicit CVec3(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

  CVec3 operator+(const CVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  CVec3 operator-(const CVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  CVec3 operator*(std::complex<double> s) const { return {x * s, y * s, z * s}; }
  CVec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

inline CVec3 conj(const CVec3& v) { return {std::conj(v.x), std::conj(v.y), std::conj(v.z)}; }

/// Unconjugated contraction of a real direction with a complex vector.
inline std::complex<double> dot(const Vec3& a, const CVec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm2(const CVec3& v) {
  return std::norm(v.x) + std::norm(v.y) + std::norm(v.z);
}
inline double norm(const CVec3& v) { return std::sqrt(norm2(v)); }

}  // namespace dipolerad
