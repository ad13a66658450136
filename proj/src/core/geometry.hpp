#pragma once

#include <cmath>

namespace llab {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& u, const Vec3& v) { return u.x * v.x + u.y * v.y + u.z * v.z; }

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// All detector settings are directions in a fixed analysis plane (here x-z),
// so the dot product of two setting directions is cos(a - b).
inline Vec3 setting_direction(double angle) { return {std::cos(angle), 0.0, std::sin(angle)}; }

// Reduce a setting difference b - a to the equivalent separation in [0, pi].
inline double fold_angle_difference(double x) {
  double y = std::fmod(std::fabs(x), 2.0 * kPi);
  return y > kPi ? 2.0 * kPi - y : y;
}

inline double degrees_to_radians(double deg) { return deg * (kPi / 180.0); }
inline double radians_to_degrees(double rad) { return rad * (180.0 / kPi); }

}  // namespace llab
