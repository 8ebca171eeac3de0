#pragma once

#include <cmath>

namespace rotnc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return s * a; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline Vec2& operator+=(Vec2& a, Vec2 b) { a.x += b.x; a.y += b.y; return a; }
inline Vec2& operator-=(Vec2& a, Vec2 b) { a.x -= b.x; a.y -= b.y; return a; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Quarter turn, the planar analogue of multiplication by i.
inline Vec2 rot90(Vec2 u) { return {-u.y, u.x}; }

/// Symplectic pairing <iu, v> = u_x v_y - u_y v_x.
inline double cross(Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; }

inline Vec2 normalized(Vec2 a) {
  double n = norm(a);
  return n > 0.0 ? a / n : Vec2{0.0, 0.0};
}

inline Vec2 from_polar(double r, double theta) {
  return {r * std::cos(theta), r * std::sin(theta)};
}

inline double angle_of(Vec2 a) { return std::atan2(a.y, a.x); }

inline Vec2 rotate(Vec2 a, double theta) {
  double c = std::cos(theta), s = std::sin(theta);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Reduce an angle to [0, 2*pi).
inline double wrap_angle(double theta) {
  double two_pi = 2.0 * M_PI;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  return t;
}

/// Reduce an angle to (-pi, pi].
inline double wrap_pi(double theta) {
  double t = wrap_angle(theta);
  if (t > M_PI) t -= 2.0 * M_PI;
  return t;
}

}  // namespace rotnc
