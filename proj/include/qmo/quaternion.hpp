#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "qmo/errors.hpp"

namespace qmo {

/// A quaternion scalar w + x i + y j + z k over doubles.
///
/// Multiplication follows i^2 = j^2 = k^2 = ijk = -1, so it is
/// noncommutative; everything else is plain componentwise arithmetic.
struct Quaternion {
  double w = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double w_, double x_, double y_, double z_)
      : w(w_), x(x_), y(y_), z(z_) {}
  constexpr explicit Quaternion(double real) : w(real) {}

  static constexpr Quaternion zero() { return {}; }
  static constexpr Quaternion one() { return Quaternion(1.0); }
  static constexpr Quaternion i() { return {0, 1, 0, 0}; }
  static constexpr Quaternion j() { return {0, 0, 1, 0}; }
  static constexpr Quaternion k() { return {0, 0, 0, 1}; }

  constexpr double component(int idx) const {
    return idx == 0 ? w : idx == 1 ? x : idx == 2 ? y : z;
  }

  constexpr Quaternion operator+(const Quaternion& o) const {
    return {w + o.w, x + o.x, y + o.y, z + o.z};
  }
  constexpr Quaternion operator-(const Quaternion& o) const {
    return {w - o.w, x - o.x, y - o.y, z - o.z};
  }
  constexpr Quaternion operator-() const { return {-w, -x, -y, -z}; }

  constexpr Quaternion operator*(const Quaternion& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  constexpr Quaternion operator*(double s) const {
    return {w * s, x * s, y * s, z * s};
  }
  friend constexpr Quaternion operator*(double s, const Quaternion& q) {
    return q * s;  // real scalars commute with quaternions
  }
  constexpr Quaternion operator/(double s) const {
    return {w / s, x / s, y / s, z / s};
  }

  Quaternion& operator+=(const Quaternion& o) { return *this = *this + o; }
  Quaternion& operator-=(const Quaternion& o) { return *this = *this - o; }
  Quaternion& operator*=(const Quaternion& o) { return *this = *this * o; }
  Quaternion& operator*=(double s) { return *this = *this * s; }

  constexpr bool operator==(const Quaternion& o) const = default;
};

constexpr Quaternion conj(const Quaternion& q) {
  return {q.w, -q.x, -q.y, -q.z};
}

inline double norm_sq(const Quaternion& q) {
  return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}

/// Modulus |q| = sqrt(w^2 + x^2 + y^2 + z^2).
inline double modulus(const Quaternion& q) { return std::sqrt(norm_sq(q)); }

inline bool is_finite(const Quaternion& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) &&
         std::isfinite(q.z);
}

/// q^{-1} = q^* / |q|^2. Throws DivisionByZero when |q| <= 1e-14.
inline Quaternion inverse(const Quaternion& q) {
  const double n2 = norm_sq(q);
  if (std::sqrt(n2) <= 1e-14) {
    throw DivisionByZero("quaternion inverse of (near-)zero value");
  }
  return conj(q) / n2;
}

/// Diagnostic rendering "a+bi+cj+dk".
inline std::string to_string(const Quaternion& q) {
  std::ostringstream os;
  os << q.w;
  const std::array<std::pair<double, char>, 3> parts{
      {{q.x, 'i'}, {q.y, 'j'}, {q.z, 'k'}}};
  for (const auto& [v, unit] : parts) {
    os << (std::signbit(v) ? "-" : "+") << std::abs(v) << unit;
  }
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
  return os << to_string(q);
}

}  // namespace qmo
