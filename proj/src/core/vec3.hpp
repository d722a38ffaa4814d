/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace jloc::geom {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  Vec3& operator*=(double s) {
    x *= s; y *= s; z *= s;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return n > 0.0 ? v / n : Vec3{0.0, 0.0, 0.0};
}
inline Vec3 min3(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max3(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

// Deterministic orthonormal basis perpendicular to a unit vector: picks the
// world axis least aligned with u.
inline void perpendicular_basis(const Vec3& u, Vec3& v, Vec3& w) {
  const double ax = std::fabs(u.x), ay = std::fabs(u.y), az = std::fabs(u.z);
  Vec3 axis = (ax <= ay && ax <= az) ? Vec3{1, 0, 0} : (ay <= az ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  v = normalized(cross(u, axis));
  w = cross(u, v);
}

struct Mat3 {
  // Row-major.
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
        r.m[i * 3 + j] = s;
      }
    }
    return r;
  }

  static Mat3 rotation_x(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return Mat3{{1, 0, 0, 0, c, -s, 0, s, c}};
  }
  static Mat3 rotation_y(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
  }
  static Mat3 rotation_z(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return Mat3{{c, -s, 0, s, c, 0, 0, 0, 1}};
  }
  // Intrinsic XYZ Euler angles.
  static Mat3 euler_xyz(double rx, double ry, double rz) {
    return rotation_x(rx) * rotation_y(ry) * rotation_z(rz);
  }
};

// Rigid/affine transform p -> R*p + t.
struct Affine3 {
  Mat3 rot;
  Vec3 trans;

  static Affine3 identity() { return {Mat3::identity(), {0, 0, 0}}; }
  // Rotation about a pivot point.
  static Affine3 about_point(const Mat3& r, const Vec3& pivot) {
    return {r, pivot - r * pivot};
  }

  Vec3 operator*(const Vec3& p) const { return rot * p + trans; }
  Affine3 operator*(const Affine3& o) const { return {rot * o.rot, rot * o.trans + trans}; }
  bool is_identity(double tol = 0.0) const {
    const Mat3 id;
    for (int i = 0; i < 9; ++i) {
      if (std::fabs(rot.m[i] - id.m[i]) > tol) return false;
    }
    return std::fabs(trans.x) <= tol && std::fabs(trans.y) <= tol && std::fabs(trans.z) <= tol;
  }
};

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void expand(const Vec3& p) {
    lo = min3(lo, p);
    hi = max3(hi, p);
  }
  void expand(const Aabb& b) {
    lo = min3(lo, b.lo);
    hi = max3(hi, b.hi);
  }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return norm(extent()); }
  bool contains(const Vec3& p, double tol = 0.0) const {
    return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol &&
           p.z >= lo.z - tol && p.z <= hi.z + tol;
  }
  bool valid() const { return lo.x <= hi.x; }
};

}  // namespace jloc::geom
