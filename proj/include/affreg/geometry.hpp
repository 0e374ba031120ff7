#pragma once

#include <cmath>

#include "affreg/errors.hpp"

namespace affreg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Row-major 2x3 affine matrix: maps (x, y) to (a*x + b*y + c, d*x + e*y + f).
struct AffineMatrix {
  double a = 1.0, b = 0.0, c = 0.0;
  double d = 0.0, e = 1.0, f = 0.0;

  Point apply(const Point& p) const {
    return {a * p.x + b * p.y + c, d * p.x + e * p.y + f};
  }

  double det() const { return a * e - b * d; }

  AffineMatrix inverted() const {
    const double dt = det();
    if (std::fabs(dt) < 1e-12) {
      throw singular_transform_error("affine matrix is singular (|det| < 1e-12)");
    }
    const double inv = 1.0 / dt;
    AffineMatrix m;
    m.a = e * inv;
    m.b = -b * inv;
    m.d = -d * inv;
    m.e = a * inv;
    m.c = -(m.a * c + m.b * f);
    m.f = -(m.d * c + m.e * f);
    return m;
  }
};

}  // namespace affreg
