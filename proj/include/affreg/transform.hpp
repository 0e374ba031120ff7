#pragma once

#include <array>
#include <string>

#include <json.hpp>

#include "affreg/geometry.hpp"

namespace affreg {

// Six-parameter affine model: translation, rotation, uniform scale and
// two shears. The linear part composes as R(theta) * Shear(hx, hy) * Scale(s)
// about a caller-supplied center, followed by the translation. Rotation is
// counterclockwise in mathematical axes; with the y-down image convention
// a positive theta appears clockwise on screen.
struct Transform {
  double tx = 0.0;       // pixels
  double ty = 0.0;       // pixels
  double theta = 0.0;    // radians
  double scale = 1.0;    // uniform, > 0
  double shear_x = 0.0;
  double shear_y = 0.0;

  static Transform identity() { return {}; }
};

// Determinant of the linear part; equals scale^2 * (1 - shear_x * shear_y)
// under the composition order above.
double linear_det(const Transform& t);

// 2x3 matrix for p -> L * (p - center) + center + (tx, ty).
// Throws singular_transform_error when the linear part is degenerate.
AffineMatrix compose_matrix(const Transform& t, const Point& center);

// Inverse of compose_matrix(t, center) as a 2x3 matrix.
AffineMatrix invert(const Transform& t, const Point& center);

// Per-gene closed intervals the GA samples and clamps within.
struct Bounds {
  struct Interval {
    double lo = 0.0;
    double hi = 0.0;
  };

  Interval tx, ty, theta, scale, shear_x, shear_y;

  // tx, ty within a quarter of the frame, theta within +-45 degrees,
  // scale in [0.7, 1.4], shears in [-0.2, 0.2].
  static Bounds defaults(int width, int height);

  std::array<Interval, 6> as_array() const { return {tx, ty, theta, scale, shear_x, shear_y}; }

  void validate() const;  // throws config_error
  bool contains(const Transform& t) const;
  Transform clamp(const Transform& t) const;
};

nlohmann::json to_json(const Transform& t);
Transform transform_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Bounds& b);
Bounds bounds_from_json(const nlohmann::json& j, const Bounds& base);

}  // namespace affreg
