#include "affreg/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace affreg {

double linear_det(const Transform& t) {
  return t.scale * t.scale * (1.0 - t.shear_x * t.shear_y);
}

AffineMatrix compose_matrix(const Transform& t, const Point& center) {
  // L = R(theta) * Shear(hx, hy) * Scale(s)
  const double c = std::cos(t.theta);
  const double sn = std::sin(t.theta);
  const double s = t.scale;
  const double l00 = s * (c - sn * t.shear_y);
  const double l01 = s * (c * t.shear_x - sn);
  const double l10 = s * (sn + c * t.shear_y);
  const double l11 = s * (sn * t.shear_x + c);

  if (std::fabs(l00 * l11 - l01 * l10) < 1e-12) {
    throw singular_transform_error("transform has a singular linear part");
  }

  AffineMatrix m;
  m.a = l00;
  m.b = l01;
  m.d = l10;
  m.e = l11;
  m.c = center.x + t.tx - (l00 * center.x + l01 * center.y);
  m.f = center.y + t.ty - (l10 * center.x + l11 * center.y);
  return m;
}

AffineMatrix invert(const Transform& t, const Point& center) {
  return compose_matrix(t, center).inverted();
}

Bounds Bounds::defaults(int width, int height) {
  Bounds b;
  b.tx = {-0.25 * width, 0.25 * width};
  b.ty = {-0.25 * height, 0.25 * height};
  b.theta = {-std::numbers::pi / 4.0, std::numbers::pi / 4.0};
  b.scale = {0.7, 1.4};
  b.shear_x = {-0.2, 0.2};
  b.shear_y = {-0.2, 0.2};
  return b;
}

void Bounds::validate() const {
  for (const auto& iv : as_array()) {
    if (!(iv.lo <= iv.hi)) throw config_error("bounds interval has lo > hi");
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw config_error("bounds interval is not finite");
    }
  }
  if (scale.lo <= 0.0) throw config_error("scale bounds must be strictly positive");
}

bool Bounds::contains(const Transform& t) const {
  const std::array<double, 6> v = {t.tx, t.ty, t.theta, t.scale, t.shear_x, t.shear_y};
  const auto ivs = as_array();
  for (std::size_t i = 0; i < 6; ++i) {
    if (v[i] < ivs[i].lo || v[i] > ivs[i].hi) return false;
  }
  return true;
}

Transform Bounds::clamp(const Transform& t) const {
  Transform r = t;
  r.tx = std::clamp(r.tx, tx.lo, tx.hi);
  r.ty = std::clamp(r.ty, ty.lo, ty.hi);
  r.theta = std::clamp(r.theta, theta.lo, theta.hi);
  r.scale = std::clamp(r.scale, scale.lo, scale.hi);
  r.shear_x = std::clamp(r.shear_x, shear_x.lo, shear_x.hi);
  r.shear_y = std::clamp(r.shear_y, shear_y.lo, shear_y.hi);
  return r;
}

nlohmann::json to_json(const Transform& t) {
  return nlohmann::json{{"tx", t.tx},       {"ty", t.ty},
                        {"theta", t.theta}, {"scale", t.scale},
                        {"shear_x", t.shear_x}, {"shear_y", t.shear_y}};
}

Transform transform_from_json(const nlohmann::json& j) {
  Transform t;
  try {
    t.tx = j.at("tx").get<double>();
    t.ty = j.at("ty").get<double>();
    t.theta = j.at("theta").get<double>();
    t.scale = j.at("scale").get<double>();
    t.shear_x = j.at("shear_x").get<double>();
    t.shear_y = j.at("shear_y").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad transform JSON: ") + e.what());
  }
  if (!(t.scale > 0.0)) throw config_error("transform scale must be > 0");
  return t;
}

nlohmann::json to_json(const Bounds& b) {
  auto iv = [](const Bounds::Interval& i) { return nlohmann::json::array({i.lo, i.hi}); };
  return nlohmann::json{{"tx", iv(b.tx)},           {"ty", iv(b.ty)},
                        {"theta", iv(b.theta)},     {"scale", iv(b.scale)},
                        {"shear_x", iv(b.shear_x)}, {"shear_y", iv(b.shear_y)}};
}

Bounds bounds_from_json(const nlohmann::json& j, const Bounds& base) {
  Bounds b = base;
  auto read = [&j](const char* key, Bounds::Interval& iv) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) {
      throw config_error(std::string("bounds key '") + key + "' must be [lo, hi]");
    }
    iv.lo = a[0].get<double>();
    iv.hi = a[1].get<double>();
  };
  read("tx", b.tx);
  read("ty", b.ty);
  read("theta", b.theta);
  read("scale", b.scale);
  read("shear_x", b.shear_x);
  read("shear_y", b.shear_y);
  b.validate();
  return b;
}

}  // namespace affreg
