#pragma once

// Deliberately naive reference implementations used only by tests. Each one
// restates its contract from scratch (flat loops, hand-built matrices) so a
// bug in the library cannot hide in a shared helper.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "affreg/image.hpp"
#include "affreg/points.hpp"
#include "affreg/similarity.hpp"
#include "affreg/transform.hpp"

namespace affreg::oracle {

struct Match {
  std::size_t p_index;
  std::size_t q_index;
  double distance;
};

// Greedy in-list-order assignment by a flat O(|P|*|Q|) scan. Ties on
// distance go to the smallest Q index.
inline std::vector<Match> correspondences(const std::vector<Point>& p,
                                          const std::vector<Point>& q) {
  std::vector<bool> taken(q.size(), false);
  std::vector<Match> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::size_t best = q.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (taken[j]) continue;
      const double dx = p[i].x - q[j].x;
      const double dy = p[i].y - q[j].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == q.size()) break;  // Q exhausted; surplus p stay unmatched
    taken[best] = true;
    out.push_back({i, best, best_d});
  }
  return out;
}

// 2x3 affine built longhand: rotate(theta) * shear(hx, hy) * scale(s)
// about `center`, then translate by (tx, ty). Row-major {a b c; d e f}.
struct Mat23 {
  double a, b, c, d, e, f;
  Point map(const Point& p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }
};

inline Mat23 compose(const Transform& t, const Point& center) {
  const double ct = std::cos(t.theta);
  const double st = std::sin(t.theta);
  // shear * scale
  const double m00 = t.scale, m01 = t.scale * t.shear_x;
  const double m10 = t.scale * t.shear_y, m11 = t.scale;
  // rotation * (shear * scale)
  const double a = ct * m00 - st * m10;
  const double b = ct * m01 - st * m11;
  const double d = st * m00 + ct * m10;
  const double e = st * m01 + ct * m11;
  Mat23 m{a, b, 0.0, d, e, 0.0};
  m.c = center.x + t.tx - (a * center.x + b * center.y);
  m.f = center.y + t.ty - (d * center.x + e * center.y);
  return m;
}

inline Mat23 invert(const Mat23& m) {
  const double det = m.a * m.e - m.b * m.d;
  Mat23 r{};
  r.a = m.e / det;
  r.b = -m.b / det;
  r.d = -m.d / det;
  r.e = m.a / det;
  r.c = -(r.a * m.c + r.b * m.f);
  r.f = -(r.d * m.c + r.e * m.f);
  return r;
}

inline double median_distance(const std::vector<Point>& p, const std::vector<Point>& q,
                              const Transform& t, const Point& center) {
  const Mat23 m = compose(t, center);
  std::vector<Point> warped;
  warped.reserve(p.size());
  for (const Point& pt : p) warped.push_back(m.map(pt));
  std::vector<double> dists;
  for (const Match& match : correspondences(warped, q)) dists.push_back(match.distance);
  std::sort(dists.begin(), dists.end());
  const std::size_t n = dists.size();
  if (n % 2 == 1) return dists[n / 2];
  return 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

// O(n^2) front assignment by repeated peeling; the dominance rule is
// restated here rather than calling the library.
inline bool dominates(const FitnessVector& a, const FitnessVector& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  const bool no_worse = a.median_dist <= b.median_dist && a.ncc >= b.ncc;
  const bool strictly = a.median_dist < b.median_dist || a.ncc > b.ncc;
  return no_worse && strictly;
}

inline std::vector<int> fronts(const std::vector<FitnessVector>& fv) {
  const std::size_t n = fv.size();
  std::vector<int> front(n, -1);
  int level = 0;
  std::size_t assigned = 0;
  while (assigned < n) {
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
      if (front[i] != -1) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < n && !dominated; ++j) {
        if (i != j && front[j] == -1 && oracle::dominates(fv[j], fv[i])) dominated = true;
      }
      if (!dominated) current.push_back(i);
    }
    for (std::size_t i : current) front[i] = level;
    assigned += current.size();
    ++level;
  }
  return front;
}

// Scalar-loop warp: for each output pixel, map through the hand-inverted
// matrix and interpolate bilinearly from the four neighbors.
inline MaskedImage warp(const Image& sensed, const Transform& t, const Point& center,
                        int out_w, int out_h) {
  const Mat23 inv = invert(compose(t, center));
  MaskedImage out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Point s = inv.map({static_cast<double>(x), static_cast<double>(y)});
      const std::size_t idx = static_cast<std::size_t>(y) * out_w + x;
      if (!(s.x >= 0.0 && s.x <= sensed.width() - 1 && s.y >= 0.0 &&
            s.y <= sensed.height() - 1)) {
        out.image.at(x, y) = 0.0;
        out.mask[idx] = 0;
        continue;
      }
      int x0 = static_cast<int>(std::floor(s.x));
      int y0 = static_cast<int>(std::floor(s.y));
      if (x0 > sensed.width() - 2) x0 = sensed.width() - 2;
      if (y0 > sensed.height() - 2) y0 = sensed.height() - 2;
      const double fx = s.x - x0;
      const double fy = s.y - y0;
      const double v00 = sensed.at(x0, y0), v10 = sensed.at(x0 + 1, y0);
      const double v01 = sensed.at(x0, y0 + 1), v11 = sensed.at(x0 + 1, y0 + 1);
      out.image.at(x, y) =
          (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
      out.mask[idx] = 1;
    }
  }
  return out;
}

// Direct two-pass NCC over mask-true pixels; no incremental tricks.
inline std::optional<double> ncc(const Image& a, const MaskedImage& b) {
  double sum_a = 0.0, sum_b = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * a.width() + x;
      if (!b.mask[idx]) continue;
      sum_a += a.at(x, y);
      sum_b += b.image.at(x, y);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  const double mean_a = sum_a / n;
  const double mean_b = sum_b / n;
  double num = 0.0, var_a = 0.0, var_b = 0.0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * a.width() + x;
      if (!b.mask[idx]) continue;
      const double da = a.at(x, y) - mean_a;
      const double db = b.image.at(x, y) - mean_b;
      num += da * db;
      var_a += da * da;
      var_b += db * db;
    }
  }
  if (var_a <= 0.0 || var_b <= 0.0) return std::nullopt;
  return num / std::sqrt(var_a * var_b);
}

inline double rmse(const std::vector<Point>& ref, const std::vector<Point>& sensed,
                   const Transform& t, const Point& center) {
  const Mat23 m = compose(t, center);
  double sum = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const Point w = m.map(sensed[i]);
    const double dx = w.x - ref[i].x;
    const double dy = w.y - ref[i].y;
    sum += dx * dx + dy * dy;
  }
  return std::sqrt(sum / ref.size());
}

}  // namespace affreg::oracle
