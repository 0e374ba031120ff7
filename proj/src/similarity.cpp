#include "affreg/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>

#include "affreg/errors.hpp"
#include "affreg/threading.hpp"

namespace affreg {

namespace {

struct BestMatch {
  double d2 = std::numeric_limits<double>::infinity();
  std::size_t idx = 0;
  bool found = false;

  void offer(double d2_cand, std::size_t idx_cand) {
    if (!found || d2_cand < d2 || (d2_cand == d2 && idx_cand < idx)) {
      d2 = d2_cand;
      idx = idx_cand;
      found = true;
    }
  }
};

// Uniform bucket grid over Q used above kGridThreshold. Ring expansion
// stops once the ring's lower distance bound exceeds the best hit, which
// reproduces the flat scan's (distance, index) minimum exactly.
class PointGrid {
 public:
  explicit PointGrid(const std::vector<Point>& pts) : pts_(pts) {
    double min_x = pts[0].x, max_x = pts[0].x;
    double min_y = pts[0].y, max_y = pts[0].y;
    for (const Point& p : pts) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const double span = std::max(max_x - min_x, max_y - min_y);
    cell_ = std::max(1e-9, span / std::sqrt(static_cast<double>(pts.size())));
    ox_ = min_x;
    oy_ = min_y;
    nx_ = static_cast<int>((max_x - min_x) / cell_) + 1;
    ny_ = static_cast<int>((max_y - min_y) / cell_) + 1;
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cells_[cell_index(cell_x(pts[i].x), cell_y(pts[i].y))].push_back(i);
    }
  }

  BestMatch nearest_unassigned(const Point& p, const std::vector<std::uint8_t>& assigned) const {
    BestMatch best;
    const int cx = static_cast<int>(std::floor((p.x - ox_) / cell_));
    const int cy = static_cast<int>(std::floor((p.y - oy_) / cell_));
    const int max_ring = std::max(nx_, ny_) + std::max({std::abs(cx), std::abs(cy), 1});
    for (int r = 0; r <= max_ring; ++r) {
      if (best.found) {
        const double bound = (r - 1) * cell_;
        if (bound > 0.0 && bound * bound > best.d2) break;
      }
      scan_ring(p, cx, cy, r, assigned, best);
    }
    return best;
  }

 private:
  int cell_x(double x) const { return std::clamp(static_cast<int>((x - ox_) / cell_), 0, nx_ - 1); }
  int cell_y(double y) const { return std::clamp(static_cast<int>((y - oy_) / cell_), 0, ny_ - 1); }
  std::size_t cell_index(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * nx_ + cx;
  }

  void scan_cell(const Point& p, int cx, int cy, const std::vector<std::uint8_t>& assigned,
                 BestMatch& best) const {
    if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) return;
    for (std::size_t idx : cells_[cell_index(cx, cy)]) {
      if (assigned[idx]) continue;
      best.offer(squared_distance(p, pts_[idx]), idx);
    }
  }

  void scan_ring(const Point& p, int cx, int cy, int r,
                 const std::vector<std::uint8_t>& assigned, BestMatch& best) const {
    if (r == 0) {
      scan_cell(p, cx, cy, assigned, best);
      return;
    }
    for (int i = -r; i <= r; ++i) {
      scan_cell(p, cx + i, cy - r, assigned, best);
      scan_cell(p, cx + i, cy + r, assigned, best);
    }
    for (int j = -r + 1; j <= r - 1; ++j) {
      scan_cell(p, cx - r, cy + j, assigned, best);
      scan_cell(p, cx + r, cy + j, assigned, best);
    }
  }

  const std::vector<Point>& pts_;
  double cell_ = 1.0;
  double ox_ = 0.0, oy_ = 0.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace

CorrespondenceResult correspondences(const PointSet& p_warped, const PointSet& q) {
  if (p_warped.empty() || q.empty()) {
    throw empty_point_set_error("correspondences: empty point set");
  }

  CorrespondenceResult result;
  result.matches.reserve(p_warped.size());
  std::vector<std::uint8_t> assigned(q.size(), 0);
  std::size_t remaining = q.size();

  const bool use_grid = q.size() >= kGridThreshold;
  std::unique_ptr<PointGrid> grid;
  if (use_grid) grid = std::make_unique<PointGrid>(q.points);

  for (std::size_t pi = 0; pi < p_warped.size(); ++pi) {
    if (remaining == 0) {
      result.unmatched_p.push_back(pi);
      continue;
    }
    const Point& p = p_warped.points[pi];
    BestMatch best;
    if (use_grid) {
      best = grid->nearest_unassigned(p, assigned);
    } else {
      for (std::size_t qi = 0; qi < q.size(); ++qi) {
        if (assigned[qi]) continue;
        best.offer(squared_distance(p, q.points[qi]), qi);
      }
    }
    assigned[best.idx] = 1;
    --remaining;
    result.matches.push_back({pi, best.idx, std::sqrt(best.d2)});
  }
  return result;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw empty_point_set_error("median of empty list");
  const std::size_t n = values.size();
  const std::size_t hi = n / 2;
  std::nth_element(values.begin(), values.begin() + hi, values.end());
  const double upper = values[hi];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + hi);
  return 0.5 * (lower + upper);
}

double median_distance(const PointSet& p, const PointSet& q, const Transform& t,
                       const Point& center) {
  if (p.size() < 3 || q.size() < 3) {
    throw empty_point_set_error("median_distance: needs at least 3 points per set");
  }
  const PointSet warped = apply(t, p, center);
  const CorrespondenceResult corr = correspondences(warped, q);
  std::vector<double> dists;
  dists.reserve(corr.matches.size());
  for (const Correspondence& c : corr.matches) dists.push_back(c.distance);
  return median_of(std::move(dists));
}

namespace {

struct RowSums {
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
};

struct RowCentered {
  double saa = 0.0, sbb = 0.0, sab = 0.0;
};

inline RowSums row_sums(const double* a, const double* b, const std::uint8_t* m, int w) {
  RowSums s;
  for (int x = 0; x < w; ++x) {
    if (m[x]) {
      s.sa += a[x];
      s.sb += b[x];
      ++s.n;
    }
  }
  return s;
}

inline RowCentered row_centered(const double* a, const double* b, const std::uint8_t* m, int w,
                                double mean_a, double mean_b) {
  RowCentered s;
  for (int x = 0; x < w; ++x) {
    if (m[x]) {
      const double da = a[x] - mean_a;
      const double db = b[x] - mean_b;
      s.saa += da * da;
      s.sbb += db * db;
      s.sab += da * db;
    }
  }
  return s;
}

}  // namespace

double ncc_serial(const Image& reference, const MaskedImage& warped, double min_overlap_frac) {
  if (!reference.same_size(warped.image)) {
    throw error("ncc: image dimensions differ");
  }
  const int w = reference.width();
  const int h = reference.height();

  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < h; ++y) {
    const RowSums s = row_sums(reference.row(y), warped.image.row(y),
                               warped.mask.data() + static_cast<std::size_t>(y) * w, w);
    sa += s.sa;
    sb += s.sb;
    n += s.n;
  }

  const double frac = static_cast<double>(n) / static_cast<double>(reference.size());
  if (n == 0 || frac < min_overlap_frac) {
    throw insufficient_overlap_error("ncc: overlap fraction " + std::to_string(frac) +
                                     " below minimum " + std::to_string(min_overlap_frac));
  }
  const double mean_a = sa / static_cast<double>(n);
  const double mean_b = sb / static_cast<double>(n);

  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (int y = 0; y < h; ++y) {
    const RowCentered s =
        row_centered(reference.row(y), warped.image.row(y),
                     warped.mask.data() + static_cast<std::size_t>(y) * w, w, mean_a, mean_b);
    saa += s.saa;
    sbb += s.sbb;
    sab += s.sab;
  }

  if (saa == 0.0 || sbb == 0.0) {
    throw degenerate_signal_error("ncc: zero variance over the overlap");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ncc_omp(const Image& reference, const MaskedImage& warped, double min_overlap_frac) {
  if (!reference.same_size(warped.image)) {
    throw error("ncc: image dimensions differ");
  }
  const int w = reference.width();
  const int h = reference.height();

  std::vector<RowSums> rows1(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int y = 0; y < h; ++y) {
    rows1[static_cast<std::size_t>(y)] =
        row_sums(reference.row(y), warped.image.row(y),
                 warped.mask.data() + static_cast<std::size_t>(y) * w, w);
  }
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (const RowSums& s : rows1) {
    sa += s.sa;
    sb += s.sb;
    n += s.n;
  }

  const double frac = static_cast<double>(n) / static_cast<double>(reference.size());
  if (n == 0 || frac < min_overlap_frac) {
    throw insufficient_overlap_error("ncc: overlap fraction " + std::to_string(frac) +
                                     " below minimum " + std::to_string(min_overlap_frac));
  }
  const double mean_a = sa / static_cast<double>(n);
  const double mean_b = sb / static_cast<double>(n);

  std::vector<RowCentered> rows2(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int y = 0; y < h; ++y) {
    rows2[static_cast<std::size_t>(y)] =
        row_centered(reference.row(y), warped.image.row(y),
                     warped.mask.data() + static_cast<std::size_t>(y) * w, w, mean_a, mean_b);
  }
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (const RowCentered& s : rows2) {
    saa += s.saa;
    sbb += s.sbb;
    sab += s.sab;
  }

  if (saa == 0.0 || sbb == 0.0) {
    throw degenerate_signal_error("ncc: zero variance over the overlap");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ncc(const Image& reference, const MaskedImage& warped, double min_overlap_frac) {
  if (max_threads() > 1) return ncc_omp(reference, warped, min_overlap_frac);
  return ncc_serial(reference, warped, min_overlap_frac);
}

double rmse(const PointSet& ref_pts, const PointSet& sensed_pts, const Transform& t,
            const Point& center) {
  if (ref_pts.size() != sensed_pts.size() || ref_pts.empty()) {
    throw control_point_mismatch_error(
        "rmse: control point sets must be non-empty and index-paired (" +
        std::to_string(ref_pts.size()) + " vs " + std::to_string(sensed_pts.size()) + ")");
  }
  const AffineMatrix m = compose_matrix(t, center);
  double sum = 0.0;
  for (std::size_t i = 0; i < ref_pts.size(); ++i) {
    sum += squared_distance(m.apply(sensed_pts.points[i]), ref_pts.points[i]);
  }
  return std::sqrt(sum / static_cast<double>(ref_pts.size()));
}

}  // namespace affreg
