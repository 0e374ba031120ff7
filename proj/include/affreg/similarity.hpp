#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "affreg/image.hpp"
#include "affreg/points.hpp"

namespace affreg {

// The two objectives: median correspondence distance (minimized) and
// normalized cross correlation over the overlap (maximized). `valid` is
// false when an overlap or feature guard failed; invalid vectors lose to
// every valid one.
struct FitnessVector {
  double median_dist = std::numeric_limits<double>::infinity();
  double ncc = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

// Phase-1 ordering: valid beats invalid, then lower median distance.
inline bool phase1_better(const FitnessVector& a, const FitnessVector& b) {
  if (a.valid != b.valid) return a.valid;
  return a.median_dist < b.median_dist;
}

struct Correspondence {
  std::size_t p_index;
  std::size_t q_index;
  double distance;
};

struct CorrespondenceResult {
  std::vector<Correspondence> matches;      // one per matched p, in p order
  std::vector<std::size_t> unmatched_p;     // surplus p when |P| > |Q|
};

// Greedy in-list-order matching: each p in turn claims its nearest
// still-unassigned member of Q. Below kGridThreshold points a flat scan is
// used; above it a uniform grid index with identical tie-breaking
// (smallest distance, then smallest Q index) returns bit-identical results.
CorrespondenceResult correspondences(const PointSet& p_warped, const PointSet& q);

inline constexpr std::size_t kGridThreshold = 500;

// Warps P by t about `center`, matches against Q, and returns the median
// matched distance (even count: mean of the two middle values).
double median_distance(const PointSet& p, const PointSet& q, const Transform& t,
                       const Point& center);

// Median with the usual even-count convention; copies its input.
double median_of(std::vector<double> values);

inline constexpr double kDefaultMinOverlapFrac = 0.25;

// Normalized cross correlation over the mask-true pixels only; means are
// taken over the same overlap. Throws insufficient_overlap_error when the
// overlap fraction is below min_overlap_frac and degenerate_signal_error
// when either signal has zero variance there.
double ncc(const Image& reference, const MaskedImage& warped,
           double min_overlap_frac = kDefaultMinOverlapFrac);

// Serial reference and OpenMP variant; both reduce row partial sums in row
// order, so results are bit-identical for any thread count.
double ncc_serial(const Image& reference, const MaskedImage& warped, double min_overlap_frac);
double ncc_omp(const Image& reference, const MaskedImage& warped, double min_overlap_frac);

// Root mean square of || t(sensed_i) - ref_i || over index-paired control
// points.
double rmse(const PointSet& ref_pts, const PointSet& sensed_pts, const Transform& t,
            const Point& center);

}  // namespace affreg
