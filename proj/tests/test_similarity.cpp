#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "affreg/errors.hpp"
#include "affreg/image.hpp"
#include "affreg/similarity.hpp"
#include "affreg/threading.hpp"
#include "affreg/transform.hpp"
#include "affreg/warp.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace affreg;

namespace {

PointSet make_set(std::vector<Point> pts) {
  PointSet ps;
  ps.points = std::move(pts);
  return ps;
}

MaskedImage full_mask(const Image& img) {
  MaskedImage m(img.width(), img.height());
  m.image = img;
  std::fill(m.mask.begin(), m.mask.end(), std::uint8_t{1});
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("similarity");

TEST_CASE("correspondences: unambiguous nearest neighbors match at distance 1") {
  const PointSet p = make_set({{0, 0}, {10, 0}});
  const PointSet q = make_set({{0, 1}, {10, 1}, {50, 50}});
  const CorrespondenceResult r = correspondences(p, q);
  REQUIRE(r.matches.size() == 2);
  CHECK(r.matches[0].distance == doctest::Approx(1.0));
  CHECK(r.matches[1].distance == doctest::Approx(1.0));
  CHECK(r.matches[0].q_index == 0);
  CHECK(r.matches[1].q_index == 1);
  CHECK(r.unmatched_p.empty());
}

TEST_CASE("correspondences: assignment removes claimed points from the pool") {
  const PointSet p = make_set({{0, 0}, {0.5, 0}});
  const PointSet q = make_set({{0, 0}, {100, 0}});
  const CorrespondenceResult r = correspondences(p, q);
  REQUIRE(r.matches.size() == 2);
  CHECK(r.matches[0].q_index == 0);
  CHECK(r.matches[0].distance == doctest::Approx(0.0));
  CHECK(r.matches[1].q_index == 1);
  CHECK(r.matches[1].distance == doctest::Approx(99.5));
}

TEST_CASE("correspondences: identical sets match at zero distance") {
  Rng rng(41);
  const PointSet p = test::random_points(25, rng, 0.0, 100.0);
  const CorrespondenceResult r = correspondences(p, p);
  REQUIRE(r.matches.size() == 25);
  for (const Correspondence& c : r.matches) CHECK(c.distance == 0.0);
}

TEST_CASE("correspondences: surplus P beyond |Q| is reported unmatched") {
  const PointSet p = make_set({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  const PointSet q = make_set({{0, 0}, {1, 0}});
  const CorrespondenceResult r = correspondences(p, q);
  CHECK(r.matches.size() == 2);
  REQUIRE(r.unmatched_p.size() == 2);
  CHECK(r.unmatched_p[0] == 2);
  CHECK(r.unmatched_p[1] == 3);
}

TEST_CASE("correspondences: empty inputs raise empty-set errors") {
  const PointSet p = make_set({{0, 0}});
  const PointSet empty;
  CHECK_THROWS_AS(correspondences(empty, p), empty_point_set_error);
  CHECK_THROWS_AS(correspondences(p, empty), empty_point_set_error);
}

TEST_CASE("correspondences never assigns the same Q member twice") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const PointSet p = test::random_points(40, rng, 0.0, 60.0);
    const PointSet q = test::random_points(30, rng, 0.0, 60.0);
    const CorrespondenceResult r = correspondences(p, q);
    std::set<std::size_t> seen;
    for (const Correspondence& c : r.matches) {
      CHECK(seen.insert(c.q_index).second);  // multiset check: no duplicates
    }
  }
}

TEST_CASE("correspondences agree with the flat oracle across the grid threshold") {
  Rng rng(43);
  for (const std::size_t n : {20UL, 499UL, 501UL, 800UL}) {
    const PointSet p = test::random_points(n, rng, 0.0, 300.0);
    const PointSet q = test::random_points(n + 10, rng, 0.0, 300.0);
    const CorrespondenceResult lib = correspondences(p, q);
    const auto ref = oracle::correspondences(p.points, q.points);
    REQUIRE(lib.matches.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(lib.matches[i].p_index == ref[i].p_index);
      CHECK(lib.matches[i].q_index == ref[i].q_index);
      CHECK(lib.matches[i].distance == ref[i].distance);  // bit-identical
    }
  }
}

TEST_CASE("median_of: odd and even counts") {
  CHECK(median_of({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median_of({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
  CHECK(median_of({7.0}) == 7.0);
  CHECK_THROWS_AS(median_of({}), empty_point_set_error);
}

TEST_CASE("median_distance: identical sets under identity give 0") {
  Rng rng(44);
  const PointSet p = test::random_points(12, rng, 0.0, 50.0);
  CHECK(median_distance(p, p, Transform::identity(), {25.0, 25.0}) == 0.0);
}

TEST_CASE("median_distance: exact inverse translation gives 0") {
  Rng rng(45);
  const PointSet ref = test::random_points(9, rng, 10.0, 90.0);
  PointSet sensed;
  for (const Point& pt : ref.points) sensed.points.push_back({pt.x + 3.0, pt.y + 4.0});
  Transform t;
  t.tx = -3.0;
  t.ty = -4.0;
  // Warping the displaced points back lands exactly on the originals.
  CHECK(median_distance(sensed, ref, t, {0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("median_distance matches the brute-force oracle on random triples") {
  Rng rng(46);
  const Bounds bounds = Bounds::defaults(128, 128);
  const Point center{63.5, 63.5};
  for (int trial = 0; trial < 100; ++trial) {
    const PointSet p = test::random_points(10, rng, 0.0, 127.0);
    const PointSet q = test::random_points(10, rng, 0.0, 127.0);
    const Transform t = test::random_in_bounds(bounds, rng);
    const double lib = median_distance(p, q, t, center);
    const double ref = oracle::median_distance(p.points, q.points, t, center);
    CHECK(std::fabs(lib - ref) < 1e-9);
    CHECK(lib >= 0.0);
  }
}

TEST_CASE("median_distance requires at least 3 points per set") {
  const PointSet two = make_set({{0, 0}, {1, 1}});
  const PointSet three = make_set({{0, 0}, {1, 1}, {2, 2}});
  CHECK_THROWS_AS(median_distance(two, three, Transform::identity(), {0, 0}),
                  empty_point_set_error);
  CHECK_THROWS_AS(median_distance(three, two, Transform::identity(), {0, 0}),
                  empty_point_set_error);
  CHECK_NOTHROW(median_distance(three, three, Transform::identity(), {0, 0}));
}

TEST_CASE("ncc of an image with itself is 1") {
  Rng rng(47);
  const Image a = test::random_image(24, 16, rng);
  CHECK(ncc(a, full_mask(a), 0.25) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ncc is invariant to positive linear intensity maps") {
  Rng rng(48);
  const Image a = test::random_image(20, 20, rng);
  Image b = a;
  for (double& v : b.data()) v = 2.0 * v + 10.0;
  CHECK(ncc(a, full_mask(b), 0.25) == doctest::Approx(1.0).epsilon(1e-9));
  Image c = a;
  for (double& v : c.data()) v = -0.5 * v + 100.0;
  CHECK(ncc(a, full_mask(c), 0.25) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("ncc of orthogonal 2x2 patterns is 0") {
  Image a(2, 2), b(2, 2);
  a.at(0, 0) = 0;
  a.at(1, 0) = 1;
  a.at(0, 1) = 1;
  a.at(1, 1) = 0;
  b.at(0, 0) = 0;
  b.at(1, 0) = 1;
  b.at(0, 1) = 0;
  b.at(1, 1) = 1;
  // Direct four-term check: deviations (-.5,.5,.5,-.5) vs (-.5,.5,-.5,.5).
  CHECK(std::fabs(ncc(a, full_mask(b), 0.25)) < 1e-12);
}

TEST_CASE("ncc runs only over mask-true pixels and matches the direct oracle") {
  Rng rng(49);
  for (int trial = 0; trial < 30; ++trial) {
    const Image a = test::random_image(18, 14, rng);
    MaskedImage b = full_mask(test::random_image(18, 14, rng));
    for (std::uint8_t& m : b.mask) m = rng.uniform01() < 0.7 ? 1 : 0;
    for (std::size_t i = 0; i < b.mask.size(); ++i)
      if (!b.mask[i]) b.image.data()[i] = 0.0;  // convention: masked-off is 0
    const auto expect = oracle::ncc(a, b);
    if (!expect) continue;
    const double got = ncc(a, b, 0.25);
    CHECK(std::fabs(got - *expect) < 1e-12);
    CHECK(got >= -1.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("ncc is symmetric over a fixed common mask") {
  Rng rng(50);
  const Image a = test::random_image(16, 16, rng);
  MaskedImage b = full_mask(test::random_image(16, 16, rng));
  for (std::uint8_t& m : b.mask) m = rng.uniform01() < 0.8 ? 1 : 0;
  MaskedImage a_masked = full_mask(a);
  a_masked.mask = b.mask;
  const double ab = ncc(a, b, 0.1);
  const double ba = ncc(b.image, a_masked, 0.1);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
}

TEST_CASE("ncc guards: low overlap and zero variance raise distinct errors") {
  const Image a(16, 16, 100.0);
  Rng rng(51);
  const Image noisy = test::random_image(16, 16, rng);
  MaskedImage b = full_mask(noisy);
  std::fill(b.mask.begin(), b.mask.end(), std::uint8_t{0});
  for (int i = 0; i < 16; ++i) b.mask[static_cast<std::size_t>(i)] = 1;  // 1/16 overlap
  CHECK_THROWS_AS(ncc(noisy, b, 0.25), insufficient_overlap_error);

  CHECK_THROWS_AS(ncc(a, full_mask(noisy), 0.25), degenerate_signal_error);
  CHECK_THROWS_AS(ncc(noisy, full_mask(a), 0.25), degenerate_signal_error);

  const Image small(8, 8, 1.0);
  CHECK_THROWS_AS(ncc(noisy, full_mask(small), 0.25), error);  // dimension mismatch
}

TEST_CASE("serial and parallel ncc are bit-identical") {
  Rng rng(52);
  const Image a = test::random_image(64, 48, rng);
  MaskedImage b = full_mask(test::random_image(64, 48, rng));
  for (std::uint8_t& m : b.mask) m = rng.uniform01() < 0.9 ? 1 : 0;
  const double serial = ncc_serial(a, b, 0.25);
  const int saved = max_threads();
  set_max_threads(4);
  const double parallel = ncc_omp(a, b, 0.25);
  set_max_threads(saved);
  CHECK(serial == parallel);
}

TEST_CASE("rmse: perfect transform on noiseless control points is 0") {
  Rng rng(53);
  const Bounds bounds = Bounds::defaults(100, 100);
  const Transform t = test::random_in_bounds(bounds, rng);
  const Point center{49.5, 49.5};
  const PointSet ref = test::random_points(15, rng, 10.0, 90.0);
  const PointSet sensed = apply(invert(t, center), ref);
  CHECK(rmse(ref, sensed, t, center) < 1e-9);
}

TEST_CASE("rmse: uniform (3,4) offset gives exactly 5") {
  PointSet ref = make_set({{0, 0}, {10, 0}, {0, 10}, {10, 10}});
  PointSet sensed;
  for (const Point& p : ref.points) sensed.points.push_back({p.x - 3.0, p.y - 4.0});
  // Identity transform leaves each warped point off by (3,4).
  CHECK(rmse(ref, sensed, Transform::identity(), {0, 0}) == doctest::Approx(5.0));
}

TEST_CASE("rmse matches the flat-loop oracle within 1e-12") {
  Rng rng(54);
  const Bounds bounds = Bounds::defaults(64, 64);
  const Point center{31.5, 31.5};
  for (int trial = 0; trial < 50; ++trial) {
    const PointSet ref = test::random_points(8, rng, 0.0, 63.0);
    const PointSet sensed = test::random_points(8, rng, 0.0, 63.0);
    const Transform t = test::random_in_bounds(bounds, rng);
    const double lib = rmse(ref, sensed, t, center);
    const double ora = oracle::rmse(ref.points, sensed.points, t, center);
    CHECK(std::fabs(lib - ora) < 1e-12);
  }
}

TEST_CASE("rmse rejects mismatched control sets") {
  const PointSet four = make_set({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  const PointSet three = make_set({{0, 0}, {1, 0}, {0, 1}});
  CHECK_THROWS_AS(rmse(four, three, Transform::identity(), {0, 0}),
                  control_point_mismatch_error);
  const PointSet empty;
  CHECK_THROWS_AS(rmse(empty, empty, Transform::identity(), {0, 0}),
                  control_point_mismatch_error);
}

TEST_CASE("phase1_better ranks valid ahead of invalid, then by median") {
  FitnessVector a, b;
  a.valid = true;
  a.median_dist = 5.0;
  b.valid = false;
  b.median_dist = 0.1;
  CHECK(phase1_better(a, b));
  CHECK_FALSE(phase1_better(b, a));
  b.valid = true;
  CHECK_FALSE(phase1_better(a, b));
  CHECK(phase1_better(b, a));
}

TEST_SUITE_END();
