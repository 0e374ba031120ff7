#include <cmath>

#include "affreg/errors.hpp"
#include "affreg/points.hpp"
#include "affreg/transform.hpp"
#include "doctest.h"
#include "nlohmann/json.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace affreg;

TEST_SUITE_BEGIN("transform");

TEST_CASE("identity parameters compose to the identity mapping") {
  const AffineMatrix m = compose_matrix(Transform::identity(), {12.0, -4.0});
  for (int i = 0; i < 20; ++i) {
    const Point p{3.7 * i, -2.1 * i};
    const Point q = m.apply(p);
    CHECK(q.x == doctest::Approx(p.x).epsilon(1e-15));
    CHECK(q.y == doctest::Approx(p.y).epsilon(1e-15));
  }
}

TEST_CASE("pure translation moves points by (tx, ty)") {
  Transform t;
  t.tx = 5.0;
  t.ty = -3.0;
  const AffineMatrix m = compose_matrix(t, {0.0, 0.0});
  const Point q = m.apply({2.0, 2.0});
  CHECK(q.x == doctest::Approx(7.0));
  CHECK(q.y == doctest::Approx(-1.0));
}

TEST_CASE("quarter rotation about the origin sends (1,0) to (0,1)") {
  Transform t;
  t.theta = M_PI / 2.0;
  const AffineMatrix m = compose_matrix(t, {0.0, 0.0});
  const Point q = m.apply({1.0, 0.0});
  CHECK(std::fabs(q.x) < 1e-12);
  CHECK(q.y == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("apply: identity, pure scale, and hand-multiplied shear") {
  PointSet ps;
  ps.points = {{1.0, 1.0}, {0.0, 2.0}, {-3.0, 0.5}};

  SUBCASE("identity returns the same set in order") {
    const PointSet out = apply(Transform::identity(), ps, {0.0, 0.0});
    REQUIRE(out.size() == ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(out.points[i].x == doctest::Approx(ps.points[i].x));
      CHECK(out.points[i].y == doctest::Approx(ps.points[i].y));
    }
  }
  SUBCASE("scale 2 about the origin doubles coordinates") {
    Transform t;
    t.scale = 2.0;
    const PointSet out = apply(t, ps, {0.0, 0.0});
    CHECK(out.points[0].x == doctest::Approx(2.0));
    CHECK(out.points[0].y == doctest::Approx(2.0));
  }
  SUBCASE("shear_x 0.5 maps (0,2) to (1,2), matching the hand matrix") {
    Transform t;
    t.shear_x = 0.5;
    const PointSet out = apply(t, ps, {0.0, 0.0});
    // L = R(0) * [1 hx; hy 1] * s = [1 0.5; 0 1]: (0,2) -> (0*1 + 2*0.5, 2).
    CHECK(out.points[1].x == doctest::Approx(1.0));
    CHECK(out.points[1].y == doctest::Approx(2.0));
  }
}

TEST_CASE("apply preserves point count and ordering") {
  Rng rng(21);
  const PointSet ps = test::random_points(37, rng, -50.0, 50.0);
  Transform t;
  t.theta = 0.4;
  t.tx = 3.0;
  const PointSet out = apply(t, ps, {10.0, 10.0});
  REQUIRE(out.size() == 37);
  const AffineMatrix m = compose_matrix(t, {10.0, 10.0});
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Point expect = m.apply(ps.points[i]);
    CHECK(out.points[i].x == doctest::Approx(expect.x).epsilon(1e-14));
    CHECK(out.points[i].y == doctest::Approx(expect.y).epsilon(1e-14));
  }
}

TEST_CASE("invert: identity and pure translation") {
  const AffineMatrix id = invert(Transform::identity(), {0.0, 0.0});
  const Point p = id.apply({4.0, -9.0});
  CHECK(p.x == doctest::Approx(4.0));
  CHECK(p.y == doctest::Approx(-9.0));

  Transform t;
  t.tx = 5.0;
  t.ty = -3.0;
  const AffineMatrix inv = invert(t, {0.0, 0.0});
  const Point q = inv.apply({0.0, 0.0});
  CHECK(q.x == doctest::Approx(-5.0));
  CHECK(q.y == doctest::Approx(3.0));
}

TEST_CASE("invert round-trips 100 sampled points within 1e-9") {
  Rng rng(22);
  const Bounds bounds = Bounds::defaults(256, 256);
  for (int trial = 0; trial < 10; ++trial) {
    const Transform t = test::random_in_bounds(bounds, rng);
    const Point center = {127.5, 127.5};
    const AffineMatrix fwd = compose_matrix(t, center);
    const AffineMatrix inv = invert(t, center);
    for (int i = 0; i < 100; ++i) {
      const Point p{rng.uniform(0.0, 255.0), rng.uniform(0.0, 255.0)};
      const Point rt = inv.apply(fwd.apply(p));
      CHECK(std::fabs(rt.x - p.x) < 1e-9);
      CHECK(std::fabs(rt.y - p.y) < 1e-9);
    }
  }
}

TEST_CASE("singular linear parts are rejected") {
  Transform t;
  t.shear_x = 1.0;
  t.shear_y = 1.0;  // determinant exactly 0
  CHECK_THROWS_AS(compose_matrix(t, {0.0, 0.0}), singular_transform_error);
  CHECK_THROWS_AS(invert(t, {0.0, 0.0}), singular_transform_error);
}

TEST_CASE("linear determinant equals s^2 (1 - hx hy) for sampled parameters") {
  Rng rng(23);
  const Bounds bounds = Bounds::defaults(200, 100);
  for (int trial = 0; trial < 200; ++trial) {
    const Transform t = test::random_in_bounds(bounds, rng);
    const AffineMatrix m = compose_matrix(t, {50.0, 50.0});
    const double analytic = t.scale * t.scale * (1.0 - t.shear_x * t.shear_y);
    CHECK(m.det() == doctest::Approx(analytic).epsilon(1e-12));
    CHECK(linear_det(t) == doctest::Approx(analytic).epsilon(1e-12));
  }
}

TEST_CASE("library matrices agree with the hand-built oracle composition") {
  Rng rng(24);
  const Bounds bounds = Bounds::defaults(128, 128);
  for (int trial = 0; trial < 100; ++trial) {
    const Transform t = test::random_in_bounds(bounds, rng);
    const Point center{63.5, 63.5};
    const AffineMatrix lib = compose_matrix(t, center);
    const oracle::Mat23 ref = oracle::compose(t, center);
    for (int i = 0; i < 5; ++i) {
      const Point p{rng.uniform(0.0, 127.0), rng.uniform(0.0, 127.0)};
      const Point a = lib.apply(p);
      const Point b = ref.map(p);
      CHECK(std::fabs(a.x - b.x) < 1e-9);
      CHECK(std::fabs(a.y - b.y) < 1e-9);
    }
  }
}

TEST_CASE("default bounds match the documented search-space sizing") {
  const Bounds b = Bounds::defaults(400, 200);
  CHECK(b.tx.lo == doctest::Approx(-100.0));
  CHECK(b.tx.hi == doctest::Approx(100.0));
  CHECK(b.ty.lo == doctest::Approx(-50.0));
  CHECK(b.ty.hi == doctest::Approx(50.0));
  CHECK(b.theta.lo == doctest::Approx(-M_PI / 4));
  CHECK(b.theta.hi == doctest::Approx(M_PI / 4));
  CHECK(b.scale.lo == doctest::Approx(0.7));
  CHECK(b.scale.hi == doctest::Approx(1.4));
  CHECK(b.shear_x.lo == doctest::Approx(-0.2));
  CHECK(b.shear_x.hi == doctest::Approx(0.2));
  CHECK(b.shear_y.hi == doctest::Approx(0.2));
}

TEST_CASE("bounds validate, contain, and clamp") {
  Bounds b = Bounds::defaults(100, 100);
  CHECK_NOTHROW(b.validate());

  Bounds bad = b;
  bad.scale = {0.0, 1.0};  // scale interval must stay strictly positive
  CHECK_THROWS_AS(bad.validate(), config_error);
  Bounds flipped = b;
  flipped.tx = {5.0, -5.0};
  CHECK_THROWS_AS(flipped.validate(), config_error);

  Transform inside;
  inside.tx = 10.0;
  CHECK(b.contains(inside));
  Transform outside;
  outside.tx = 26.0;  // beyond 0.25 * 100
  CHECK_FALSE(b.contains(outside));
  const Transform clamped = b.clamp(outside);
  CHECK(clamped.tx == doctest::Approx(25.0));
  CHECK(b.contains(clamped));
}

TEST_CASE("transform JSON round-trip preserves all six genes") {
  Transform t;
  t.tx = 3.25;
  t.ty = -1.5;
  t.theta = 0.1234567891234;
  t.scale = 1.05;
  t.shear_x = -0.07;
  t.shear_y = 0.02;
  const nlohmann::json j = to_json(t);
  CHECK(j.contains("tx"));
  CHECK(j.contains("shear_y"));
  const Transform back = transform_from_json(j);
  CHECK(back.tx == t.tx);
  CHECK(back.ty == t.ty);
  CHECK(back.theta == t.theta);
  CHECK(back.scale == t.scale);
  CHECK(back.shear_x == t.shear_x);
  CHECK(back.shear_y == t.shear_y);
}

TEST_CASE("bounds JSON round-trip and partial override") {
  const Bounds base = Bounds::defaults(256, 256);
  const nlohmann::json j = to_json(base);
  const Bounds back = bounds_from_json(j, Bounds::defaults(10, 10));
  CHECK(back.tx.lo == base.tx.lo);
  CHECK(back.scale.hi == base.scale.hi);

  // Partial document overrides only the named genes.
  nlohmann::json partial;
  partial["theta"] = nlohmann::json::array({-0.1, 0.1});
  const Bounds merged = bounds_from_json(partial, base);
  CHECK(merged.theta.lo == doctest::Approx(-0.1));
  CHECK(merged.theta.hi == doctest::Approx(0.1));
  CHECK(merged.tx.lo == base.tx.lo);
}

TEST_SUITE_END();
