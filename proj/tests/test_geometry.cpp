#include <doctest.h>

#include <cmath>

#include "fringefree/geometry.hpp"
#include "fringefree/mathutil.hpp"
#include "fringefree/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fringefree;

namespace {

PinholeDevice axis_camera(double f = 1000, double cx = 500, double cy = 500, int w = 1000,
                          int h = 1000) {
  PinholeDevice dev;
  dev.intrinsics = Intrinsics(f, f, cx, cy, w, h);
  return dev;
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("pose validation and inverse") {
  Mat3 bad = Mat3::Identity();
  bad(0, 1) = 1e-6;
  CHECK_THROWS_AS(Pose(bad, Vec3::Zero()), std::invalid_argument);

  const Pose p = Pose::look_at(Vec3(10, -5, 3), Vec3(0, 0, 600));
  CHECK((p.rotation.transpose() * p.rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK(p.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((p.center() - Vec3(10, -5, 3)).norm() < 1e-9);
  const Vec3 x(13, 7, 200);
  CHECK((p.to_world(p.to_device(x)) - x).norm() < 1e-9);
}

TEST_CASE("project: on-axis point maps to the principal point") {
  const PinholeDevice dev = axis_camera();
  const Vec2 px = project(dev, Vec3(0, 0, 1000));
  CHECK(px.x() == doctest::Approx(500).epsilon(1e-14));
  CHECK(px.y() == doctest::Approx(500).epsilon(1e-14));
}

TEST_CASE("project: similar triangles offset") {
  const PinholeDevice dev = axis_camera();
  const Vec2 px = project(dev, Vec3(100, 0, 1000));
  CHECK(px.x() == doctest::Approx(600).epsilon(1e-14));
  CHECK(px.y() == doctest::Approx(500).epsilon(1e-14));
}

TEST_CASE("project: radial model against scalar evaluation") {
  PinholeDevice dev = axis_camera();
  dev.lens.k1 = 0.1;
  // independent scalar evaluation: x = 0.1, r^2 = 0.01,
  // radial = 1 + 0.1 * 0.01 = 1.001, u = 1000 * 0.1001 + 500
  const Vec2 px = project(dev, Vec3(100, 0, 1000));
  CHECK(px.x() == doctest::Approx(600.1).epsilon(1e-13));
  CHECK(px.y() == doctest::Approx(500.0).epsilon(1e-13));
}

TEST_CASE("project: non-positive depth throws") {
  const PinholeDevice dev = axis_camera();
  CHECK_THROWS_AS(project(dev, Vec3(0, 0, 0)), NonPositiveDepth);
  CHECK_THROWS_AS(project(dev, Vec3(10, 10, -5)), NonPositiveDepth);
}

TEST_CASE("back_project: principal point gives the optical axis") {
  const PinholeDevice dev = axis_camera();
  const Ray r = back_project(dev, Vec2(500, 500));
  CHECK((r.direction - Vec3(0, 0, 1)).norm() < 1e-14);
  CHECK(r.origin.norm() < 1e-14);
}

TEST_CASE("back_project: distorted pixel matches brute-force inversion") {
  PinholeDevice dev = axis_camera();
  dev.lens.k1 = 0.1;
  // oracle: scan + bisection of the scalar radial model for the normalized
  // coordinate whose distorted image lands on pixel x = 600
  const double target = (600.0 - 500.0) / 1000.0;
  const double x_ref = oracle::invert_radial_1d(dev.lens, target);
  const Ray r = back_project(dev, Vec2(600, 500));
  CHECK(r.direction.x() / r.direction.z() == doctest::Approx(x_ref).epsilon(1e-9));
  CHECK(std::abs(r.direction.y()) < 1e-12);
}

TEST_CASE("project / back_project round-trip under lens and grid distortion") {
  Rng rng(42);
  // camera with lens distortion
  PinholeDevice cam = axis_camera(900, 480, 510, 1000, 1000);
  cam.lens = LensDistortion{0.08, -0.01, 0.002, 0.0005, -0.0004};
  // projector with an additional non-trivial correction grid
  PinholeDevice proj = axis_camera(900, 510, 490, 1000, 1000);
  proj.kind = DeviceKind::Projector;
  proj.lens = LensDistortion{0.05, 0.0, 0.0, 0.0, 0.0};
  DistortionGrid grid = DistortionGrid::zeros(64, Vec2(0, 0), 1000, 1000);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      grid.node(ix, iy) = Vec2(0.8 * std::sin(0.3 * ix + 0.1 * iy), 0.6 * std::cos(0.2 * iy));
  proj.set_grid_correction(grid);

  for (const PinholeDevice& dev : {cam, proj}) {
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const Vec2 px(rng.uniform(0, dev.intrinsics.width - 1),
                    rng.uniform(0, dev.intrinsics.height - 1));
      const Ray r = back_project(dev, px);
      const Vec2 again = project(dev, r.at(800.0));
      worst = std::max(worst, (again - px).norm());
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("cameras reject grid corrections") {
  PinholeDevice cam = axis_camera();
  CHECK_THROWS_AS(cam.set_grid_correction(DistortionGrid::zeros(32, Vec2(0, 0), 100, 100)),
                  std::invalid_argument);
}

TEST_CASE("triangulate: exact intersection") {
  const Ray r1{Vec3(-150, 0, 0), Vec3(150, 0, 1000).normalized()};
  const Ray r2{Vec3(150, 0, 0), Vec3(-150, 0, 1000).normalized()};
  const TriangulationResult t = triangulate(r1, r2);
  CHECK((t.point - Vec3(0, 0, 1000)).norm() < 1e-9);
  CHECK(t.gap < 1e-9);
}

TEST_CASE("triangulate: parallel rays throw") {
  const Ray r1{Vec3(0, 0, 0), Vec3(0, 0, 1)};
  const Ray r2{Vec3(100, 0, 0), Vec3(0, 0, 1)};
  CHECK_THROWS_AS(triangulate(r1, r2), ParallelRays);
}

TEST_CASE("triangulate: skew rays against scan + golden-section oracle") {
  const Ray r1{Vec3(0, 0, 0), Vec3(0, 0, 1)};
  const Ray r2{Vec3(100, 0, 0), Vec3(0, 0.01, 1).normalized()};
  const auto ref = oracle::closest_approach_scan(r1, r2, 0.0, 2000.0, 2000);
  const TriangulationResult t = triangulate(r1, r2);
  // the distance valley is nearly flat along the common ray direction here,
  // which bounds the oracle's own midpoint resolution
  CHECK((t.point - ref.midpoint).norm() < 2e-4);
  CHECK(t.gap == doctest::Approx(ref.distance).epsilon(1e-9));
}

TEST_CASE("triangulate: random skew pairs against the scan oracle") {
  Rng rng(31);
  for (int i = 0; i < 40; ++i) {
    const Ray r1{Vec3(rng.uniform(-150, -50), rng.uniform(-40, 40), 0),
                 Vec3(rng.uniform(-0.1, 0.3), rng.uniform(-0.25, 0.25), 1).normalized()};
    const Ray r2{Vec3(rng.uniform(50, 150), rng.uniform(-40, 40), 0),
                 Vec3(rng.uniform(-0.3, 0.1), rng.uniform(-0.25, 0.25), 1).normalized()};
    if (1.0 - std::abs(r1.direction.dot(r2.direction)) < 1e-3) continue;  // keep it conditioned
    const auto ref = oracle::closest_approach_fast(r1, r2, -200, 1500);
    const TriangulationResult t = triangulate(r1, r2);
    CHECK((t.point - ref.midpoint).norm() < 1e-6);
    CHECK(std::abs(t.gap - ref.distance) < 1e-6);
  }
}

TEST_CASE("triangulate: symmetric in its arguments") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Ray r1{Vec3(rng.uniform(-200, 200), rng.uniform(-200, 200), 0),
                 Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 1).normalized()};
    const Ray r2{Vec3(rng.uniform(-200, 200), rng.uniform(-200, 200), 0),
                 Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 1).normalized()};
    if (std::abs(r1.direction.dot(r2.direction)) > 1.0 - 1e-12) continue;
    const TriangulationResult a = triangulate(r1, r2);
    const TriangulationResult b = triangulate(r2, r1);
    CHECK((a.point - b.point).norm() < 1e-9);
    CHECK(std::abs(a.gap - b.gap) < 1e-9);
  }
}

TEST_CASE("triangulate: zero gap for rays through a common point") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(400, 900));
    const Vec3 o1(rng.uniform(-200, 0), rng.uniform(-50, 50), 0);
    const Vec3 o2(rng.uniform(1, 200), rng.uniform(-50, 50), 0);
    const Ray r1{o1, (p - o1).normalized()};
    const Ray r2{o2, (p - o2).normalized()};
    const TriangulationResult t = triangulate(r1, r2);
    CHECK(t.gap < 1e-9);
    CHECK((t.point - p).norm() < 1e-8);
  }
}

TEST_CASE("epipolar_line: rectified pair gives the horizontal row") {
  PinholeDevice d1 = axis_camera(800, 320, 240, 640, 480);
  PinholeDevice d2 = d1;
  d2.pose = Pose(Mat3::Identity(), Vec3(-300, 0, 0));  // centered at (300, 0, 0)
  for (double v : {10.0, 240.0, 401.5}) {
    const Vec3 line = epipolar_line(d1, d2, Vec2(123.0, v));
    // horizontal line through row v: l = (0, a, -a v)
    CHECK(std::abs(line.x()) < 1e-9 * std::abs(line.y()));
    CHECK(point_line_distance(line, Vec2(17.0, v)) < 1e-9);
    CHECK(point_line_distance(line, Vec2(600.0, v)) < 1e-9);
  }
}

TEST_CASE("epipolar_line: coincident centers throw") {
  const PinholeDevice d1 = axis_camera();
  CHECK_THROWS_AS(epipolar_line(d1, d1, Vec2(1, 2)), CoincidentCenters);
}

TEST_CASE("epipolar_line: projected points satisfy the line (randomized rigs)") {
  Rng rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    PinholeDevice d1 = axis_camera(rng.uniform(600, 1200), rng.uniform(300, 340),
                                   rng.uniform(220, 260), 640, 480);
    PinholeDevice d2 = axis_camera(rng.uniform(600, 1200), rng.uniform(300, 340),
                                   rng.uniform(220, 260), 640, 480);
    const Vec3 target(rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(500, 800));
    d1.pose = Pose::look_at(Vec3(rng.uniform(-250, -50), rng.uniform(-40, 40), 0), target);
    d2.pose = Pose::look_at(Vec3(rng.uniform(50, 250), rng.uniform(-40, 40), 0), target);

    const Vec3 p(rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(450, 850));
    Vec2 u1, u2;
    try {
      u1 = project(d1, p);
      u2 = project(d2, p);
    } catch (const NonPositiveDepth&) {
      continue;
    }
    const Vec3 line = epipolar_line(d1, d2, u1);
    CHECK(point_line_distance(line, u2) < 1e-6);
  }
}

TEST_CASE("epipolar_segment: disparity endpoints of a rectified pair") {
  PinholeDevice d1 = axis_camera(1000, 500, 500, 2000, 1000);
  PinholeDevice d2 = d1;
  d2.pose = Pose(Mat3::Identity(), Vec3(300, 0, 0));  // centered at (-300, 0, 0)
  const MeasurementVolume mv(5000, 5000, 200, 500);
  const Segment s = epipolar_segment(d1, d2, Vec2(500, 500), mv);
  // oracle: disparity = b f / z -> 300 * 1000 / 500 and 300 * 1000 / 700
  const double d_near = 300.0 * 1000.0 / 500.0;
  const double d_far = 300.0 * 1000.0 / 700.0;
  CHECK(s.a.x() == doctest::Approx(500 + d_near).epsilon(1e-9));
  CHECK(s.b.x() == doctest::Approx(500 + d_far).epsilon(1e-9));
  CHECK(s.length() == doctest::Approx(d_near - d_far).epsilon(1e-9));
  CHECK(s.length() == doctest::Approx(171.428571428).epsilon(1e-6));
}

TEST_CASE("epipolar_segment: zero-depth volume degenerates to a point") {
  PinholeDevice d1 = axis_camera(1000, 500, 500, 1000, 1000);
  PinholeDevice d2 = d1;
  d2.pose = Pose(Mat3::Identity(), Vec3(-300, 0, 0));
  const MeasurementVolume mv(5000, 5000, 0, 600);
  const Segment s = epipolar_segment(d1, d2, Vec2(500, 500), mv);
  CHECK(s.length() < 1e-12);
}

TEST_CASE("epipolar_segment: sideways exit throws") {
  PinholeDevice d1 = axis_camera(1000, 500, 500, 1000, 1000);
  PinholeDevice d2 = d1;
  d2.pose = Pose(Mat3::Identity(), Vec3(-300, 0, 0));
  const MeasurementVolume mv(40, 40, 200, 500);  // narrow box
  // a strongly off-axis pixel leaves the 40 mm wide box before d_min
  CHECK_THROWS_AS(epipolar_segment(d1, d2, Vec2(999, 500), mv), RayMissesVolume);
}

TEST_CASE("epipolar_segment: containment of in-slab points") {
  const SensorRig rig = test::small_rig();
  const MeasurementVolume mv = test::small_volume();
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Vec2 px(rng.uniform(20, 140), rng.uniform(15, 105));
    Segment s;
    try {
      s = epipolar_segment(rig.cam1, rig.cam2, px, mv);
    } catch (const RayMissesVolume&) {
      continue;
    }
    const Ray ray = back_project(rig.cam1, px);
    const RayInterval iv = clip_ray_to_volume(rig.cam1, ray, mv);
    const double t = rng.uniform(iv.t_near, iv.t_far);
    Vec2 q;
    try {
      q = project(rig.cam2, ray.at(t));
    } catch (const NonPositiveDepth&) {
      continue;
    }
    if (!rig.cam2.contains(q)) continue;
    // q must lie on the segment: distance to the chord below a tolerance
    // that accounts for the slight curvature of the projected ray
    const Vec2 ab = s.b - s.a;
    const double u = (q - s.a).dot(ab) / ab.squaredNorm();
    CHECK(u > -1e-6);
    CHECK(u < 1.0 + 1e-6);
    const Vec2 foot = s.a + std::clamp(u, 0.0, 1.0) * ab;
    CHECK((q - foot).norm() < 1e-6);
  }
}

TEST_SUITE_END();
