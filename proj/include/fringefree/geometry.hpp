#pragma once

#include <Eigen/Dense>
#include <optional>

#include "fringefree/distortion_grid.hpp"
#include "fringefree/errors.hpp"
#include "fringefree/volume.hpp"

namespace fringefree {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rigid transform world -> device: x_device = rotation * x_world + translation.
// Units are millimeters throughout world space.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& r, const Vec3& t);  // validates orthonormality and det = +1

  Vec3 to_device(const Vec3& p_world) const { return rotation * p_world + translation; }
  Vec3 to_world(const Vec3& p_device) const {
    return rotation.transpose() * (p_device - translation);
  }
  // Projection center in world coordinates.
  Vec3 center() const { return -(rotation.transpose() * translation); }

  // Device at `eye` with its optical axis through `target`, y kept close to `up`.
  static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0, 1, 0));
};

struct Intrinsics {
  double fx = 0, fy = 0;  // focal length, px
  double cx = 0, cy = 0;  // principal point, px; may lie outside the chip
  int width = 0, height = 0;

  Intrinsics() = default;
  Intrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h);
};

// Brown radial-tangential model acting on normalized image coordinates.
struct LensDistortion {
  double k1 = 0, k2 = 0, k3 = 0;
  double p1 = 0, p2 = 0;

  bool is_zero() const { return k1 == 0 && k2 == 0 && k3 == 0 && p1 == 0 && p2 == 0; }
  Vec2 distort(const Vec2& n) const;
  // Inverts distort() by fixed-point iteration (<= 20 iterations); `tol` is in
  // normalized units. Throws UndistortDiverged when the residual stays above it.
  Vec2 undistort(const Vec2& d, double tol = 1e-13) const;
};

enum class DeviceKind : uint8_t { Camera = 0, Projector = 1 };

struct PinholeDevice {
  Intrinsics intrinsics;
  Pose pose;
  LensDistortion lens;
  std::optional<DistortionGrid> grid_correction;  // projectors only
  DeviceKind kind = DeviceKind::Camera;

  Vec3 center() const { return pose.center(); }
  Vec3 optical_axis() const { return pose.rotation.row(2).transpose(); }

  // Pixel inside the sensor rectangle [-0.5, width-0.5] x [-0.5, height-0.5].
  bool contains(const Vec2& px) const {
    return px.x() >= -0.5 && px.x() <= intrinsics.width - 0.5 && px.y() >= -0.5 &&
           px.y() <= intrinsics.height - 0.5;
  }

  void set_grid_correction(DistortionGrid grid);
  void clear_grid_correction() { grid_correction.reset(); }
};

struct Ray {
  Vec3 origin = Vec3::Zero();     // mm, world frame
  Vec3 direction = Vec3::UnitZ();  // unit length

  Vec3 at(double t) const { return origin + t * direction; }
};

struct TriangulationResult {
  Vec3 point = Vec3::Zero();  // midpoint of the mutual perpendicular segment
  double gap = 0;             // its length: shortest distance between the rays, mm
};

struct Segment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double length() const { return (b - a).norm(); }
};

// Parameter interval along a ray (unit direction, so t is in mm).
struct RayInterval {
  double t_near = 0;
  double t_far = 0;
};

// World point -> pixel. Applies pose, perspective division, lens distortion,
// then the grid correction when installed. The result may lie outside the
// sensor rectangle. Throws NonPositiveDepth for points at or behind the
// projection center plane.
Vec2 project(const PinholeDevice& device, const Vec3& point_world);

// Pixel -> viewing ray with origin at the projection center. Inverts the grid
// correction and the lens model; pixels outside the sensor are legal.
Ray back_project(const PinholeDevice& device, const Vec2& pixel);

// Midpoint of the mutual perpendicular segment between two rays. Throws
// ParallelRays when |sin| of the ray angle is below 1e-9.
TriangulationResult triangulate(const Ray& r1, const Ray& r2);

// Epipolar line of `pixel_in_d1` in the undistorted image plane of d2,
// as a homogeneous 3-vector l with l . (u, v, 1) = 0.
Vec3 epipolar_line(const PinholeDevice& d1, const PinholeDevice& d2, const Vec2& pixel_in_d1);

// Projections into d2 of the d1 viewing ray points at depth d_min and
// d_min + mvd, clipped to the d2 image rectangle. Throws RayMissesVolume.
Segment epipolar_segment(const PinholeDevice& d1, const PinholeDevice& d2, const Vec2& pixel,
                         const MeasurementVolume& mv);

// Pixel with lens and grid distortion removed (pinhole coordinates).
Vec2 undistorted_pixel(const PinholeDevice& device, const Vec2& pixel);

// Perpendicular distance of a point to a homogeneous 2D line.
double point_line_distance(const Vec3& line, const Vec2& point);

// Fundamental matrix mapping undistorted d1 pixels to epipolar lines in the
// undistorted d2 image. Throws CoincidentCenters.
Mat3 fundamental_matrix(const PinholeDevice& d1, const PinholeDevice& d2);

// Clips a ray against the measurement volume: depth slab in the `ref` device
// frame intersected with the world-frame lateral bounds. Throws
// RayMissesVolume when the intersection is empty.
RayInterval clip_ray_to_volume(const PinholeDevice& ref, const Ray& ray,
                               const MeasurementVolume& mv);

// Shrinks a ray interval to the part whose projection falls inside the
// device image rectangle. Throws RayMissesVolume when no part is visible.
RayInterval clip_ray_to_image(const PinholeDevice& device, const Ray& ray,
                              const RayInterval& iv);

}  // namespace fringefree
