#include "fringefree/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fringefree {

namespace {

constexpr double kOrthoTol = 1e-9;
constexpr int kUndistortMaxIter = 20;

}  // namespace

Pose::Pose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {
  const Mat3 rtr = r.transpose() * r;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > kOrthoTol)
    throw std::invalid_argument("pose rotation is not orthonormal");
  if (std::abs(r.determinant() - 1.0) > kOrthoTol)
    throw std::invalid_argument("pose rotation determinant is not +1");
}

Pose Pose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = up.cross(z);
  if (x.norm() < 1e-12) throw std::invalid_argument("look_at: up parallel to viewing direction");
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return Pose(r, -(r * eye));
}

Intrinsics::Intrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
  if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("intrinsics: focal length must be > 0");
  if (w < 1 || h < 1) throw std::invalid_argument("intrinsics: sensor size must be >= 1");
}

Vec2 LensDistortion::distort(const Vec2& n) const {
  if (is_zero()) return n;
  const double x = n.x(), y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  return Vec2(x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
              y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y);
}

Vec2 LensDistortion::undistort(const Vec2& d, double tol) const {
  if (is_zero()) return d;
  Vec2 u = d;
  for (int i = 0; i < kUndistortMaxIter; ++i) {
    const Vec2 next = d - (distort(u) - u);
    if ((next - u).norm() < tol) {
      u = next;
      break;
    }
    u = next;
  }
  if ((distort(u) - d).norm() > std::max(tol, 1e-12))
    throw UndistortDiverged("lens undistortion did not converge");
  return u;
}

void PinholeDevice::set_grid_correction(DistortionGrid grid) {
  if (kind == DeviceKind::Camera)
    throw std::invalid_argument("cameras do not carry a grid correction");
  grid_correction = std::move(grid);
}

Vec2 project(const PinholeDevice& device, const Vec3& point_world) {
  const Vec3 pd = device.pose.to_device(point_world);
  if (!(pd.z() > 0.0)) throw NonPositiveDepth("point at or behind the projection center plane");
  const Vec2 n = device.lens.distort(Vec2(pd.x() / pd.z(), pd.y() / pd.z()));
  Vec2 px(device.intrinsics.fx * n.x() + device.intrinsics.cx,
          device.intrinsics.fy * n.y() + device.intrinsics.cy);
  if (device.grid_correction) px = device.grid_correction->distort(px);
  return px;
}

Ray back_project(const PinholeDevice& device, const Vec2& pixel) {
  Vec2 px = pixel;
  if (device.grid_correction) px = device.grid_correction->undistort(px);
  const Vec2 d((px.x() - device.intrinsics.cx) / device.intrinsics.fx,
               (px.y() - device.intrinsics.cy) / device.intrinsics.fy);
  // 1e-10 px expressed in normalized units
  const double tol = 1e-10 / std::max(device.intrinsics.fx, device.intrinsics.fy);
  const Vec2 n = device.lens.undistort(d, tol);
  const Vec3 dir_world = device.pose.rotation.transpose() * Vec3(n.x(), n.y(), 1.0);
  return Ray{device.pose.center(), dir_world.normalized()};
}

TriangulationResult triangulate(const Ray& r1, const Ray& r2) {
  const double b = r1.direction.dot(r2.direction);
  const double denom = 1.0 - b * b;  // sin^2 of the ray angle
  if (denom < 1e-18) throw ParallelRays("rays are parallel within tolerance");
  const Vec3 w = r1.origin - r2.origin;
  const double d = r1.direction.dot(w);
  const double e = r2.direction.dot(w);
  const double t1 = (b * e - d) / denom;
  const double t2 = (e - b * d) / denom;
  const Vec3 p1 = r1.at(t1);
  const Vec3 p2 = r2.at(t2);
  return TriangulationResult{0.5 * (p1 + p2), (p1 - p2).norm()};
}

Vec2 undistorted_pixel(const PinholeDevice& device, const Vec2& pixel) {
  Vec2 px = pixel;
  if (device.grid_correction) px = device.grid_correction->undistort(px);
  const Vec2 d((px.x() - device.intrinsics.cx) / device.intrinsics.fx,
               (px.y() - device.intrinsics.cy) / device.intrinsics.fy);
  const double tol = 1e-10 / std::max(device.intrinsics.fx, device.intrinsics.fy);
  const Vec2 n = device.lens.undistort(d, tol);
  return Vec2(device.intrinsics.fx * n.x() + device.intrinsics.cx,
              device.intrinsics.fy * n.y() + device.intrinsics.cy);
}

double point_line_distance(const Vec3& line, const Vec2& point) {
  const double denom = std::hypot(line.x(), line.y());
  if (denom < 1e-300) throw NumericalError("degenerate line");
  return std::abs(line.x() * point.x() + line.y() * point.y() + line.z()) / denom;
}

Mat3 fundamental_matrix(const PinholeDevice& d1, const PinholeDevice& d2) {
  if ((d1.center() - d2.center()).norm() < 1e-9)
    throw CoincidentCenters("devices share a projection center");
  const Mat3 r_rel = d2.pose.rotation * d1.pose.rotation.transpose();
  const Vec3 t_rel = d2.pose.translation - r_rel * d1.pose.translation;
  Mat3 tx;
  tx << 0, -t_rel.z(), t_rel.y(), t_rel.z(), 0, -t_rel.x(), -t_rel.y(), t_rel.x(), 0;
  Mat3 k1 = Mat3::Identity(), k2 = Mat3::Identity();
  k1(0, 0) = d1.intrinsics.fx;
  k1(1, 1) = d1.intrinsics.fy;
  k1(0, 2) = d1.intrinsics.cx;
  k1(1, 2) = d1.intrinsics.cy;
  k2(0, 0) = d2.intrinsics.fx;
  k2(1, 1) = d2.intrinsics.fy;
  k2(0, 2) = d2.intrinsics.cx;
  k2(1, 2) = d2.intrinsics.cy;
  return k2.inverse().transpose() * (tx * r_rel) * k1.inverse();
}

Vec3 epipolar_line(const PinholeDevice& d1, const PinholeDevice& d2, const Vec2& pixel_in_d1) {
  const Mat3 f = fundamental_matrix(d1, d2);
  const Vec2 u = undistorted_pixel(d1, pixel_in_d1);
  return f * Vec3(u.x(), u.y(), 1.0);
}

RayInterval clip_ray_to_volume(const PinholeDevice& ref, const Ray& ray,
                               const MeasurementVolume& mv) {
  // depth of ray(t) in the ref frame is z0 + t * dz
  const double z0 = ref.pose.to_device(ray.origin).z();
  const double dz = (ref.pose.rotation * ray.direction).z();
  if (dz <= 1e-12) throw RayMissesVolume("ray does not advance into the depth slab");
  double t0 = (mv.z_near() - z0) / dz;
  double t1 = (mv.z_far() - z0) / dz;

  // lateral bounds, world frame box centered on x = y = 0
  const double half[2] = {mv.mvw / 2.0, mv.mvh / 2.0};
  for (int a = 0; a < 2; ++a) {
    const double o = ray.origin[a], d = ray.direction[a];
    if (std::abs(d) < 1e-15) {
      if (o < -half[a] || o > half[a]) throw RayMissesVolume("ray outside the lateral bounds");
      continue;
    }
    double lo = (-half[a] - o) / d;
    double hi = (half[a] - o) / d;
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
  }
  if (t0 > t1) throw RayMissesVolume("ray exits the measurement volume sideways");
  return RayInterval{t0, t1};
}

namespace {

// Projection restricted to the image rectangle; false when behind the device.
bool project_inside(const PinholeDevice& dev, const Vec3& p, Vec2* out) {
  try {
    *out = project(dev, p);
  } catch (const NonPositiveDepth&) {
    return false;
  }
  return dev.contains(*out);
}

}  // namespace

RayInterval clip_ray_to_image(const PinholeDevice& device, const Ray& ray,
                              const RayInterval& iv) {
  Vec2 tmp;
  const bool a_ok = project_inside(device, ray.at(iv.t_near), &tmp);
  const bool b_ok = project_inside(device, ray.at(iv.t_far), &tmp);
  if (a_ok && b_ok) return iv;
  if (iv.t_far - iv.t_near < 1e-12)
    throw RayMissesVolume("degenerate interval outside the image");

  const int kSamples = 256;
  double lo_t = 0, hi_t = 0;
  bool found = false;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = iv.t_near + (iv.t_far - iv.t_near) * i / kSamples;
    if (project_inside(device, ray.at(t), &tmp)) {
      if (!found) lo_t = t;
      hi_t = t;
      found = true;
    }
  }
  if (!found) throw RayMissesVolume("interval lies outside the image");

  auto refine = [&](double t_in, double t_out) {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (t_in + t_out);
      if (project_inside(device, ray.at(mid), &tmp))
        t_in = mid;
      else
        t_out = mid;
    }
    return t_in;
  };
  const double step = (iv.t_far - iv.t_near) / kSamples;
  if (lo_t > iv.t_near) lo_t = refine(lo_t, lo_t - step);
  if (hi_t < iv.t_far) hi_t = refine(hi_t, hi_t + step);
  return RayInterval{lo_t, hi_t};
}

Segment epipolar_segment(const PinholeDevice& d1, const PinholeDevice& d2, const Vec2& pixel,
                         const MeasurementVolume& mv) {
  const Ray ray = back_project(d1, pixel);
  const RayInterval iv = clip_ray_to_image(d2, ray, clip_ray_to_volume(d1, ray, mv));
  Vec2 pa, pb;
  project_inside(d2, ray.at(iv.t_near), &pa);
  project_inside(d2, ray.at(iv.t_far), &pb);
  return Segment{pa, pb};
}

}  // namespace fringefree
