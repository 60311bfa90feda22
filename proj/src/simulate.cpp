#include "fringefree/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fringefree/mathutil.hpp"
#include "fringefree/parallel.hpp"
#include "fringefree/rng.hpp"

namespace fringefree {

Scene Scene::plane(double depth, double extent) {
  Scene s;
  s.kind = Kind::Plane;
  s.plane_depth = depth;
  s.extent = extent;
  return s;
}

Scene Scene::pyramid_stump(double base_depth, double base, double top, double height,
                           double extent) {
  Scene s;
  s.kind = Kind::PyramidStump;
  s.stump_base_depth = base_depth;
  s.stump_base = base;
  s.stump_top = top;
  s.stump_height = height;
  s.extent = extent;
  return s;
}

Scene Scene::heightfield(double base_depth, double amplitude, int bumps, int seed, double extent) {
  Scene s;
  s.kind = Kind::Heightfield;
  s.hf_base_depth = base_depth;
  s.hf_amplitude = amplitude;
  s.hf_bumps = bumps;
  s.hf_seed = seed;
  s.extent = extent;
  s.bake();
  return s;
}

void Scene::bake() {
  if (kind != Kind::Heightfield || !relief_.empty()) return;
  relief_n_ = hf_resolution;
  relief_.assign(static_cast<size_t>(relief_n_) * relief_n_, 0.f);

  struct Bump {
    double cx, cy, sigma, amp;
  };
  Rng rng(static_cast<uint64_t>(hf_seed) * 0x51ed2701ULL + 17);
  std::vector<Bump> bumps(hf_bumps);
  for (auto& b : bumps) {
    b.cx = rng.uniform(-0.75 * extent, 0.75 * extent);
    b.cy = rng.uniform(-0.75 * extent, 0.75 * extent);
    b.sigma = rng.uniform(7.0, 16.0);
    b.amp = rng.uniform(0.35 * hf_amplitude, hf_amplitude);
  }
  for (int j = 0; j < relief_n_; ++j) {
    const double y = -extent + 2.0 * extent * j / (relief_n_ - 1);
    for (int i = 0; i < relief_n_; ++i) {
      const double x = -extent + 2.0 * extent * i / (relief_n_ - 1);
      double hsum = 0;
      for (const auto& b : bumps) {
        const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
        hsum += b.amp * std::exp(-0.5 * d2 / (b.sigma * b.sigma));
      }
      relief_[static_cast<size_t>(j) * relief_n_ + i] = static_cast<float>(hsum);
    }
  }
}

bool Scene::depth_at(double x, double y, double* z) const {
  if (std::abs(x) > extent || std::abs(y) > extent) return false;
  switch (kind) {
    case Kind::Plane:
      *z = plane_depth;
      return true;
    case Kind::PyramidStump: {
      const double r = std::max(std::abs(x), std::abs(y));
      double h = 0;
      if (r <= stump_top / 2) {
        h = stump_height;
      } else if (r < stump_base / 2) {
        h = stump_height * (stump_base / 2 - r) / (stump_base / 2 - stump_top / 2);
      }
      *z = stump_base_depth - h;
      return true;
    }
    case Kind::Heightfield: {
      // bilinear lookup in the baked relief; the interpolant IS the surface
      const double gx = (x + extent) / (2 * extent) * (relief_n_ - 1);
      const double gy = (y + extent) / (2 * extent) * (relief_n_ - 1);
      const int i0 = std::clamp(static_cast<int>(gx), 0, relief_n_ - 2);
      const int j0 = std::clamp(static_cast<int>(gy), 0, relief_n_ - 2);
      const double fx = gx - i0, fy = gy - j0;
      auto at = [&](int i, int j) {
        return static_cast<double>(relief_[static_cast<size_t>(j) * relief_n_ + i]);
      };
      const double h = (1 - fx) * (1 - fy) * at(i0, j0) + fx * (1 - fy) * at(i0 + 1, j0) +
                       (1 - fx) * fy * at(i0, j0 + 1) + fx * fy * at(i0 + 1, j0 + 1);
      *z = hf_base_depth - h;
      return true;
    }
  }
  return false;
}

double Scene::z_min() const {
  switch (kind) {
    case Kind::Plane:
      return plane_depth;
    case Kind::PyramidStump:
      return stump_base_depth - stump_height;
    case Kind::Heightfield:
      return hf_base_depth - hf_amplitude * 1.5;
  }
  return 0;
}

double Scene::z_max() const {
  switch (kind) {
    case Kind::Plane:
      return plane_depth;
    case Kind::PyramidStump:
      return stump_base_depth;
    case Kind::Heightfield:
      return hf_base_depth;
  }
  return 0;
}

namespace {

constexpr double kMarchStep = 0.25;    // mm of world z per marching step
constexpr double kShadowBias = 0.35;   // mm offset before occlusion marching

// First intersection of a ray with the scene surface, by marching the depth
// band and bisecting the bracket. Returns false on a miss.
bool ray_cast(const Scene& scene, const Ray& ray, double* t_hit) {
  if (ray.direction.z() <= 1e-9) return false;
  const double z_lo = scene.z_min() - 1.0;
  const double z_hi = scene.z_max() + 1.0;
  const double t0 = (z_lo - ray.origin.z()) / ray.direction.z();
  const double t1 = (z_hi - ray.origin.z()) / ray.direction.z();
  const double dt = kMarchStep / ray.direction.z();

  auto above = [&](double t, bool* inside) {
    const Vec3 p = ray.at(t);
    double z;
    if (!scene.depth_at(p.x(), p.y(), &z)) {
      *inside = false;
      return true;
    }
    *inside = true;
    return p.z() < z;  // still in front of the surface
  };

  bool inside = false;
  double prev_t = t0;
  bool prev_above = above(t0, &inside);
  if (!prev_above && inside) return false;  // started behind the surface
  for (double t = t0 + dt; t <= t1 + dt; t += dt) {
    const bool now_above = above(t, &inside);
    if (!now_above && inside) {
      double lo = prev_t, hi = t;
      for (int i = 0; i < 64; ++i) {
        const double mid = 0.5 * (lo + hi);
        bool ins;
        if (above(mid, &ins))
          lo = mid;
        else
          hi = mid;
      }
      *t_hit = 0.5 * (lo + hi);
      return true;
    }
    prev_t = t;
    prev_above = now_above;
  }
  return false;
}

// True when the segment from a surface point toward a device center is clear
// of the surface.
bool visible_from(const Scene& scene, const Vec3& surface_point, const Vec3& device_center) {
  const Vec3 seg = device_center - surface_point;
  const double len = seg.norm();
  const Vec3 dir = seg / len;
  if (dir.z() >= -1e-9) {
    // device is not in front of the surface point
    if (std::abs(dir.z()) < 1e-9) return false;
  }
  // march only while still inside the scene depth band
  const double z_lo = scene.z_min() - 0.5;
  double t = kShadowBias;
  const double step = kMarchStep / std::max(std::abs(dir.z()), 1e-3);
  for (; t < len; t += step) {
    const Vec3 p = surface_point + t * dir;
    if (p.z() < z_lo) return true;  // left the band toward the sensor
    double z;
    if (!scene.depth_at(p.x(), p.y(), &z)) continue;
    if (p.z() > z + 1e-6) return false;  // ray ducked behind the surface
  }
  return true;
}

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

struct DirectionPatterns {
  FringeConfig cfg;
  bool along_y = false;  // fringes vary along projector y instead of x
};

void render_camera(const Scene& scene, const SensorRig& rig, const PinholeDevice& cam,
                   int camera_id, const std::vector<DirectionPatterns>& directions,
                   const RenderConfig& rc, std::vector<CameraCapture*> captures,
                   GroundTruth* gt_out, double* shadow_fraction) {
  const int w = cam.intrinsics.width, h = cam.intrinsics.height;
  for (size_t d = 0; d < directions.size(); ++d) {
    captures[d]->fringe.frames.assign(directions[d].cfg.steps, ImageD(w, h, 0.0));
    captures[d]->gray.assign(graycode_bits(directions[d].cfg.fringe_count), ImageD(w, h, 0.0));
  }
  if (gt_out) {
    gt_out->width = w;
    gt_out->height = h;
    gt_out->hit.assign(static_cast<size_t>(w) * h, Vec3::Zero());
    gt_out->has_hit = ImageU8(w, h, 0);
    gt_out->visible_c2 = ImageU8(w, h, 0);
    gt_out->visible_projector = ImageU8(w, h, 0);
    gt_out->depth_c1 = ImageD(w, h, std::numeric_limits<double>::quiet_NaN());
  }

  std::vector<double> shadow_rows(h, 0.0);

  parallel_for(0, h, [&](int y) {
    // one deterministic stream per (camera, row); draws are consumed in x
    // then frame order, so results do not depend on scheduling
    Rng rng = Rng::stream(rc.seed, 1000 + static_cast<uint64_t>(camera_id), y);
    const double a = rc.ambient;
    const double b = rc.modulation;
    for (int x = 0; x < w; ++x) {
      const Ray ray = back_project(cam, Vec2(x, y));
      double t_hit;
      bool lit = false;
      Vec2 proj_px = Vec2::Zero();
      const bool hit = ray_cast(scene, ray, &t_hit);
      Vec3 p = Vec3::Zero();
      if (hit) {
        p = ray.at(t_hit);
        const bool vis_proj = visible_from(scene, p, rig.projector.center());
        if (vis_proj) {
          try {
            proj_px = true_projector_coordinate(rig, rc, p);
            // only the chip area emits light
            lit = rig.projector.contains(proj_px);
          } catch (const NonPositiveDepth&) {
            lit = false;
          }
        }
        if (gt_out) {
          const size_t idx = static_cast<size_t>(y) * w + x;
          gt_out->hit[idx] = p;
          gt_out->has_hit(x, y) = 1;
          gt_out->depth_c1(x, y) = rig.cam1.pose.to_device(p).z();
          gt_out->visible_projector(x, y) = lit ? 1 : 0;
          gt_out->visible_c2(x, y) = visible_from(scene, p, rig.cam2.center()) ? 1 : 0;
        }
        if (!lit) shadow_rows[y] += 1.0;
      }

      for (size_t d = 0; d < directions.size(); ++d) {
        const FringeConfig& cfg = directions[d].cfg;
        const double coord = directions[d].along_y ? proj_px.y() : proj_px.x();
        const double phase = kTwoPi * coord / cfg.period_px;
        for (int k = 0; k < cfg.steps; ++k) {
          double v = a;
          if (lit) v += b * std::cos(phase - kTwoPi * k / cfg.steps);
          if (rc.noise_sigma > 0) v += rc.noise_sigma * rng.gaussian();
          if (rc.quantize_8bit) v = quantize(v);
          captures[d]->fringe.frames[k](x, y) = v;
        }
        const int bits = graycode_bits(cfg.fringe_count);
        int m = 0;
        if (lit)
          m = std::clamp(static_cast<int>(std::floor(coord / cfg.period_px)), 0,
                         cfg.fringe_count - 1);
        const uint32_t code = gray_encode(static_cast<uint32_t>(m));
        for (int bit = 0; bit < bits; ++bit) {
          const bool on = lit && ((code >> (bits - 1 - bit)) & 1u);
          double v = a + (on ? b : -b);
          if (!lit) v = a;
          if (rc.noise_sigma > 0) v += rc.noise_sigma * rng.gaussian();
          if (rc.quantize_8bit) v = quantize(v);
          captures[d]->gray[bit](x, y) = v;
        }
      }
    }
  });

  if (shadow_fraction) {
    double shadowed = 0;
    size_t hits = 0;
    for (int y = 0; y < h; ++y) shadowed += shadow_rows[y];
    if (gt_out)
      for (uint8_t v : gt_out->has_hit.raw()) hits += v;
    *shadow_fraction = hits > 0 ? shadowed / static_cast<double>(hits) : 0.0;
  }
}

}  // namespace

Vec2 true_projector_coordinate(const SensorRig& rig, const RenderConfig& rc, const Vec3& point) {
  const PinholeDevice& proj = rig.projector;
  const Vec3 pd = proj.pose.to_device(point);
  if (!(pd.z() > 0)) throw NonPositiveDepth("point behind the projector");
  Vec2 n = proj.lens.distort(Vec2(pd.x() / pd.z(), pd.y() / pd.z()));
  n = rc.injected_projector_distortion.distort(n);
  return Vec2(proj.intrinsics.fx * n.x() + proj.intrinsics.cx,
              proj.intrinsics.fy * n.y() + proj.intrinsics.cy);
}

RenderOutput render(const Scene& scene, const SensorRig& rig, const FringeConfig& cfg,
                    const RenderConfig& rc) {
  rc.validate();
  Scene baked = scene;
  baked.bake();

  const Vec3 center(0, 0, 0.5 * (baked.z_min() + baked.z_max()));
  for (const PinholeDevice* dev : {&rig.cam1, &rig.cam2, &rig.projector}) {
    const Vec3 to_scene = center - dev->center();
    if (dev->optical_axis().dot(to_scene) <= 0)
      throw DegenerateRig("device does not face the scene");
  }

  std::vector<DirectionPatterns> directions{{cfg, false}};
  RenderOutput out;
  out.fringe_y = FringeConfig::for_projector(cfg.period_px, cfg.steps,
                                             rig.projector.intrinsics.height);
  if (rc.enable_second_direction) directions.push_back({out.fringe_y, true});

  if (rc.enable_second_direction) {
    out.cam1_y.emplace();
    out.cam2_y.emplace();
  }
  {
    std::vector<CameraCapture*> caps{&out.cam1};
    if (rc.enable_second_direction) caps.push_back(&*out.cam1_y);
    render_camera(baked, rig, rig.cam1, 1, directions, rc, caps, &out.gt,
                  &out.shadowed_fraction);
  }
  {
    std::vector<CameraCapture*> caps{&out.cam2};
    if (rc.enable_second_direction) caps.push_back(&*out.cam2_y);
    render_camera(baked, rig, rig.cam2, 2, directions, rc, caps, nullptr, nullptr);
  }
  return out;
}

Metrics evaluate(const PointCloud& cloud, const PointCloud& reference, const GroundTruth& gt,
                 double tol_mm) {
  if (reference.empty()) throw EmptyReference("Gray-code reference cloud is empty");
  Metrics m;
  m.n_reference = reference.size();
  m.n_points = cloud.size();
  double sq = 0;
  for (const CloudPoint& p : cloud) {
    const int x = static_cast<int>(std::lround(p.pixel.x()));
    const int y = static_cast<int>(std::lround(p.pixel.y()));
    bool is_true = false;
    if (gt.has_hit.contains(x, y) && gt.has_hit(x, y)) {
      const double err = (p.position - gt.hit_at(x, y)).norm();
      if (err <= tol_mm) {
        is_true = true;
        sq += err * err;
      }
    }
    if (is_true) ++m.n_true;
  }
  m.com = 100.0 * static_cast<double>(m.n_true) / static_cast<double>(m.n_reference);
  m.fp = 100.0 * static_cast<double>(m.n_points - m.n_true) / static_cast<double>(m.n_reference);
  m.rms_mm = m.n_true > 0 ? std::sqrt(sq / static_cast<double>(m.n_true)) : 0.0;
  return m;
}

namespace {

// Minimal rotation taking unit vector `from` to unit vector `to` (Rodrigues).
Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  const Vec3 axis = from.cross(to);
  const double s = axis.norm();
  const double c = from.dot(to);
  if (s < 1e-15) return c > 0 ? Mat3::Identity() : Mat3(-Mat3::Identity());
  const Vec3 a = axis / s;
  Mat3 k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return Mat3::Identity() + s * k + (1 - c) * (k * k);
}

// Pose that maps `target` onto the given pixel instead of the principal
// point; needed for projectors whose principal point lies off the chip.
Pose aim_at_pixel(const Vec3& eye, const Vec3& target, const Intrinsics& intr, const Vec2& pixel) {
  const Pose base = Pose::look_at(eye, target);
  const Vec3 v0 = Vec3((pixel.x() - intr.cx) / intr.fx, (pixel.y() - intr.cy) / intr.fy, 1.0)
                      .normalized();
  const Mat3 q = rotation_between(Vec3::UnitZ(), v0);
  return Pose(q * base.rotation, -(q * base.rotation) * eye);
}

}  // namespace

SensorRig make_rig(const RigSpec& spec) {
  const Vec3 target(0, 0, spec.convergence_depth);
  const double half = spec.baseline_cc / 2;

  PinholeDevice cam1;
  cam1.kind = DeviceKind::Camera;
  cam1.intrinsics = Intrinsics(spec.focal_px, spec.focal_px, (spec.image_width - 1) / 2.0,
                               (spec.image_height - 1) / 2.0, spec.image_width, spec.image_height);
  cam1.lens = spec.cam_lens;
  cam1.pose = Pose::look_at(Vec3(-half, 0, 0), target);

  PinholeDevice cam2 = cam1;
  cam2.pose = Pose::look_at(Vec3(half, 0, 0), target);

  PinholeDevice proj;
  proj.kind = DeviceKind::Projector;
  proj.intrinsics = Intrinsics(spec.projector_focal_px, spec.projector_focal_px, spec.projector_cx,
                               spec.projector_cy, spec.projector_width, spec.projector_height);
  proj.lens = spec.projector_lens;
  const double px = -half + spec.projector_frac * spec.baseline_cc;
  proj.pose = aim_at_pixel(Vec3(px, 0, 0), target, proj.intrinsics,
                           Vec2((spec.projector_width - 1) / 2.0,
                                (spec.projector_height - 1) / 2.0));

  return SensorRig(cam1, cam2, proj);
}

}  // namespace fringefree
