#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fringefree/correspond.hpp"
#include "fringefree/geometry.hpp"
#include "fringefree/image.hpp"
#include "fringefree/phase.hpp"
#include "fringefree/unwrap.hpp"

namespace fringefree {

// Parametric measurement surfaces, all expressed as a single-valued depth
// field z(x, y) over the world lateral plane (z toward the scene).
struct Scene {
  enum class Kind { Plane, PyramidStump, Heightfield };

  Kind kind = Kind::Plane;
  double extent = 200;  // half-size of the lateral footprint, mm

  // plane
  double plane_depth = 600;

  // pyramid stump: square frustum rising from a base plane toward the sensor
  double stump_base_depth = 620;
  double stump_base = 120;
  double stump_top = 60;
  double stump_height = 40;

  // heightfield: smooth random bumps over a base plane, sampled to a relief
  // grid; steep bumps self-shadow the oblique views
  double hf_base_depth = 620;
  double hf_amplitude = 32;
  int hf_bumps = 14;
  int hf_seed = 1;
  int hf_resolution = 512;

  static Scene plane(double depth, double extent = 200);
  static Scene pyramid_stump(double base_depth, double base = 120, double top = 60,
                             double height = 40, double extent = 200);
  static Scene heightfield(double base_depth, double amplitude = 32, int bumps = 14, int seed = 1,
                           double extent = 200);

  // Depth of the surface at a lateral position; false outside the footprint.
  bool depth_at(double x, double y, double* z) const;
  double z_min() const;  // closest surface depth
  double z_max() const;

  void bake();  // samples the heightfield relief; no-op for analytic kinds

 private:
  std::vector<float> relief_;  // sampled heights above the base plane
  int relief_n_ = 0;
};

struct RenderConfig {
  double noise_sigma = 0.0;           // additive intensity noise, std dev
  double ambient = 0.5;               // A
  double modulation = 0.3;            // B; requires A - B >= 0 and A + B <= 1
  LensDistortion injected_projector_distortion;  // unknown truth to calibrate away
  bool enable_second_direction = false;          // rotated fringes for 2D residuals
  bool quantize_8bit = false;
  uint64_t seed = 0;

  void validate() const {
    if (ambient - modulation < 0 || ambient + modulation > 1)
      throw ConfigError("render config requires A - B >= 0 and A + B <= 1");
    if (noise_sigma < 0 || noise_sigma > 1) throw ConfigError("noise sigma outside [0, 1]");
  }
};

struct GroundTruth {
  int width = 0, height = 0;
  std::vector<Vec3> hit;      // world point per C1 pixel (valid when has_hit)
  ImageU8 has_hit;
  ImageU8 visible_c2;
  ImageU8 visible_projector;
  ImageD depth_c1;            // z-depth in the C1 frame, NaN on miss

  const Vec3& hit_at(int x, int y) const { return hit[static_cast<size_t>(y) * width + x]; }
};

// One projected direction: fringe stack plus Gray-code bit planes, per camera.
struct CameraCapture {
  ImageStack fringe;
  std::vector<ImageD> gray;
};

struct RenderOutput {
  CameraCapture cam1, cam2;
  std::optional<CameraCapture> cam1_y, cam2_y;  // rotated direction
  FringeConfig fringe_y;                        // config for the rotated direction
  GroundTruth gt;
  double shadowed_fraction = 0;  // C1 pixels hit but not projector-visible
};

// Renders the fringe and Gray-code sequences of `scene` through the full
// device models. The physical projector is the rig projector's lens model
// followed by the injected distortion; an installed grid correction is part
// of the reconstruction model, never of the rendered physics.
RenderOutput render(const Scene& scene, const SensorRig& rig, const FringeConfig& cfg,
                    const RenderConfig& rc);

// Absolute projector coordinate of a world point through the physical
// (injected-distortion) projector model.
Vec2 true_projector_coordinate(const SensorRig& rig, const RenderConfig& rc, const Vec3& point);

struct Metrics {
  double com = 0;     // completeness, percent of the reference count
  double fp = 0;      // false positives, percent of the reference count
  double rms_mm = 0;  // over true points
  size_t n_points = 0;
  size_t n_true = 0;
  size_t n_reference = 0;
};

// Scores a cloud against the Gray-code reference count and the ground truth:
// a point is true when it lies within tol_mm of its pixel's ground-truth hit.
Metrics evaluate(const PointCloud& cloud, const PointCloud& reference, const GroundTruth& gt,
                 double tol_mm);

// Convergent two-camera-plus-projector rig looking down +z at the volume
// center, cameras at +-baseline/2 along x.
struct RigSpec {
  int image_width = 640, image_height = 480;
  double focal_px = 1370;
  double baseline_cc = 150;
  double projector_frac = 0.46;  // projector position along the baseline, 0.5 = midway
  double convergence_depth = 600;
  int projector_width = 1024, projector_height = 768;
  double projector_focal_px = 2200;
  double projector_cx = 512, projector_cy = -80;  // principal point may leave the chip
  LensDistortion cam_lens;
  LensDistortion projector_lens;
};

SensorRig make_rig(const RigSpec& spec);

}  // namespace fringefree
