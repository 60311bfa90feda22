#pragma once

#include <vector>

#include "fringefree/correspond.hpp"
#include "fringefree/distortion_grid.hpp"
#include "fringefree/simulate.hpp"
#include "fringefree/unwrap.hpp"

namespace fringefree {

struct PlaneMeasurement {
  enum class Label { Near = 0, Center = 1, Far = 2 };
  Label label = Label::Near;
  PointCloud points;                  // trusted CC-mode points P_i
  std::vector<Vec2> measured;         // measured projector phase coordinate per point
  bool has_y = false;                 // y component measured (rotated direction)
};

struct ResidualSample {
  Vec2 ideal = Vec2::Zero();  // lens-only projection of the trusted point, px
  Vec2 d = Vec2::Zero();      // correction vector: ideal - measured, px
};

struct EpipolarError {
  double mean_px = 0;
  double max_px = 0;
};

// Gray-code CC-mode reconstruction of a plane at d_min, centrally, and at
// d_min + mvd, with the measured projector coordinate recorded per point.
std::vector<PlaneMeasurement> measure_planes(const SensorRig& rig, const MeasurementVolume& mv,
                                             const FringeConfig& cfg, const RenderConfig& rc);

// Correction vector per trusted point: d = ideal - measured, where ideal is
// the lens-only projector projection. An installed grid correction is first
// removed from the measured coordinate, so a second pass measures only the
// error remaining after the current grid. Points behind the projector throw.
std::vector<ResidualSample> compute_residuals(const PlaneMeasurement& meas, const SensorRig& rig);

// Averages residuals onto a regular node grid with bilinear weights;
// unsupported nodes are filled from their nearest supported neighbor and
// flagged extrapolated. Throws EmptyResiduals.
DistortionGrid build_grid(const std::vector<ResidualSample>& residuals, double grid_spacing,
                          int projector_width, int projector_height, bool has_y = true);

// Mean and max perpendicular distance of each undistorted C2 point to the
// epipolar line of its undistorted C1 partner. Throws EmptyInput.
EpipolarError epipolar_line_error(const SensorRig& rig,
                                  const std::vector<std::pair<Vec2, Vec2>>& correspondences);

// Mean 3D distance between index-aligned CC-mode and CP-mode points.
double cpd_mean(const PointCloud& cc_cloud, const PointCloud& cp_cloud);
double cpd_mean(const std::vector<Vec3>& cc_points, const std::vector<Vec3>& cp_points);

// Full three-plane calibration: measure, accumulate residuals, build the
// grid. Returns the grid plus the residual samples for reporting.
struct CalibrationRun {
  DistortionGrid grid;
  std::vector<ResidualSample> residuals;
  double mean_residual_px = 0;
  double max_residual_px = 0;
};

CalibrationRun calibrate_projector_grid(const SensorRig& rig, const MeasurementVolume& mv,
                                        const FringeConfig& cfg, const RenderConfig& rc,
                                        double grid_spacing = 32.0);

// CC and CP clouds over the same Gray-code points for the cpd_mn quality
// measure, using the rig's current projector model (with or without grid).
struct CpdResult {
  double cpd_mn = 0;
  size_t n = 0;
};

CpdResult cpd_from_measurements(const std::vector<PlaneMeasurement>& meas, const SensorRig& rig,
                                const MeasurementVolume& mv);

}  // namespace fringefree
