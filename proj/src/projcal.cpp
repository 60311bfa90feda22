#include "fringefree/projcal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fringefree/mathutil.hpp"

namespace fringefree {

namespace {

// Lens-only projector projection (grid correction deliberately excluded).
Vec2 project_lens_only(const PinholeDevice& proj, const Vec3& p) {
  const Vec3 pd = proj.pose.to_device(p);
  if (!(pd.z() > 0)) throw PointBehindProjector("trusted point behind the projector");
  const Vec2 n = proj.lens.distort(Vec2(pd.x() / pd.z(), pd.y() / pd.z()));
  return Vec2(proj.intrinsics.fx * n.x() + proj.intrinsics.cx,
              proj.intrinsics.fy * n.y() + proj.intrinsics.cy);
}

}  // namespace

std::vector<PlaneMeasurement> measure_planes(const SensorRig& rig, const MeasurementVolume& mv,
                                             const FringeConfig& cfg, const RenderConfig& rc) {
  const double depths[3] = {mv.z_near(), mv.z_near() + mv.mvd / 2, mv.z_far()};
  const PlaneMeasurement::Label labels[3] = {PlaneMeasurement::Label::Near,
                                             PlaneMeasurement::Label::Center,
                                             PlaneMeasurement::Label::Far};
  std::vector<PlaneMeasurement> out;
  out.reserve(3);
  for (int i = 0; i < 3; ++i) {
    const Scene scene = Scene::plane(depths[i], std::max(mv.mvw, mv.mvh));
    RenderOutput ro;
    try {
      ro = render(scene, rig, cfg, rc);
    } catch (const Error& e) {
      throw SimulationFailed(std::string("plane render failed: ") + e.what());
    }
    const PhaseMap m1 = decode_phase(ro.cam1.fringe, cfg);
    const PhaseMap m2 = decode_phase(ro.cam2.fringe, cfg);
    const GrayCodeMap g1 =
        decode_graycode(ro.cam1.gray, stack_mean(ro.cam1.fringe), cfg.fringe_count);
    const GrayCodeMap g2 =
        decode_graycode(ro.cam2.gray, stack_mean(ro.cam2.fringe), cfg.fringe_count);

    GraycodeReconstruction rec;
    if (rc.enable_second_direction && ro.cam1_y) {
      const PhaseMap m1y = decode_phase(ro.cam1_y->fringe, ro.fringe_y);
      const GrayCodeMap g1y =
          decode_graycode(ro.cam1_y->gray, stack_mean(ro.cam1_y->fringe), ro.fringe_y.fringe_count);
      rec = reconstruct_graycode_full(m1, g1, m2, g2, rig, cfg, &m1y, &g1y, &ro.fringe_y);
    } else {
      rec = reconstruct_graycode_full(m1, g1, m2, g2, rig, cfg);
    }

    PlaneMeasurement pm;
    pm.label = labels[i];
    pm.has_y = !rec.projector_y.empty();
    pm.points.reserve(rec.cloud.size());
    pm.measured.reserve(rec.cloud.size());
    for (size_t k = 0; k < rec.cloud.size(); ++k) {
      const double yp = pm.has_y ? rec.projector_y[k] : 0.0;
      if (pm.has_y && std::isnan(yp)) continue;  // rotated decode invalid here
      pm.points.push_back(rec.cloud[k]);
      pm.measured.emplace_back(rec.projector_x[k], yp);
    }
    out.push_back(std::move(pm));
  }
  return out;
}

std::vector<ResidualSample> compute_residuals(const PlaneMeasurement& meas,
                                              const SensorRig& rig) {
  if (meas.points.size() != meas.measured.size())
    throw LengthMismatch("plane measurement points and phase coordinates differ in count");
  std::vector<ResidualSample> out;
  out.reserve(meas.points.size());
  const auto& grid = rig.projector.grid_correction;
  for (size_t i = 0; i < meas.points.size(); ++i) {
    const Vec2 ideal = project_lens_only(rig.projector, meas.points[i].position);
    Vec2 measured = meas.measured[i];
    if (!meas.has_y) measured.y() = ideal.y();  // only dx observable
    if (grid) measured = grid->undistort(measured);
    ResidualSample s;
    s.ideal = ideal;
    s.d = ideal - measured;
    if (!meas.has_y) s.d.y() = 0.0;
    out.push_back(s);
  }
  return out;
}

DistortionGrid build_grid(const std::vector<ResidualSample>& residuals, double grid_spacing,
                          int projector_width, int projector_height, bool has_y) {
  if (residuals.empty()) throw EmptyResiduals("no residual samples to average");
  DistortionGrid grid = DistortionGrid::zeros(grid_spacing, Vec2(0, 0),
                                              static_cast<double>(projector_width),
                                              static_cast<double>(projector_height));
  grid.directions = has_y ? DistortionGrid::Directions::XY : DistortionGrid::Directions::XOnly;

  std::vector<Vec2> sum(grid.values.size(), Vec2::Zero());
  std::vector<double> weight(grid.values.size(), 0.0);

  for (const ResidualSample& s : residuals) {
    double gx = (s.ideal.x() - grid.origin.x()) / grid.spacing;
    double gy = (s.ideal.y() - grid.origin.y()) / grid.spacing;
    gx = std::clamp(gx, 0.0, static_cast<double>(grid.nx - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(grid.ny - 1));
    const int ix = std::min(static_cast<int>(gx), std::max(grid.nx - 2, 0));
    const int iy = std::min(static_cast<int>(gy), std::max(grid.ny - 2, 0));
    const double fx = gx - ix, fy = gy - iy;
    const int ix1 = std::min(ix + 1, grid.nx - 1);
    const int iy1 = std::min(iy + 1, grid.ny - 1);
    const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int idx[4] = {iy * grid.nx + ix, iy * grid.nx + ix1, iy1 * grid.nx + ix,
                        iy1 * grid.nx + ix1};
    for (int k = 0; k < 4; ++k) {
      if (w[k] <= 0) continue;
      sum[idx[k]] += w[k] * s.d;
      weight[idx[k]] += w[k];
      grid.support[idx[k]] += 1;
    }
  }

  for (size_t i = 0; i < grid.values.size(); ++i) {
    if (weight[i] > 0) {
      grid.values[i] = sum[i] / weight[i];
    } else {
      grid.support[i] = 0;
    }
  }

  // fill unsupported nodes from the nearest supported node
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const size_t i = static_cast<size_t>(iy) * grid.nx + ix;
      if (grid.support[i] > 0) continue;
      double best = std::numeric_limits<double>::infinity();
      Vec2 value = Vec2::Zero();
      for (int jy = 0; jy < grid.ny; ++jy) {
        for (int jx = 0; jx < grid.nx; ++jx) {
          const size_t j = static_cast<size_t>(jy) * grid.nx + jx;
          if (grid.support[j] == 0) continue;
          const double d2 = static_cast<double>((jx - ix) * (jx - ix) + (jy - iy) * (jy - iy));
          if (d2 < best) {
            best = d2;
            value = grid.values[j];
          }
        }
      }
      grid.values[i] = value;  // zero when nothing is supported anywhere
      grid.extrapolated[i] = 1;
    }
  }

  if (!has_y)
    for (auto& v : grid.values) v.y() = 0.0;
  return grid;
}

EpipolarError epipolar_line_error(const SensorRig& rig,
                                  const std::vector<std::pair<Vec2, Vec2>>& correspondences) {
  if (correspondences.empty()) throw EmptyInput("no correspondences for the epipolar error");
  const Mat3 f = fundamental_matrix(rig.cam1, rig.cam2);
  EpipolarError err;
  for (const auto& [p1, p2] : correspondences) {
    const Vec3 line = f * Vec3(p1.x(), p1.y(), 1.0);
    const double d = point_line_distance(line, p2);
    err.mean_px += d;
    err.max_px = std::max(err.max_px, d);
  }
  err.mean_px /= static_cast<double>(correspondences.size());
  return err;
}

double cpd_mean(const std::vector<Vec3>& cc_points, const std::vector<Vec3>& cp_points) {
  if (cc_points.size() != cp_points.size())
    throw LengthMismatch("corresponding clouds differ in size");
  if (cc_points.empty()) throw EmptyInput("empty clouds");
  double sum = 0;
  for (size_t i = 0; i < cc_points.size(); ++i) sum += (cc_points[i] - cp_points[i]).norm();
  return sum / static_cast<double>(cc_points.size());
}

double cpd_mean(const PointCloud& cc_cloud, const PointCloud& cp_cloud) {
  if (cc_cloud.size() != cp_cloud.size())
    throw LengthMismatch("corresponding clouds differ in size");
  if (cc_cloud.empty()) throw EmptyInput("empty clouds");
  double sum = 0;
  for (size_t i = 0; i < cc_cloud.size(); ++i)
    sum += (cc_cloud[i].position - cp_cloud[i].position).norm();
  return sum / static_cast<double>(cc_cloud.size());
}

CalibrationRun calibrate_projector_grid(const SensorRig& rig, const MeasurementVolume& mv,
                                        const FringeConfig& cfg, const RenderConfig& rc,
                                        double grid_spacing) {
  const std::vector<PlaneMeasurement> planes = measure_planes(rig, mv, cfg, rc);
  CalibrationRun run;
  bool has_y = false;
  for (const PlaneMeasurement& pm : planes) {
    const std::vector<ResidualSample> rs = compute_residuals(pm, rig);
    has_y = has_y || pm.has_y;
    run.residuals.insert(run.residuals.end(), rs.begin(), rs.end());
  }
  run.grid = build_grid(run.residuals, grid_spacing, rig.projector.intrinsics.width,
                        rig.projector.intrinsics.height, has_y);
  for (const ResidualSample& s : run.residuals) {
    run.mean_residual_px += s.d.norm();
    run.max_residual_px = std::max(run.max_residual_px, s.d.norm());
  }
  if (!run.residuals.empty()) run.mean_residual_px /= static_cast<double>(run.residuals.size());
  return run;
}

CpdResult cpd_from_measurements(const std::vector<PlaneMeasurement>& meas, const SensorRig& rig,
                                const MeasurementVolume& mv) {
  CpdResult res;
  double sum = 0;
  // pad the slab so roots displaced by the distortion stay bracketed for
  // planes sitting exactly on the near/far boundary
  const double pad = std::max(10.0, 0.05 * mv.mvd);
  const MeasurementVolume slab(mv.mvw * 1.05, mv.mvh * 1.05, mv.mvd + 2 * pad,
                               std::max(mv.d_min - pad, 1.0));
  for (const PlaneMeasurement& pm : meas) {
    for (size_t i = 0; i < pm.points.size(); ++i) {
      const Ray ray = back_project(rig.cam1, pm.points[i].pixel);
      const auto cp = cp_point_from_absolute(ray, pm.measured[i].x(), rig, slab);
      if (!cp) continue;
      sum += (pm.points[i].position - *cp).norm();
      ++res.n;
    }
  }
  if (res.n > 0) res.cpd_mn = sum / static_cast<double>(res.n);
  return res;
}

}  // namespace fringefree
