#pragma once

#include <optional>
#include <vector>

#include "fringefree/geometry.hpp"
#include "fringefree/phase.hpp"
#include "fringefree/volume.hpp"

namespace fringefree {

// Two cameras plus the projector. Baselines and the main triangulation angle
// are derived from the device poses on construction.
struct SensorRig {
  PinholeDevice cam1, cam2, projector;
  double baseline_cc = 0;   // |O1 O2|, mm
  double baseline_cp = 0;   // |O1 O_projector|, mm
  double tau_cc_deg = 0;    // angle between the camera optical axes

  SensorRig() = default;
  SensorRig(PinholeDevice c1, PinholeDevice c2, PinholeDevice proj);

  void refresh_derived();
};

struct CcCandidate {
  Vec2 c2 = Vec2::Zero();     // sub-pixel coordinate in the C2 image
  Vec3 point = Vec3::Zero();  // triangulated 3D point, mm
  double gap = 0;             // triangulation gap, mm
};

struct CpCandidate {
  double projector_x = 0;     // absolute projector column, px
  int period_index = 0;       // fringe index m
  Vec3 point = Vec3::Zero();  // intersection of the C1 ray with the phase surface
  double gap = 0;             // defined as 0 for CP candidates
};

struct CandidateSet {
  Vec2 pixel = Vec2::Zero();
  std::vector<CcCandidate> cc;
  std::vector<CpCandidate> cp;
};

// Eq.-style candidate count: n = ceil(mvd * (N b - mvw) / (mvw * d_min)),
// clamped below at zero. Throws NonPositiveVolume for mvw or d_min <= 0.
int predict_candidate_count(const MeasurementVolume& mv, int fringe_count, double baseline,
                            double d_min);

// All sub-pixel positions on the C2 epipolar segment where the wrapped phase
// difference to phi1 crosses zero, triangulated against the C1 pixel ray and
// restricted to the depth slab. An empty list is a legal result.
std::vector<CcCandidate> find_cc_candidates(const Vec2& pixel, double phi1, const PhaseMap& map2,
                                            const SensorRig& rig, const MeasurementVolume& mv);

// Intersections of the C1 pixel ray with the projector phase surfaces
// x_p = (m + phi1 / 2 pi) * period for every integer m in [0, N), restricted
// to the depth slab. Uses the full projector model including an installed
// grid correction.
std::vector<CpCandidate> find_cp_candidates(const Vec2& pixel, double phi1, const SensorRig& rig,
                                            const MeasurementVolume& mv, const FringeConfig& cfg);

CandidateSet find_candidates(const Vec2& pixel, double phi1, const PhaseMap& map2,
                             const SensorRig& rig, const MeasurementVolume& mv,
                             const FringeConfig& cfg);

// Point on the C1 pixel ray whose projector-model column equals the absolute
// coordinate xp (unique inside the slab); used by the Gray-code reference
// CP mode and by calibration. Empty when no crossing lies in the slab.
std::optional<Vec3> cp_point_from_absolute(const Ray& c1_ray, double xp, const SensorRig& rig,
                                           const MeasurementVolume& mv);

}  // namespace fringefree
