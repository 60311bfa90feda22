#pragma once

#include <cstdint>
#include <vector>

#include "fringefree/correspond.hpp"
#include "fringefree/geometry.hpp"
#include "fringefree/phase.hpp"

namespace fringefree {

enum class MatchMode : uint8_t { M1 = 0, M2 = 1 };

struct MatchParams {
  double thr = 0.1 * 3.14159265358979323846;  // radians of projector phase
  MatchMode mode = MatchMode::M1;

  MatchParams() = default;
  MatchParams(double threshold, MatchMode m) : thr(threshold), mode(m) {
    if (!(thr > 0)) throw ConfigError("match threshold must be > 0");
  }
};

struct MatchedPoint {
  Vec3 point = Vec3::Zero();   // the CC-mode point, mm
  double dst = 0;              // 3D distance between the paired CC and CP points, mm
  double phase_residual = 0;   // radians of projector phase
  Vec2 pixel = Vec2::Zero();   // source C1 pixel
};

enum class PixelStatus : uint8_t {
  InvalidPhase = 0,
  NoCandidates = 1,
  AllRejected = 2,
  Matched = 3,
};

struct CloudPoint {
  Vec3 position = Vec3::Zero();
  double dst = 0;
  double phase_residual = 0;
  uint8_t status = static_cast<uint8_t>(PixelStatus::Matched);
  Vec2 pixel = Vec2::Zero();
};

using PointCloud = std::vector<CloudPoint>;

struct ReconstructionResult {
  PointCloud cloud;
  Image<uint8_t> status;  // PixelStatus per C1 pixel
  size_t count(PixelStatus s) const;
};

// Pairs every CC candidate with every CP candidate; a pair survives when the
// wrapped difference between the projector phase of the CC point and the CP
// candidate phase stays within thr. Mode m1 returns at most the single best
// pair (phase residual, then dst, then fringe index); mode m2 returns all
// surviving pairs deduplicated to one best CP partner per CC candidate.
std::vector<MatchedPoint> match_candidates(const CandidateSet& cands, const SensorRig& rig,
                                           const FringeConfig& cfg, const MatchParams& p);

// Full codeless pipeline over all valid C1 pixels.
ReconstructionResult reconstruct(const PhaseMap& map1, const PhaseMap& map2, const SensorRig& rig,
                                 const MeasurementVolume& mv, const FringeConfig& cfg,
                                 const MatchParams& p);

// Gray-code reference pipeline: absolute phase per pixel, direct equality
// search along the epipolar line, CC triangulation. Also reports the
// measured absolute projector coordinate per point (and the y coordinate
// when rotated-direction maps are supplied).
struct GraycodeReconstruction {
  PointCloud cloud;
  std::vector<double> projector_x;  // measured absolute column per point
  std::vector<double> projector_y;  // empty unless y maps were supplied
};

GraycodeReconstruction reconstruct_graycode_full(
    const PhaseMap& map1, const GrayCodeMap& gc1, const PhaseMap& map2, const GrayCodeMap& gc2,
    const SensorRig& rig, const FringeConfig& cfg, const PhaseMap* map1_y = nullptr,
    const GrayCodeMap* gc1_y = nullptr, const FringeConfig* cfg_y = nullptr);

PointCloud reconstruct_graycode(const PhaseMap& map1, const GrayCodeMap& gc1, const PhaseMap& map2,
                                const GrayCodeMap& gc2, const SensorRig& rig,
                                const FringeConfig& cfg);

// Removes points with fewer than min_neighbors other points within radius.
PointCloud filter_outliers(const PointCloud& cloud, double radius, int min_neighbors);

}  // namespace fringefree
