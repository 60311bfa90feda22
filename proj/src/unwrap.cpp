#include "fringefree/unwrap.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include "fringefree/mathutil.hpp"
#include "fringefree/parallel.hpp"

namespace fringefree {

size_t ReconstructionResult::count(PixelStatus s) const {
  size_t n = 0;
  for (uint8_t v : status.raw())
    if (v == static_cast<uint8_t>(s)) ++n;
  return n;
}

std::vector<MatchedPoint> match_candidates(const CandidateSet& cands, const SensorRig& rig,
                                           const FringeConfig& cfg, const MatchParams& p) {
  std::vector<MatchedPoint> out;
  if (cands.cc.empty() || cands.cp.empty()) return out;

  struct Pair {
    double residual;
    double dst;
    int m;
    size_t cc_index;
    Vec3 point;
  };
  std::vector<Pair> survivors;

  for (size_t i = 0; i < cands.cc.size(); ++i) {
    const CcCandidate& cc = cands.cc[i];
    double phase_cc;
    try {
      phase_cc = kTwoPi * project(rig.projector, cc.point).x() / cfg.period_px;
    } catch (const NonPositiveDepth&) {
      continue;
    }
    for (const CpCandidate& cp : cands.cp) {
      const double phase_cp = kTwoPi * cp.projector_x / cfg.period_px;
      const double residual = std::abs(wrap_pi(phase_cc - phase_cp));
      if (residual > p.thr) continue;
      survivors.push_back(Pair{residual, (cc.point - cp.point).norm(), cp.period_index, i,
                               cc.point});
    }
  }
  if (survivors.empty()) return out;

  auto better = [](const Pair& a, const Pair& b) {
    return std::tie(a.residual, a.dst, a.m) < std::tie(b.residual, b.dst, b.m);
  };

  if (p.mode == MatchMode::M1) {
    const Pair& best = *std::min_element(survivors.begin(), survivors.end(), better);
    out.push_back(MatchedPoint{best.point, best.dst, best.residual, cands.pixel});
    return out;
  }

  // m2: keep the best CP partner per CC candidate.
  std::unordered_map<size_t, size_t> best_for_cc;
  for (size_t k = 0; k < survivors.size(); ++k) {
    auto it = best_for_cc.find(survivors[k].cc_index);
    if (it == best_for_cc.end() || better(survivors[k], survivors[it->second]))
      best_for_cc[survivors[k].cc_index] = k;
  }
  std::vector<size_t> keep;
  keep.reserve(best_for_cc.size());
  for (const auto& [cc_index, k] : best_for_cc) keep.push_back(k);
  // deterministic order by cc enumeration
  std::sort(keep.begin(), keep.end(),
            [&](size_t a, size_t b) { return survivors[a].cc_index < survivors[b].cc_index; });
  for (size_t k : keep)
    out.push_back(MatchedPoint{survivors[k].point, survivors[k].dst, survivors[k].residual,
                               cands.pixel});
  return out;
}

ReconstructionResult reconstruct(const PhaseMap& map1, const PhaseMap& map2, const SensorRig& rig,
                                 const MeasurementVolume& mv, const FringeConfig& cfg,
                                 const MatchParams& p) {
  if (map1.width() != rig.cam1.intrinsics.width || map1.height() != rig.cam1.intrinsics.height ||
      map2.width() != rig.cam2.intrinsics.width || map2.height() != rig.cam2.intrinsics.height)
    throw DimensionMismatch("phase map dimensions do not match the cameras");

  const int w = map1.width(), h = map1.height();
  ReconstructionResult res;
  res.status = Image<uint8_t>(w, h, static_cast<uint8_t>(PixelStatus::InvalidPhase));
  std::vector<PointCloud> rows(h);

  parallel_for(0, h, [&](int y) {
    PointCloud& row = rows[y];
    for (int x = 0; x < w; ++x) {
      if (!map1.is_valid(x, y)) continue;
      const Vec2 pixel(x, y);
      const CandidateSet cands =
          find_candidates(pixel, map1.phase(x, y), map2, rig, mv, cfg);
      if (cands.cc.empty() || cands.cp.empty()) {
        res.status(x, y) = static_cast<uint8_t>(PixelStatus::NoCandidates);
        continue;
      }
      const std::vector<MatchedPoint> matches = match_candidates(cands, rig, cfg, p);
      if (matches.empty()) {
        res.status(x, y) = static_cast<uint8_t>(PixelStatus::AllRejected);
        continue;
      }
      res.status(x, y) = static_cast<uint8_t>(PixelStatus::Matched);
      for (const MatchedPoint& m : matches)
        row.push_back(CloudPoint{m.point, m.dst, m.phase_residual,
                                 static_cast<uint8_t>(PixelStatus::Matched), m.pixel});
    }
  });

  for (const PointCloud& row : rows)
    res.cloud.insert(res.cloud.end(), row.begin(), row.end());
  return res;
}

GraycodeReconstruction reconstruct_graycode_full(const PhaseMap& map1, const GrayCodeMap& gc1,
                                                 const PhaseMap& map2, const GrayCodeMap& gc2,
                                                 const SensorRig& rig, const FringeConfig& cfg,
                                                 const PhaseMap* map1_y, const GrayCodeMap* gc1_y,
                                                 const FringeConfig* cfg_y) {
  if (!map1.phase.same_size(gc1.index) || !map2.phase.same_size(gc2.index) ||
      map1.width() != rig.cam1.intrinsics.width || map2.width() != rig.cam2.intrinsics.width ||
      map1.height() != rig.cam1.intrinsics.height || map2.height() != rig.cam2.intrinsics.height)
    throw DimensionMismatch("phase / Gray-code map dimensions are inconsistent");

  const ImageD abs2 = absolute_projector_map(map2, gc2, cfg);
  ImageD abs1_y;
  if (map1_y && gc1_y && cfg_y) abs1_y = absolute_projector_map(*map1_y, *gc1_y, *cfg_y);

  const int w = map1.width(), h = map1.height();
  // the search covers any plausible-scale scene in front of the rig
  const MeasurementVolume search(1e7, 1e7, 1e7 - 10.0, 10.0);

  struct RowOut {
    PointCloud cloud;
    std::vector<double> xs, ys;
  };
  std::vector<RowOut> rows(h);

  parallel_for(0, h, [&](int y) {
    RowOut& row = rows[y];
    for (int x = 0; x < w; ++x) {
      if (!map1.is_valid(x, y) || !gc1.valid(x, y)) continue;
      const double xp1 = absolute_projector_x(map1.phase(x, y), gc1.index(x, y), cfg);
      const Vec2 pixel(x, y);
      const Ray ray = back_project(rig.cam1, pixel);
      RayInterval iv;
      try {
        iv = clip_ray_to_image(rig.cam2, ray, clip_ray_to_volume(rig.cam1, ray, search));
      } catch (const RayMissesVolume&) {
        continue;
      }
      if (iv.t_far - iv.t_near < 1e-12) continue;

      double chord = 2.0 * std::hypot(w, h);
      try {
        const Vec2 a = project(rig.cam2, ray.at(iv.t_near));
        const Vec2 b = project(rig.cam2, ray.at(iv.t_far));
        chord = (b - a).norm();
      } catch (const NonPositiveDepth&) {
      }
      const int steps = std::clamp(static_cast<int>(std::ceil(chord * 1.25)) + 1, 8, 200000);

      bool have_prev = false;
      double prev_diff = 0;
      Vec2 prev_pos = Vec2::Zero();
      for (int i = 0; i <= steps; ++i) {
        const double wa = 1.0 / iv.t_near, wb = 1.0 / iv.t_far;
        const double t = 1.0 / (wa + (wb - wa) * i / steps);
        Vec2 pos;
        try {
          pos = project(rig.cam2, ray.at(t));
        } catch (const NonPositiveDepth&) {
          have_prev = false;
          continue;
        }
        double xp2;
        if (!sample_absolute(abs2, pos, &xp2)) {
          have_prev = false;
          continue;
        }
        const double diff = xp2 - xp1;
        if (have_prev && prev_diff != 0.0 &&
            ((prev_diff < 0.0) != (diff < 0.0) || diff == 0.0) &&
            std::abs(diff - prev_diff) < cfg.period_px) {
          double f = diff == prev_diff ? 0.0 : prev_diff / (prev_diff - diff);
          auto eval = [&](double s, double* v) {
            double xs;
            if (!sample_absolute_cubic(abs2, prev_pos + s * (pos - prev_pos), &xs)) return false;
            *v = xs - xp1;
            return true;
          };
          double fa, fb;
          if (eval(0.0, &fa) && eval(1.0, &fb) && fa != fb && (fa <= 0) != (fb <= 0)) {
            f = refine_root(
                [&](double s) {
                  double v = 0;
                  eval(s, &v);
                  return v;
                },
                0.0, 1.0, fa, fb, 30, 1e-7);
          }
          const Vec2 sub = prev_pos + f * (pos - prev_pos);
          try {
            const TriangulationResult tri = triangulate(ray, back_project(rig.cam2, sub));
            // a true correspondence has near-intersecting rays; phase-consistent
            // crossings of points hidden from C2 do not
            const double depth = rig.cam1.pose.to_device(tri.point).z();
            const double gap_px = tri.gap * rig.cam1.intrinsics.fx / std::max(depth, 1.0);
            if (gap_px < 0.3) {
              row.cloud.push_back(CloudPoint{tri.point, 0.0, 0.0,
                                             static_cast<uint8_t>(PixelStatus::Matched), pixel});
              row.xs.push_back(xp1);
              if (!abs1_y.empty()) {
                const double yp = abs1_y(x, y);
                row.ys.push_back(yp);  // NaN when the rotated decode is invalid here
              }
              break;  // absolute phase is unique; the first clean crossing is the match
            }
          } catch (const NumericalError&) {
          }
        }
        have_prev = true;
        prev_diff = diff;
        prev_pos = pos;
      }
    }
  });

  GraycodeReconstruction out;
  for (RowOut& row : rows) {
    out.cloud.insert(out.cloud.end(), row.cloud.begin(), row.cloud.end());
    out.projector_x.insert(out.projector_x.end(), row.xs.begin(), row.xs.end());
    out.projector_y.insert(out.projector_y.end(), row.ys.begin(), row.ys.end());
  }
  return out;
}

PointCloud reconstruct_graycode(const PhaseMap& map1, const GrayCodeMap& gc1, const PhaseMap& map2,
                                const GrayCodeMap& gc2, const SensorRig& rig,
                                const FringeConfig& cfg) {
  return reconstruct_graycode_full(map1, gc1, map2, gc2, rig, cfg).cloud;
}

namespace {

struct CellKey {
  int64_t x, y, z;
  bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
  size_t operator()(const CellKey& k) const {
    uint64_t h = static_cast<uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<uint64_t>(k.y) * 0xbf58476d1ce4e5b9ULL;
    h ^= static_cast<uint64_t>(k.z) * 0x94d049bb133111ebULL;
    return static_cast<size_t>(h ^ (h >> 29));
  }
};

}  // namespace

PointCloud filter_outliers(const PointCloud& cloud, double radius, int min_neighbors) {
  if (!(radius > 0)) throw std::invalid_argument("outlier filter radius must be > 0");
  if (cloud.empty() || min_neighbors <= 0) return cloud;

  std::unordered_map<CellKey, std::vector<size_t>, CellHash> grid;
  grid.reserve(cloud.size());
  const double inv = 1.0 / radius;
  auto key_of = [&](const Vec3& p) {
    return CellKey{static_cast<int64_t>(std::floor(p.x() * inv)),
                   static_cast<int64_t>(std::floor(p.y() * inv)),
                   static_cast<int64_t>(std::floor(p.z() * inv))};
  };
  for (size_t i = 0; i < cloud.size(); ++i) grid[key_of(cloud[i].position)].push_back(i);

  const double r2 = radius * radius;
  PointCloud out;
  out.reserve(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    const CellKey c = key_of(cloud[i].position);
    int neighbors = 0;
    for (int dz = -1; dz <= 1 && neighbors < min_neighbors; ++dz)
      for (int dy = -1; dy <= 1 && neighbors < min_neighbors; ++dy)
        for (int dx = -1; dx <= 1 && neighbors < min_neighbors; ++dx) {
          const auto it = grid.find(CellKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (size_t j : it->second) {
            if (j == i) continue;
            if ((cloud[j].position - cloud[i].position).squaredNorm() <= r2) {
              if (++neighbors >= min_neighbors) break;
            }
          }
        }
    if (neighbors >= min_neighbors) out.push_back(cloud[i]);
  }
  return out;
}

}  // namespace fringefree
