#include "fringefree/correspond.hpp"

#include <algorithm>
#include <cmath>

#include "fringefree/mathutil.hpp"

namespace fringefree {

SensorRig::SensorRig(PinholeDevice c1, PinholeDevice c2, PinholeDevice proj)
    : cam1(std::move(c1)), cam2(std::move(c2)), projector(std::move(proj)) {
  if (cam1.kind != DeviceKind::Camera || cam2.kind != DeviceKind::Camera ||
      projector.kind != DeviceKind::Projector)
    throw std::invalid_argument("sensor rig expects camera, camera, projector");
  refresh_derived();
}

void SensorRig::refresh_derived() {
  baseline_cc = (cam1.center() - cam2.center()).norm();
  baseline_cp = (cam1.center() - projector.center()).norm();
  const double c = std::clamp(cam1.optical_axis().dot(cam2.optical_axis()), -1.0, 1.0);
  tau_cc_deg = rad_to_deg(std::acos(c));
}

int predict_candidate_count(const MeasurementVolume& mv, int fringe_count, double baseline,
                            double d_min) {
  if (!(mv.mvw > 0) || !(d_min > 0))
    throw NonPositiveVolume("candidate prediction requires mvw > 0 and d_min > 0");
  const double n = mv.mvd * (fringe_count * baseline - mv.mvw) / (mv.mvw * d_min);
  if (n <= 0) return 0;
  return static_cast<int>(std::ceil(n));
}

namespace {

// Sample parameters uniformly in inverse depth so image-plane steps stay
// near-uniform along the ray.
std::vector<double> inverse_depth_samples(const RayInterval& iv, int count) {
  std::vector<double> ts(count + 1);
  if (iv.t_near <= 0.0) {  // linear fallback; C1 pixel rays always start in front
    for (int i = 0; i <= count; ++i)
      ts[i] = iv.t_near + (iv.t_far - iv.t_near) * i / count;
    return ts;
  }
  const double w0 = 1.0 / iv.t_near;
  const double w1 = 1.0 / iv.t_far;
  for (int i = 0; i <= count; ++i) {
    const double w = w0 + (w1 - w0) * i / count;
    ts[i] = 1.0 / w;
  }
  ts.front() = iv.t_near;
  ts.back() = iv.t_far;
  return ts;
}

double c1_depth(const SensorRig& rig, const Vec3& p) { return rig.cam1.pose.to_device(p).z(); }

bool depth_in_slab(const SensorRig& rig, const MeasurementVolume& mv, const Vec3& p) {
  const double z = c1_depth(rig, p);
  const double slack = 0.01 * std::max(mv.mvd, 1.0);
  return z >= mv.z_near() - slack && z <= mv.z_far() + slack;
}

}  // namespace

std::vector<CcCandidate> find_cc_candidates(const Vec2& pixel, double phi1, const PhaseMap& map2,
                                            const SensorRig& rig, const MeasurementVolume& mv) {
  std::vector<CcCandidate> out;
  const Ray ray = back_project(rig.cam1, pixel);
  RayInterval iv;
  try {
    iv = clip_ray_to_volume(rig.cam1, ray, mv);
  } catch (const RayMissesVolume&) {
    return out;
  }
  if (iv.t_far - iv.t_near < 1e-12) return out;

  // Walk at <= 1 px image steps; the step count comes from the chord length
  // between the projected slab endpoints.
  double chord = 0;
  try {
    const Vec2 a = project(rig.cam2, ray.at(iv.t_near));
    const Vec2 b = project(rig.cam2, ray.at(iv.t_far));
    chord = (b - a).norm();
  } catch (const NonPositiveDepth&) {
    chord = 4.0 * std::hypot(map2.width(), map2.height());
  }
  const int steps = std::clamp(static_cast<int>(std::ceil(chord * 1.25)) + 1, 2, 200000);
  const std::vector<double> ts = inverse_depth_samples(iv, steps);

  bool have_prev = false;
  double prev_diff = 0;
  Vec2 prev_pos = Vec2::Zero();
  for (double t : ts) {
    Vec2 pos;
    try {
      pos = project(rig.cam2, ray.at(t));
    } catch (const NonPositiveDepth&) {
      have_prev = false;
      continue;
    }
    double ph;
    if (!sample_phase(map2, pos, &ph)) {
      have_prev = false;
      continue;
    }
    const double diff = wrap_pi(ph - phi1);
    if (have_prev) {
      // A genuine zero crossing steps by less than pi; the wrap jump at +-pi
      // steps by nearly 2 pi and is not a correspondence.
      const bool sign_change = (prev_diff < 0.0) != (diff < 0.0) || diff == 0.0;
      const bool small_step = std::abs(diff - prev_diff) < kPi;
      if (sign_change && small_step && prev_diff != 0.0) {
        double f = diff == prev_diff ? 0.0 : prev_diff / (prev_diff - diff);
        // refine against the cubic phase surface between the two samples
        auto eval = [&](double s, double* v) {
          double p;
          if (!sample_phase_cubic(map2, prev_pos + s * (pos - prev_pos), &p)) return false;
          *v = wrap_pi(p - phi1);
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
          const Ray r2 = back_project(rig.cam2, sub);
          const TriangulationResult tri = triangulate(ray, r2);
          if (depth_in_slab(rig, mv, tri.point)) out.push_back(CcCandidate{sub, tri.point, tri.gap});
        } catch (const NumericalError&) {
          // skip degenerate crossings
        }
      }
    }
    have_prev = true;
    prev_diff = diff;
    prev_pos = pos;
  }
  return out;
}

std::vector<CpCandidate> find_cp_candidates(const Vec2& pixel, double phi1, const SensorRig& rig,
                                            const MeasurementVolume& mv, const FringeConfig& cfg) {
  std::vector<CpCandidate> out;
  const Ray ray = back_project(rig.cam1, pixel);
  RayInterval iv;
  try {
    iv = clip_ray_to_volume(rig.cam1, ray, mv);
  } catch (const RayMissesVolume&) {
    return out;
  }
  if (iv.t_far - iv.t_near < 1e-12) return out;

  const double lambda = cfg.period_px;
  const double offset = phi1 / kTwoPi;  // fractional fringe coordinate

  auto projector_x = [&](double t, double* x) {
    try {
      *x = project(rig.projector, ray.at(t)).x();
    } catch (const NonPositiveDepth&) {
      return false;
    }
    return true;
  };

  double xa = 0, xb = 0;
  double span = 2.0 * cfg.fringe_count * lambda;
  if (projector_x(iv.t_near, &xa) && projector_x(iv.t_far, &xb)) span = std::abs(xb - xa);
  const int steps =
      std::clamp(static_cast<int>(std::ceil(3.0 * span / lambda)) + 4, 8, 200000);
  const std::vector<double> ts = inverse_depth_samples(iv, steps);

  bool have_prev = false;
  double prev_g = 0, prev_t = 0;
  for (double t : ts) {
    double x;
    if (!projector_x(t, &x)) {
      have_prev = false;
      continue;
    }
    const double g = x / lambda - offset;  // integer exactly at phase-consistent columns
    if (have_prev && g != prev_g) {
      const int m_lo = static_cast<int>(std::ceil(std::min(prev_g, g)));
      const int m_hi = static_cast<int>(std::floor(std::max(prev_g, g)));
      for (int m = m_lo; m <= m_hi; ++m) {
        if (m < 0 || m >= cfg.fringe_count) continue;
        if (static_cast<double>(m) == prev_g) continue;  // counted at the previous step
        double f = (m - prev_g) / (g - prev_g);
        double t_cross = prev_t + f * (t - prev_t);
        // one secant refinement against the true projector model
        double x_mid;
        if (projector_x(t_cross, &x_mid)) {
          const double g_mid = x_mid / lambda - offset;
          const double denom = (g_mid - prev_g);
          if (std::abs(denom) > 1e-15) {
            const double f2 = (m - prev_g) / denom;
            const double t2 = prev_t + f2 * (t_cross - prev_t);
            if (t2 > std::min(prev_t, t) - 1e-9 && t2 < std::max(prev_t, t) + 1e-9)
              t_cross = t2;
          }
        }
        const Vec3 p = ray.at(t_cross);
        if (depth_in_slab(rig, mv, p))
          out.push_back(CpCandidate{(m + offset) * lambda, m, p, 0.0});
      }
    }
    have_prev = true;
    prev_g = g;
    prev_t = t;
  }
  std::sort(out.begin(), out.end(),
            [](const CpCandidate& a, const CpCandidate& b) { return a.period_index < b.period_index; });
  return out;
}

CandidateSet find_candidates(const Vec2& pixel, double phi1, const PhaseMap& map2,
                             const SensorRig& rig, const MeasurementVolume& mv,
                             const FringeConfig& cfg) {
  CandidateSet set;
  set.pixel = pixel;
  set.cc = find_cc_candidates(pixel, phi1, map2, rig, mv);
  set.cp = find_cp_candidates(pixel, phi1, rig, mv, cfg);
  return set;
}

std::optional<Vec3> cp_point_from_absolute(const Ray& c1_ray, double xp, const SensorRig& rig,
                                           const MeasurementVolume& mv) {
  RayInterval iv;
  try {
    iv = clip_ray_to_volume(rig.cam1, c1_ray, mv);
  } catch (const RayMissesVolume&) {
    return std::nullopt;
  }
  auto eval = [&](double t, double* diff) {
    try {
      *diff = project(rig.projector, c1_ray.at(t)).x() - xp;
    } catch (const NonPositiveDepth&) {
      return false;
    }
    return true;
  };
  const int steps = 64;
  const std::vector<double> ts = inverse_depth_samples(iv, steps);
  bool have_prev = false;
  double prev_d = 0, prev_t = 0;
  for (double t : ts) {
    double d;
    if (!eval(t, &d)) {
      have_prev = false;
      continue;
    }
    if (have_prev && ((prev_d <= 0 && d >= 0) || (prev_d >= 0 && d <= 0))) {
      double lo = prev_t, hi = t, dlo = prev_d;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        double dm;
        if (!eval(mid, &dm)) break;
        if ((dlo <= 0) == (dm <= 0)) {
          lo = mid;
          dlo = dm;
        } else {
          hi = mid;
        }
      }
      return c1_ray.at(0.5 * (lo + hi));
    }
    have_prev = true;
    prev_d = d;
    prev_t = t;
  }
  return std::nullopt;
}

}  // namespace fringefree
