#pragma once

// Independent reference computations used to freeze expected values. These
// deliberately avoid the library's own solution paths: brute-force scans,
// bisection and closed-form identities only.

#include <cmath>
#include <functional>
#include <limits>

#include "fringefree/geometry.hpp"

namespace fringefree::oracle {

// Minimum of a unimodal function by golden-section search.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iterations = 120) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Closest approach of two rays by nested scan plus golden-section refinement.
struct RayDistanceResult {
  double t1 = 0, t2 = 0;
  double distance = 0;
  Vec3 midpoint = Vec3::Zero();
};

inline RayDistanceResult closest_approach_scan(const Ray& r1, const Ray& r2, double t_lo,
                                               double t_hi, int coarse = 4000) {
  auto inner_best = [&](double t1) {
    // distance from point r1(t1) to ray r2 minimized over t2 (closed scan)
    const Vec3 p = r1.at(t1);
    auto g = [&](double t2) { return (p - r2.at(t2)).squaredNorm(); };
    double best_t2 = t_lo, best = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= coarse; ++j) {
      const double t2 = t_lo + (t_hi - t_lo) * j / coarse;
      const double v = g(t2);
      if (v < best) {
        best = v;
        best_t2 = t2;
      }
    }
    const double span = (t_hi - t_lo) / coarse;
    best_t2 = golden_min(g, best_t2 - span, best_t2 + span);
    return std::make_pair(best_t2, g(best_t2));
  };

  double best_t1 = t_lo, best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= coarse; ++i) {
    const double t1 = t_lo + (t_hi - t_lo) * i / coarse;
    const double v = inner_best(t1).second;
    if (v < best_val) {
      best_val = v;
      best_t1 = t1;
    }
  }
  const double span = (t_hi - t_lo) / coarse;
  auto outer = [&](double t1) { return inner_best(t1).second; };
  best_t1 = golden_min(outer, best_t1 - span, best_t1 + span);

  RayDistanceResult res;
  res.t1 = best_t1;
  res.t2 = inner_best(best_t1).first;
  res.distance = std::sqrt(inner_best(best_t1).second);
  res.midpoint = 0.5 * (r1.at(res.t1) + r2.at(res.t2));
  return res;
}

// Scan over t1 with the closed-form point-to-line distance as the inner
// step; still independent of the coupled two-ray solve used by the library.
inline RayDistanceResult closest_approach_fast(const Ray& r1, const Ray& r2, double t_lo,
                                               double t_hi, int coarse = 20000) {
  auto dist2 = [&](double t1) {
    const Vec3 v = r1.at(t1) - r2.origin;
    const double along = v.dot(r2.direction);
    return v.squaredNorm() - along * along;
  };
  double best_t1 = t_lo, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= coarse; ++i) {
    const double t1 = t_lo + (t_hi - t_lo) * i / coarse;
    const double v = dist2(t1);
    if (v < best) {
      best = v;
      best_t1 = t1;
    }
  }
  // dist2 is quadratic in t1, so a parabola vertex through three scan points
  // nails the minimum without the noise floor of golden-section steps
  const double h = 8.0 * (t_hi - t_lo) / coarse;
  for (int round = 0; round < 2; ++round) {
    const double fm = dist2(best_t1 - h), f0 = dist2(best_t1), fp = dist2(best_t1 + h);
    const double denom = fp - 2 * f0 + fm;
    if (std::abs(denom) < 1e-300) break;
    best_t1 -= h * (fp - fm) / (2 * denom);
  }

  RayDistanceResult res;
  res.t1 = best_t1;
  res.t2 = (r1.at(best_t1) - r2.origin).dot(r2.direction);
  res.distance = std::sqrt(std::max(dist2(best_t1), 0.0));
  res.midpoint = 0.5 * (r1.at(res.t1) + r2.at(res.t2));
  return res;
}

// Inverts a monotone scalar distortion along the +x axis by grid scan plus
// bisection; returns the normalized x that distorts to `target`.
inline double invert_radial_1d(const LensDistortion& lens, double target, double lo = 0.0,
                               double hi = 1.0) {
  auto g = [&](double x) { return lens.distort(Vec2(x, 0)).x() - target; };
  const int n = 4000;
  double a = lo, b = hi;
  double ga = g(a);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double gx = g(x);
    if ((ga <= 0 && gx >= 0) || (ga >= 0 && gx <= 0)) {
      b = x;
      break;
    }
    a = x;
    ga = gx;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if ((g(a) <= 0) == (g(mid) <= 0))
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace fringefree::oracle
