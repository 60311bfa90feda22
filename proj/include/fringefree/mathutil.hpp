#pragma once

#include <cmath>

namespace fringefree {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Wrap into [0, 2*pi).
inline double wrap_two_pi(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;  // fmod can round up to 2*pi for tiny negatives
  return w;
}

// Wrap into (-pi, pi].
inline double wrap_pi(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w = kPi;
  return w;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

// Illinois false-position root refinement on a bracketing interval.
// f(a) and f(b) must have opposite signs.
template <typename F>
double refine_root(F&& f, double a, double b, double fa, double fb, int max_iter = 30,
                   double tol = 1e-7) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  int last_side = 0;
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    const double m = (fa * b - fb * a) / (fa - fb);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
      if (last_side == -1) fb *= 0.5;
      last_side = -1;
    } else {
      b = m;
      fb = fm;
      if (last_side == +1) fa *= 0.5;
      last_side = +1;
    }
  }
  return (fa * b - fb * a) / (fa - fb);
}

}  // namespace fringefree
