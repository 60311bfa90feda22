#pragma once

#include "fringefree/errors.hpp"

namespace fringefree {

// Box-shaped measurement volume. Lateral extent (mvw x mvh) is centered on
// the world origin; the depth slab [d_min, d_min + mvd] is measured as
// z-depth in the frame of the primary camera.
struct MeasurementVolume {
  double mvw = 0;    // width, mm
  double mvh = 0;    // height, mm
  double mvd = 0;    // depth, mm (may be zero)
  double d_min = 0;  // minimal object distance, mm

  MeasurementVolume() = default;
  MeasurementVolume(double w, double h, double d, double dmin)
      : mvw(w), mvh(h), mvd(d), d_min(dmin) {
    validate();
  }

  void validate() const {
    if (!(mvw > 0) || !(mvh > 0) || !(d_min > 0) || !(mvd >= 0))
      throw NonPositiveVolume("measurement volume requires mvw, mvh, d_min > 0 and mvd >= 0");
  }

  double z_near() const { return d_min; }
  double z_far() const { return d_min + mvd; }
};

}  // namespace fringefree
