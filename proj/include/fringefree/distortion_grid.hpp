#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "fringefree/errors.hpp"

namespace fringefree {

// Regular grid of 2D correction vectors over the projector image plane,
// standing in for an analytic distortion function. Node vectors are stored
// in the convention d = ideal - measured, indexed by the ideal (lens-only)
// pixel position: distort() predicts the physically measured coordinate of
// an ideal pixel, undistort() recovers the ideal coordinate from a measured
// phase coordinate.
struct DistortionGrid {
  enum class Directions : uint8_t { XY = 0, XOnly = 1 };

  double spacing = 32.0;                       // node pitch, projector pixels
  Eigen::Vector2d origin{0.0, 0.0};            // position of node (0, 0)
  int nx = 0, ny = 0;                          // node counts
  std::vector<Eigen::Vector2d> values;         // row-major, [iy * nx + ix]
  std::vector<int> support;                    // samples contributing per node
  std::vector<uint8_t> extrapolated;           // 1 where filled from a neighbor
  Directions directions = Directions::XY;

  static DistortionGrid zeros(double spacing, const Eigen::Vector2d& origin, double width,
                              double height);

  bool empty() const { return values.empty(); }
  const Eigen::Vector2d& node(int ix, int iy) const { return values[iy * nx + ix]; }
  Eigen::Vector2d& node(int ix, int iy) { return values[iy * nx + ix]; }
  Eigen::Vector2d node_position(int ix, int iy) const {
    return origin + spacing * Eigen::Vector2d(ix, iy);
  }

  // Bilinear interpolation of the correction field; positions outside the
  // grid rectangle are clamped to the border.
  Eigen::Vector2d interpolate(const Eigen::Vector2d& pos) const;

  // ideal -> measured (forward model of the projector distortion).
  Eigen::Vector2d distort(const Eigen::Vector2d& ideal) const;

  // measured -> ideal. Fixed point, <= 20 iterations, 1e-10 px tolerance.
  Eigen::Vector2d undistort(const Eigen::Vector2d& measured) const;

  double max_norm() const;
};

}  // namespace fringefree
