#include "fringefree/distortion_grid.hpp"

#include <algorithm>
#include <cmath>

namespace fringefree {

DistortionGrid DistortionGrid::zeros(double spacing, const Eigen::Vector2d& origin, double width,
                                     double height) {
  DistortionGrid g;
  g.spacing = spacing;
  g.origin = origin;
  g.nx = static_cast<int>(std::ceil(width / spacing)) + 1;
  g.ny = static_cast<int>(std::ceil(height / spacing)) + 1;
  g.values.assign(static_cast<size_t>(g.nx) * g.ny, Eigen::Vector2d::Zero());
  g.support.assign(g.values.size(), 0);
  g.extrapolated.assign(g.values.size(), 0);
  return g;
}

Eigen::Vector2d DistortionGrid::interpolate(const Eigen::Vector2d& pos) const {
  if (empty()) return Eigen::Vector2d::Zero();
  double gx = (pos.x() - origin.x()) / spacing;
  double gy = (pos.y() - origin.y()) / spacing;
  gx = std::clamp(gx, 0.0, static_cast<double>(nx - 1));
  gy = std::clamp(gy, 0.0, static_cast<double>(ny - 1));
  int ix = std::min(static_cast<int>(gx), nx - 2 >= 0 ? nx - 2 : 0);
  int iy = std::min(static_cast<int>(gy), ny - 2 >= 0 ? ny - 2 : 0);
  if (nx == 1) ix = 0;
  if (ny == 1) iy = 0;
  const double fx = gx - ix;
  const double fy = gy - iy;
  const int ix1 = std::min(ix + 1, nx - 1);
  const int iy1 = std::min(iy + 1, ny - 1);
  return (1 - fx) * (1 - fy) * node(ix, iy) + fx * (1 - fy) * node(ix1, iy) +
         (1 - fx) * fy * node(ix, iy1) + fx * fy * node(ix1, iy1);
}

Eigen::Vector2d DistortionGrid::distort(const Eigen::Vector2d& ideal) const {
  return ideal - interpolate(ideal);
}

Eigen::Vector2d DistortionGrid::undistort(const Eigen::Vector2d& measured) const {
  // measured = ideal - d(ideal); solve for ideal.
  Eigen::Vector2d q = measured;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d next = measured + interpolate(q);
    if ((next - q).norm() < 1e-10) return next;
    q = next;
  }
  if ((distort(q) - measured).norm() > 1e-10)
    throw UndistortDiverged("distortion grid inversion did not converge");
  return q;
}

double DistortionGrid::max_norm() const {
  double m = 0;
  for (const auto& v : values) m = std::max(m, v.norm());
  return m;
}

}  // namespace fringefree
