#pragma once

#include <filesystem>

#include "fringefree/unwrap.hpp"

namespace fringefree {

// Point clouds as PLY with per-vertex properties x, y, z, dst,
// phase_residual, status, pixel_u, pixel_v.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud, bool binary = true);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace fringefree
