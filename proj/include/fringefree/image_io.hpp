#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fringefree/image.hpp"
#include "fringefree/phase.hpp"
#include "fringefree/simulate.hpp"

namespace fringefree {

// 8- or 16-bit binary PGM (P5). 16-bit samples are big-endian per the format.
void write_pgm(const std::filesystem::path& path, const ImageD& image, int bits = 16);
void write_pgm_u8(const std::filesystem::path& path, const ImageU8& image);
ImageD read_pgm(const std::filesystem::path& path);

// Stack directory layout: <prefix>_fringe_NN.pgm, <prefix>_gray_NN.pgm plus a
// JSON sidecar naming K, the period, the fringe count and the frame order.
void write_capture(const std::filesystem::path& dir, const std::string& prefix,
                   const CameraCapture& capture, const FringeConfig& cfg, int bits = 16);
CameraCapture read_capture(const std::filesystem::path& dir, const std::string& prefix,
                           FringeConfig* cfg_out = nullptr);

// Ground truth: float32 planes (C1 depth, has_hit, visible_c2,
// visible_projector) with a JSON header. Hit points are rebuilt from the
// camera on load.
void write_ground_truth(const std::filesystem::path& dir, const std::string& stem,
                        const GroundTruth& gt);
GroundTruth read_ground_truth(const std::filesystem::path& dir, const std::string& stem,
                              const PinholeDevice& cam1);

}  // namespace fringefree
