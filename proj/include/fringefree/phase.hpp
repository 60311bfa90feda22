#pragma once

#include <cstdint>
#include <vector>

#include "fringefree/errors.hpp"
#include "fringefree/geometry.hpp"
#include "fringefree/image.hpp"

namespace fringefree {

// Sinusoidal pattern parameters. Fringes vary along projector x (vertical
// stripes); frame k carries a pattern shift of +2*pi*k/steps.
struct FringeConfig {
  double period_px = 16;  // projector pixels per fringe
  int steps = 16;         // phase steps K
  int fringe_count = 64;  // N = projector width / period

  FringeConfig() = default;
  FringeConfig(double period, int k, int n) : period_px(period), steps(k), fringe_count(n) {
    validate();
  }
  static FringeConfig for_projector(double period, int k, int projector_width);

  void validate() const {
    if (period_px < 2 || steps < 3 || fringe_count < 1)
      throw ConfigError("fringe config requires period >= 2 px, steps >= 3, fringe count >= 1");
  }
};

struct ImageStack {
  std::vector<ImageD> frames;  // intensities in [0, 1]
  int width() const { return frames.empty() ? 0 : frames[0].width(); }
  int height() const { return frames.empty() ? 0 : frames[0].height(); }
  int steps() const { return static_cast<int>(frames.size()); }
};

struct PhaseMap {
  ImageD phase;       // wrapped phase in [0, 2*pi)
  ImageD modulation;  // per-pixel B >= 0
  ImageU8 valid;

  int width() const { return phase.width(); }
  int height() const { return phase.height(); }
  bool is_valid(int x, int y) const { return valid(x, y) != 0; }
};

struct GrayCodeMap {
  Image<int32_t> index;  // fringe index m in [0, N)
  ImageU8 valid;
};

inline constexpr double kDefaultModulationThreshold = 0.02;
inline constexpr double kDefaultGraycodeConfidence = 0.05;

// Per-pixel least-squares phase and modulation of a K-step stack:
//   phi = atan2(sum I_k sin(2 pi k / K), sum I_k cos(2 pi k / K))
//   B   = (2 / K) * sqrt(sums^2)
// Pixels with modulation below the threshold are marked invalid.
PhaseMap decode_phase(const ImageStack& stack, const FringeConfig& cfg,
                      double modulation_threshold = kDefaultModulationThreshold);

// Reflected-binary decode of MSB-first bit planes against a per-pixel
// reference image (typically the mean of the fringe stack). Pixels whose
// worst bit margin falls below `confidence` are invalid, as are decoded
// indices >= fringe_count.
GrayCodeMap decode_graycode(const std::vector<ImageD>& bit_planes, const ImageD& reference,
                            int fringe_count, double confidence = kDefaultGraycodeConfidence);

// x_p = (m + phi / 2 pi) * period. Throws IndexOutOfRange for m outside [0, N).
double absolute_projector_x(double phase, int index, const FringeConfig& cfg);

// Integer Gray-code helpers (exposed for the encoder and tests).
uint32_t gray_encode(uint32_t value);
uint32_t gray_decode(uint32_t code);
int graycode_bits(int fringe_count);

// Mean of the stack frames per pixel; the binarization reference for Gray decode.
ImageD stack_mean(const ImageStack& stack);

// Wrapped phase at a continuous image position, interpolated bilinearly in
// the (cos, sin) domain so 2*pi wraps do not bias the result. Returns false
// when any touched pixel is invalid or the position is out of bounds.
bool sample_phase(const PhaseMap& map, const Vec2& pos, double* phase_out);

// Absolute projector x per pixel from fused phase + Gray index; NaN where
// either input is invalid.
ImageD absolute_projector_map(const PhaseMap& phase, const GrayCodeMap& gc,
                              const FringeConfig& cfg);

// Bilinear sample of an absolute-coordinate map; false on NaN neighbors.
bool sample_absolute(const ImageD& abs_map, const Vec2& pos, double* out);

// Catmull-Rom sampling for sub-pixel refinement. Falls back to the bilinear
// variant when the 4x4 neighborhood is not fully valid.
bool sample_phase_cubic(const PhaseMap& map, const Vec2& pos, double* phase_out);
bool sample_absolute_cubic(const ImageD& abs_map, const Vec2& pos, double* out);

}  // namespace fringefree
