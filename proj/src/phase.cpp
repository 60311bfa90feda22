#include "fringefree/phase.hpp"

#include <cmath>
#include <limits>

#include "fringefree/mathutil.hpp"

namespace fringefree {

FringeConfig FringeConfig::for_projector(double period, int k, int projector_width) {
  const int n = static_cast<int>(std::ceil(projector_width / period));
  return FringeConfig(period, k, n);
}

PhaseMap decode_phase(const ImageStack& stack, const FringeConfig& cfg,
                      double modulation_threshold) {
  if (stack.steps() != cfg.steps)
    throw StackSizeMismatch("stack has " + std::to_string(stack.steps()) + " frames, expected " +
                            std::to_string(cfg.steps));
  const int w = stack.width(), h = stack.height();
  for (const auto& f : stack.frames)
    if (f.width() != w || f.height() != h) throw StackSizeMismatch("frame dimensions differ");

  const int k = cfg.steps;
  std::vector<double> sk(k), ck(k);
  for (int i = 0; i < k; ++i) {
    sk[i] = std::sin(kTwoPi * i / k);
    ck[i] = std::cos(kTwoPi * i / k);
  }

  PhaseMap out;
  out.phase = ImageD(w, h);
  out.modulation = ImageD(w, h);
  out.valid = ImageU8(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0, c = 0;
      for (int i = 0; i < k; ++i) {
        const double v = stack.frames[i](x, y);
        s += v * sk[i];
        c += v * ck[i];
      }
      const double b = (2.0 / k) * std::hypot(s, c);
      out.phase(x, y) = wrap_two_pi(std::atan2(s, c));
      out.modulation(x, y) = b;
      out.valid(x, y) = b >= modulation_threshold ? 1 : 0;
    }
  }
  return out;
}

uint32_t gray_encode(uint32_t value) { return value ^ (value >> 1); }

uint32_t gray_decode(uint32_t code) {
  uint32_t value = 0;
  for (; code; code >>= 1) value ^= code;
  return value;
}

int graycode_bits(int fringe_count) {
  int bits = 0;
  while ((1 << bits) < fringe_count) ++bits;
  return std::max(bits, 1);
}

GrayCodeMap decode_graycode(const std::vector<ImageD>& bit_planes, const ImageD& reference,
                            int fringe_count, double confidence) {
  const int bits = graycode_bits(fringe_count);
  if (static_cast<int>(bit_planes.size()) != bits)
    throw BitPlaneCountMismatch("expected " + std::to_string(bits) + " bit planes, got " +
                                std::to_string(bit_planes.size()));
  const int w = reference.width(), h = reference.height();
  for (const auto& p : bit_planes)
    if (p.width() != w || p.height() != h) throw BitPlaneCountMismatch("bit plane size differs");

  GrayCodeMap out;
  out.index = Image<int32_t>(w, h, 0);
  out.valid = ImageU8(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      uint32_t code = 0;
      double margin = std::numeric_limits<double>::infinity();
      for (int b = 0; b < bits; ++b) {
        const double v = bit_planes[b](x, y) - reference(x, y);
        margin = std::min(margin, std::abs(v));
        code = (code << 1) | (v > 0 ? 1u : 0u);
      }
      const uint32_t m = gray_decode(code);
      out.index(x, y) = static_cast<int32_t>(m);
      out.valid(x, y) = (margin >= confidence && m < static_cast<uint32_t>(fringe_count)) ? 1 : 0;
    }
  }
  return out;
}

double absolute_projector_x(double phase, int index, const FringeConfig& cfg) {
  if (index < 0 || index >= cfg.fringe_count)
    throw IndexOutOfRange("fringe index " + std::to_string(index) + " outside [0, " +
                          std::to_string(cfg.fringe_count) + ")");
  return (index + phase / kTwoPi) * cfg.period_px;
}

ImageD stack_mean(const ImageStack& stack) {
  ImageD mean(stack.width(), stack.height(), 0.0);
  for (const auto& f : stack.frames)
    for (size_t i = 0; i < mean.size(); ++i) mean.data()[i] += f.data()[i];
  const double inv = stack.steps() > 0 ? 1.0 / stack.steps() : 0.0;
  for (size_t i = 0; i < mean.size(); ++i) mean.data()[i] *= inv;
  return mean;
}

bool sample_phase(const PhaseMap& map, const Vec2& pos, double* phase_out) {
  const int x0 = static_cast<int>(std::floor(pos.x()));
  const int y0 = static_cast<int>(std::floor(pos.y()));
  if (x0 < 0 || y0 < 0 || x0 + 1 >= map.width() || y0 + 1 >= map.height()) return false;
  if (!map.is_valid(x0, y0) || !map.is_valid(x0 + 1, y0) || !map.is_valid(x0, y0 + 1) ||
      !map.is_valid(x0 + 1, y0 + 1))
    return false;
  const double fx = pos.x() - x0;
  const double fy = pos.y() - y0;
  double s = 0, c = 0;
  const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const double ph[4] = {map.phase(x0, y0), map.phase(x0 + 1, y0), map.phase(x0, y0 + 1),
                        map.phase(x0 + 1, y0 + 1)};
  for (int i = 0; i < 4; ++i) {
    s += w[i] * std::sin(ph[i]);
    c += w[i] * std::cos(ph[i]);
  }
  if (s == 0 && c == 0) return false;
  *phase_out = wrap_two_pi(std::atan2(s, c));
  return true;
}

ImageD absolute_projector_map(const PhaseMap& phase, const GrayCodeMap& gc,
                              const FringeConfig& cfg) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ImageD out(phase.width(), phase.height(), nan);
  for (int y = 0; y < phase.height(); ++y)
    for (int x = 0; x < phase.width(); ++x)
      if (phase.is_valid(x, y) && gc.valid(x, y))
        out(x, y) = absolute_projector_x(phase.phase(x, y), gc.index(x, y), cfg);
  return out;
}

bool sample_absolute(const ImageD& abs_map, const Vec2& pos, double* out) {
  const int x0 = static_cast<int>(std::floor(pos.x()));
  const int y0 = static_cast<int>(std::floor(pos.y()));
  if (x0 < 0 || y0 < 0 || x0 + 1 >= abs_map.width() || y0 + 1 >= abs_map.height()) return false;
  const double fx = pos.x() - x0;
  const double fy = pos.y() - y0;
  const double v00 = abs_map(x0, y0), v10 = abs_map(x0 + 1, y0), v01 = abs_map(x0, y0 + 1),
               v11 = abs_map(x0 + 1, y0 + 1);
  if (std::isnan(v00) || std::isnan(v10) || std::isnan(v01) || std::isnan(v11)) return false;
  *out = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11;
  return true;
}

namespace {

inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t *
                  (p2 - p0 +
                   t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0)));
}

}  // namespace

bool sample_phase_cubic(const PhaseMap& map, const Vec2& pos, double* phase_out) {
  const int x1 = static_cast<int>(std::floor(pos.x()));
  const int y1 = static_cast<int>(std::floor(pos.y()));
  if (x1 < 1 || y1 < 1 || x1 + 2 >= map.width() || y1 + 2 >= map.height())
    return sample_phase(map, pos, phase_out);
  for (int dy = -1; dy <= 2; ++dy)
    for (int dx = -1; dx <= 2; ++dx)
      if (!map.is_valid(x1 + dx, y1 + dy)) return sample_phase(map, pos, phase_out);

  const double tx = pos.x() - x1;
  const double ty = pos.y() - y1;
  double rows_s[4], rows_c[4];
  for (int dy = -1; dy <= 2; ++dy) {
    double s[4], c[4];
    for (int dx = -1; dx <= 2; ++dx) {
      const double ph = map.phase(x1 + dx, y1 + dy);
      s[dx + 1] = std::sin(ph);
      c[dx + 1] = std::cos(ph);
    }
    rows_s[dy + 1] = catmull_rom(s[0], s[1], s[2], s[3], tx);
    rows_c[dy + 1] = catmull_rom(c[0], c[1], c[2], c[3], tx);
  }
  const double sv = catmull_rom(rows_s[0], rows_s[1], rows_s[2], rows_s[3], ty);
  const double cv = catmull_rom(rows_c[0], rows_c[1], rows_c[2], rows_c[3], ty);
  if (sv == 0 && cv == 0) return false;
  *phase_out = wrap_two_pi(std::atan2(sv, cv));
  return true;
}

bool sample_absolute_cubic(const ImageD& abs_map, const Vec2& pos, double* out) {
  const int x1 = static_cast<int>(std::floor(pos.x()));
  const int y1 = static_cast<int>(std::floor(pos.y()));
  if (x1 < 1 || y1 < 1 || x1 + 2 >= abs_map.width() || y1 + 2 >= abs_map.height())
    return sample_absolute(abs_map, pos, out);
  double rows[4];
  for (int dy = -1; dy <= 2; ++dy) {
    double v[4];
    for (int dx = -1; dx <= 2; ++dx) {
      v[dx + 1] = abs_map(x1 + dx, y1 + dy);
      if (std::isnan(v[dx + 1])) return sample_absolute(abs_map, pos, out);
    }
    rows[dy + 1] = catmull_rom(v[0], v[1], v[2], v[3], pos.x() - x1);
  }
  *out = catmull_rom(rows[0], rows[1], rows[2], rows[3], pos.y() - y1);
  return true;
}

}  // namespace fringefree
