#include <doctest.h>

#include <cmath>

#include "fringefree/mathutil.hpp"
#include "fringefree/phase.hpp"
#include "fringefree/rng.hpp"

using namespace fringefree;

namespace {

// Synthesizes a K-step stack with a single constant signal per pixel.
ImageStack constant_stack(int k, double a, double b, double phi, int w = 2, int h = 2) {
  ImageStack st;
  for (int i = 0; i < k; ++i) {
    ImageD frame(w, h);
    frame.fill(a + b * std::cos(phi - kTwoPi * i / k));
    st.frames.push_back(frame);
  }
  return st;
}

}  // namespace

TEST_SUITE_BEGIN("phase");

TEST_CASE("decode_phase: zero-phase four-step signal") {
  // I_k = 0.5 + 0.4 cos(0 - 2 pi k / 4) = 0.9, 0.5, 0.1, 0.5
  const ImageStack st = constant_stack(4, 0.5, 0.4, 0.0);
  CHECK(st.frames[0](0, 0) == doctest::Approx(0.9));
  CHECK(st.frames[1](0, 0) == doctest::Approx(0.5));
  CHECK(st.frames[2](0, 0) == doctest::Approx(0.1));
  CHECK(st.frames[3](0, 0) == doctest::Approx(0.5));
  const PhaseMap m = decode_phase(st, FringeConfig(16, 4, 16));
  CHECK(std::abs(wrap_pi(m.phase(0, 0))) < 1e-12);
  CHECK(m.modulation(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(m.is_valid(0, 0));
}

TEST_CASE("decode_phase: eight-step synthesis round trip at phi = 1") {
  const ImageStack st = constant_stack(8, 0.5, 0.3, 1.0);
  const PhaseMap m = decode_phase(st, FringeConfig(16, 8, 16));
  CHECK(m.phase(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.modulation(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("decode_phase: constant frames have zero modulation and are invalid") {
  const ImageStack st = constant_stack(4, 0.5, 0.0, 0.0);
  const PhaseMap m = decode_phase(st, FringeConfig(16, 4, 16));
  CHECK(m.modulation(0, 0) < 1e-9);
  CHECK_FALSE(m.is_valid(0, 0));
}

TEST_CASE("decode_phase: stack size mismatch throws") {
  const ImageStack st = constant_stack(4, 0.5, 0.3, 0.0);
  CHECK_THROWS_AS(decode_phase(st, FringeConfig(16, 8, 16)), StackSizeMismatch);
}

TEST_CASE("decode_phase: synthesize-decode round trip over random signals") {
  Rng rng(99);
  for (int k : {4, 8, 16}) {
    double worst_phi = 0, worst_b = 0;
    for (int i = 0; i < 1000; ++i) {
      const double a = rng.uniform(0.3, 0.6);
      const double b = rng.uniform(0.1, 0.4);
      const double phi = rng.uniform(0.0, kTwoPi - 1e-9);
      const ImageStack st = constant_stack(k, a, b, phi, 1, 1);
      const PhaseMap m = decode_phase(st, FringeConfig(16, k, 16));
      worst_phi = std::max(worst_phi, std::abs(wrap_pi(m.phase(0, 0) - phi)));
      worst_b = std::max(worst_b, std::abs(m.modulation(0, 0) - b));
    }
    CHECK(worst_phi < 1e-10);
    CHECK(worst_b < 1e-10);
  }
}

TEST_CASE("decode_phase: double-precision identity via direct sums") {
  // the closed-form identity at double precision, bypassing float frames:
  // phi and B recovered to 1e-12 for K in {4, 8, 16}
  Rng rng(123);
  for (int k : {4, 8, 16}) {
    for (int i = 0; i < 200; ++i) {
      const double a = rng.uniform(0.3, 0.6);
      const double b = rng.uniform(0.1, 0.4);
      const double phi = rng.uniform(0.0, kTwoPi - 1e-9);
      double s = 0, c = 0;
      for (int j = 0; j < k; ++j) {
        const double intensity = a + b * std::cos(phi - kTwoPi * j / k);
        s += intensity * std::sin(kTwoPi * j / k);
        c += intensity * std::cos(kTwoPi * j / k);
      }
      const double phi_dec = wrap_two_pi(std::atan2(s, c));
      const double b_dec = 2.0 / k * std::hypot(s, c);
      CHECK(std::abs(wrap_pi(phi_dec - phi)) < 1e-10);
      CHECK(b_dec == doctest::Approx(b).epsilon(1e-10));
    }
  }
}

TEST_CASE("decode_phase: invariant under a constant frame offset") {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const double b = rng.uniform(0.1, 0.3);
    const double phi = rng.uniform(0.0, kTwoPi - 1e-9);
    const ImageStack s1 = constant_stack(8, 0.4, b, phi, 1, 1);
    ImageStack s2 = s1;
    for (auto& f : s2.frames)
      for (size_t j = 0; j < f.size(); ++j) f.data()[j] += 0.15;
    const PhaseMap m1 = decode_phase(s1, FringeConfig(16, 8, 16));
    const PhaseMap m2 = decode_phase(s2, FringeConfig(16, 8, 16));
    CHECK(std::abs(wrap_pi(m1.phase(0, 0) - m2.phase(0, 0))) < 1e-12);
  }
}

TEST_CASE("decode_phase: noise propagation matches sigma * sqrt(2/K) / B") {
  Rng rng(2024);
  const double sigma = 0.01;
  for (const int k : {8, 16}) {
    const double b = 0.3;
    const double phi = 1.7;
    double sum_sq = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
      double s = 0, c = 0;
      for (int j = 0; j < k; ++j) {
        const double intensity =
            0.5 + b * std::cos(phi - kTwoPi * j / k) + sigma * rng.gaussian();
        s += intensity * std::sin(kTwoPi * j / k);
        c += intensity * std::cos(kTwoPi * j / k);
      }
      const double err = wrap_pi(std::atan2(s, c) - phi);
      sum_sq += err * err;
    }
    const double measured = std::sqrt(sum_sq / trials);
    const double predicted = sigma * std::sqrt(2.0 / k) / b;
    CHECK(measured == doctest::Approx(predicted).epsilon(0.2));
  }
}

TEST_CASE("graycode: integer encode/decode is a bijection on [0, 64)") {
  for (uint32_t m = 0; m < 64; ++m) {
    const uint32_t g = gray_encode(m);
    CHECK(gray_decode(g) == m);
    if (m > 0) {
      // adjacent codes differ in exactly one bit
      const uint32_t diff = gray_encode(m) ^ gray_encode(m - 1);
      CHECK((diff & (diff - 1)) == 0);
    }
  }
}

TEST_CASE("graycode: textbook decode of 0b110") {
  CHECK(gray_decode(0b110) == 0b100);
}

TEST_CASE("decode_graycode: all-zero bits give index 0") {
  const int n = 8;
  std::vector<ImageD> planes(graycode_bits(n), ImageD(2, 2, 0.2));
  const ImageD ref(2, 2, 0.5);
  const GrayCodeMap m = decode_graycode(planes, ref, n);
  CHECK(m.index(0, 0) == 0);
  CHECK(m.valid(0, 0));
}

TEST_CASE("decode_graycode: image pattern for Gray code 110 decodes to 4") {
  const int n = 8;
  std::vector<ImageD> planes;
  for (int bit : {1, 1, 0}) planes.push_back(ImageD(1, 1, bit ? 0.8f : 0.2));
  const ImageD ref(1, 1, 0.5);
  const GrayCodeMap m = decode_graycode(planes, ref, n);
  CHECK(m.index(0, 0) == 4);
}

TEST_CASE("decode_graycode: wrong plane count throws") {
  std::vector<ImageD> planes(2, ImageD(1, 1, 0.0));
  CHECK_THROWS_AS(decode_graycode(planes, ImageD(1, 1, 0.5), 16), BitPlaneCountMismatch);
}

TEST_CASE("decode_graycode: image round trip for all m in [0, 64)") {
  const int n = 64;
  const int bits = graycode_bits(n);
  for (int m = 0; m < n; ++m) {
    std::vector<ImageD> planes;
    const uint32_t code = gray_encode(static_cast<uint32_t>(m));
    for (int b = 0; b < bits; ++b)
      planes.push_back(ImageD(1, 1, ((code >> (bits - 1 - b)) & 1u) ? 0.8f : 0.2));
    const GrayCodeMap map = decode_graycode(planes, ImageD(1, 1, 0.5), n);
    CHECK(map.index(0, 0) == m);
    CHECK(map.valid(0, 0));
  }
}

TEST_CASE("decode_graycode: low confidence marks pixels invalid") {
  const int n = 8;
  std::vector<ImageD> planes(graycode_bits(n), ImageD(1, 1, 0.51));
  const GrayCodeMap m = decode_graycode(planes, ImageD(1, 1, 0.5), n, 0.05);
  CHECK_FALSE(m.valid(0, 0));
}

TEST_CASE("absolute_projector_x: anchors and bounds") {
  const FringeConfig cfg(16, 8, 64);
  CHECK(absolute_projector_x(0.0, 0, cfg) == doctest::Approx(0.0));
  CHECK(absolute_projector_x(kPi, 3, cfg) == doctest::Approx(56.0).epsilon(1e-12));
  CHECK(absolute_projector_x(kTwoPi - 1e-9, 63, cfg) ==
        doctest::Approx(1024.0).epsilon(1e-7));
  CHECK(absolute_projector_x(kTwoPi - 1e-9, 63, cfg) < 1024.0);
  CHECK_THROWS_AS(absolute_projector_x(1.0, 64, cfg), IndexOutOfRange);
  CHECK_THROWS_AS(absolute_projector_x(1.0, -1, cfg), IndexOutOfRange);
}

TEST_CASE("sample_phase: interpolates across the wrap without bias") {
  PhaseMap m;
  m.phase = ImageD(2, 1);
  m.modulation = ImageD(2, 1, 1.0);
  m.valid = ImageU8(2, 1, 1);
  m.phase(0, 0) = kTwoPi - 0.1;
  m.phase(1, 0) = 0.1;
  // midpoint must be 0, not pi
  double ph = -1;
  // sample_phase needs a 2x2 valid neighborhood; replicate the row
  PhaseMap m2;
  m2.phase = ImageD(2, 2);
  m2.modulation = ImageD(2, 2, 1.0);
  m2.valid = ImageU8(2, 2, 1);
  for (int y = 0; y < 2; ++y) {
    m2.phase(0, y) = kTwoPi - 0.1;
    m2.phase(1, y) = 0.1;
  }
  CHECK(sample_phase(m2, Vec2(0.5, 0.5), &ph));
  CHECK(std::abs(wrap_pi(ph)) < 1e-12);
}

TEST_SUITE_END();
