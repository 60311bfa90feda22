#include "fringefree/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "fringefree/errors.hpp"

namespace fringefree {

namespace fs = std::filesystem;
using nlohmann::json;

void write_pgm(const fs::path& path, const ImageD& image, int bits) {
  if (bits != 8 && bits != 16) throw IoError("PGM depth must be 8 or 16 bits");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const int maxval = bits == 8 ? 255 : 65535;
  f << "P5\n" << image.width() << " " << image.height() << "\n" << maxval << "\n";
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double v = std::clamp(image(x, y), 0.0, 1.0);
      const unsigned q = static_cast<unsigned>(std::lround(v * maxval));
      if (bits == 8) {
        f.put(static_cast<char>(q));
      } else {
        f.put(static_cast<char>(q >> 8));  // network byte order per the spec
        f.put(static_cast<char>(q & 0xff));
      }
    }
  }
  if (!f) throw IoError("write failed for " + path.string());
}

void write_pgm_u8(const fs::path& path, const ImageU8& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "P5\n" << image.width() << " " << image.height() << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

namespace {

void skip_pgm_whitespace(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

}  // namespace

ImageD read_pgm(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string magic;
  f >> magic;
  if (magic != "P5") throw IoError(path.string() + " is not a binary PGM");
  int w, h, maxval;
  skip_pgm_whitespace(f);
  f >> w;
  skip_pgm_whitespace(f);
  f >> h;
  skip_pgm_whitespace(f);
  f >> maxval;
  f.get();  // single whitespace after maxval
  if (w <= 0 || h <= 0 || (maxval != 255 && maxval != 65535))
    throw IoError("unsupported PGM layout in " + path.string());
  ImageD img(w, h);
  if (maxval == 255) {
    std::vector<uint8_t> row(w);
    for (int y = 0; y < h; ++y) {
      f.read(reinterpret_cast<char*>(row.data()), w);
      for (int x = 0; x < w; ++x) img(x, y) = row[x] / 255.0;
    }
  } else {
    std::vector<uint8_t> row(2 * w);
    for (int y = 0; y < h; ++y) {
      f.read(reinterpret_cast<char*>(row.data()), 2 * w);
      for (int x = 0; x < w; ++x)
        img(x, y) = ((row[2 * x] << 8) | row[2 * x + 1]) / 65535.0;
    }
  }
  if (!f) throw IoError("truncated PGM " + path.string());
  return img;
}

namespace {

std::string frame_name(const std::string& prefix, const char* kind, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", index);
  return prefix + "_" + kind + "_" + buf + ".pgm";
}

}  // namespace

void write_capture(const fs::path& dir, const std::string& prefix, const CameraCapture& capture,
                   const FringeConfig& cfg, int bits) {
  fs::create_directories(dir);
  json sidecar;
  sidecar["format"] = "fringefree-stack/1";
  sidecar["steps"] = cfg.steps;
  sidecar["period_px"] = cfg.period_px;
  sidecar["fringe_count"] = cfg.fringe_count;
  json frames = json::array(), gray = json::array();
  for (int k = 0; k < capture.fringe.steps(); ++k) {
    const std::string name = frame_name(prefix, "fringe", k);
    write_pgm(dir / name, capture.fringe.frames[k], bits);
    frames.push_back(name);
  }
  for (size_t b = 0; b < capture.gray.size(); ++b) {
    const std::string name = frame_name(prefix, "gray", static_cast<int>(b));
    write_pgm(dir / name, capture.gray[b], bits);
    gray.push_back(name);
  }
  sidecar["frames"] = frames;
  sidecar["graycode"] = gray;
  std::ofstream f(dir / (prefix + "_stack.json"));
  if (!f) throw IoError("cannot write sidecar for " + prefix);
  f << sidecar.dump(2) << "\n";
}

CameraCapture read_capture(const fs::path& dir, const std::string& prefix, FringeConfig* cfg_out) {
  const fs::path sidecar_path = dir / (prefix + "_stack.json");
  std::ifstream f(sidecar_path);
  if (!f) throw IoError("missing stack sidecar " + sidecar_path.string());
  json sidecar;
  try {
    f >> sidecar;
  } catch (const json::exception& e) {
    throw IoError("bad sidecar " + sidecar_path.string() + ": " + e.what());
  }
  CameraCapture cap;
  for (const auto& name : sidecar.at("frames"))
    cap.fringe.frames.push_back(read_pgm(dir / name.get<std::string>()));
  for (const auto& name : sidecar.at("graycode"))
    cap.gray.push_back(read_pgm(dir / name.get<std::string>()));
  if (cfg_out)
    *cfg_out = FringeConfig(sidecar.at("period_px").get<double>(), sidecar.at("steps").get<int>(),
                            sidecar.at("fringe_count").get<int>());
  return cap;
}

void write_ground_truth(const fs::path& dir, const std::string& stem, const GroundTruth& gt) {
  fs::create_directories(dir);
  json header;
  header["format"] = "fringefree-gt/1";
  header["width"] = gt.width;
  header["height"] = gt.height;
  header["planes"] = {"depth_c1_mm", "has_hit", "visible_c2", "visible_projector"};
  header["data"] = stem + ".bin";
  {
    std::ofstream f(dir / (stem + ".json"));
    if (!f) throw IoError("cannot write ground truth header");
    f << header.dump(2) << "\n";
  }
  std::ofstream f(dir / (stem + ".bin"), std::ios::binary);
  if (!f) throw IoError("cannot write ground truth data");
  const size_t n = static_cast<size_t>(gt.width) * gt.height;
  std::vector<float> plane(n);
  auto dump = [&]() {
    f.write(reinterpret_cast<const char*>(plane.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
  };
  for (size_t i = 0; i < n; ++i) plane[i] = static_cast<float>(gt.depth_c1.raw()[i]);
  dump();
  for (size_t i = 0; i < n; ++i) plane[i] = gt.has_hit.raw()[i];
  dump();
  for (size_t i = 0; i < n; ++i) plane[i] = gt.visible_c2.raw()[i];
  dump();
  for (size_t i = 0; i < n; ++i) plane[i] = gt.visible_projector.raw()[i];
  dump();
  if (!f) throw IoError("ground truth write failed");
}

GroundTruth read_ground_truth(const fs::path& dir, const std::string& stem,
                              const PinholeDevice& cam1) {
  std::ifstream hf(dir / (stem + ".json"));
  if (!hf) throw IoError("missing ground truth header " + (dir / (stem + ".json")).string());
  json header;
  try {
    hf >> header;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad ground truth header: ") + e.what());
  }
  GroundTruth gt;
  gt.width = header.at("width").get<int>();
  gt.height = header.at("height").get<int>();
  const size_t n = static_cast<size_t>(gt.width) * gt.height;

  std::ifstream f(dir / header.at("data").get<std::string>(), std::ios::binary);
  if (!f) throw IoError("missing ground truth data file");
  std::vector<float> planes(4 * n);
  f.read(reinterpret_cast<char*>(planes.data()),
         static_cast<std::streamsize>(planes.size() * sizeof(float)));
  if (!f) throw IoError("truncated ground truth data");

  gt.depth_c1 = ImageD(gt.width, gt.height);
  gt.has_hit = ImageU8(gt.width, gt.height);
  gt.visible_c2 = ImageU8(gt.width, gt.height);
  gt.visible_projector = ImageU8(gt.width, gt.height);
  gt.hit.assign(n, Vec3::Zero());
  for (int y = 0; y < gt.height; ++y) {
    for (int x = 0; x < gt.width; ++x) {
      const size_t i = static_cast<size_t>(y) * gt.width + x;
      gt.depth_c1(x, y) = planes[i];
      gt.has_hit(x, y) = planes[n + i] != 0.f ? 1 : 0;
      gt.visible_c2(x, y) = planes[2 * n + i] != 0.f ? 1 : 0;
      gt.visible_projector(x, y) = planes[3 * n + i] != 0.f ? 1 : 0;
      if (gt.has_hit(x, y)) {
        const Ray ray = back_project(cam1, Vec2(x, y));
        const double dz = (cam1.pose.rotation * ray.direction).z();
        gt.hit[i] = ray.at(gt.depth_c1(x, y) / dz);
      }
    }
  }
  return gt;
}

}  // namespace fringefree
