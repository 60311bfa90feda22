#include "fringefree/calib_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "fringefree/mathutil.hpp"

namespace fringefree {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return j;
}

json pose_to_json(const Pose& pose) {
  json j;
  json r = json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r.push_back(pose.rotation(row, col));
  j["rotation"] = r;
  j["translation"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  return j;
}

Pose pose_from_json(const json& j) {
  const auto& r = j.at("rotation");
  const auto& t = j.at("translation");
  if (r.size() != 9 || t.size() != 3)
    throw ConfigError("pose requires 9 rotation and 3 translation numbers");
  Mat3 rot;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) rot(row, col) = r[row * 3 + col].get<double>();
  try {
    return Pose(rot, Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid pose: ") + e.what());
  }
}

json lens_to_json(const LensDistortion& lens) {
  return json{{"k1", lens.k1}, {"k2", lens.k2}, {"k3", lens.k3}, {"p1", lens.p1}, {"p2", lens.p2}};
}

LensDistortion lens_from_json(const json& j) {
  LensDistortion lens;
  lens.k1 = j.value("k1", 0.0);
  lens.k2 = j.value("k2", 0.0);
  lens.k3 = j.value("k3", 0.0);
  lens.p1 = j.value("p1", 0.0);
  lens.p2 = j.value("p2", 0.0);
  return lens;
}

json device_to_json(const PinholeDevice& dev) {
  json j;
  j["kind"] = dev.kind == DeviceKind::Camera ? "camera" : "projector";
  j["intrinsics"] = {{"fx", dev.intrinsics.fx}, {"fy", dev.intrinsics.fy},
                     {"cx", dev.intrinsics.cx}, {"cy", dev.intrinsics.cy},
                     {"width", dev.intrinsics.width}, {"height", dev.intrinsics.height}};
  j["pose"] = pose_to_json(dev.pose);
  j["lens"] = lens_to_json(dev.lens);
  return j;
}

PinholeDevice device_from_json(const json& j, DeviceKind expected) {
  PinholeDevice dev;
  const std::string kind = j.value("kind", expected == DeviceKind::Camera ? "camera" : "projector");
  dev.kind = kind == "projector" ? DeviceKind::Projector : DeviceKind::Camera;
  if (dev.kind != expected) throw ConfigError("device kind mismatch in calibration file");
  const auto& in = j.at("intrinsics");
  try {
    dev.intrinsics = Intrinsics(in.at("fx").get<double>(), in.at("fy").get<double>(),
                                in.at("cx").get<double>(), in.at("cy").get<double>(),
                                in.at("width").get<int>(), in.at("height").get<int>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid intrinsics: ") + e.what());
  }
  dev.pose = pose_from_json(j.at("pose"));
  if (j.contains("lens")) dev.lens = lens_from_json(j.at("lens"));
  return dev;
}

}  // namespace

void save_grid(const fs::path& path, const DistortionGrid& grid) {
  json j;
  j["format"] = "fringefree-grid/1";
  j["spacing"] = grid.spacing;
  j["origin"] = {grid.origin.x(), grid.origin.y()};
  j["size"] = {grid.nx, grid.ny};
  j["directions"] = grid.directions == DistortionGrid::Directions::XY ? "xy" : "x";
  json vectors = json::array(), support = json::array(), extrapolated = json::array();
  for (size_t i = 0; i < grid.values.size(); ++i) {
    vectors.push_back(grid.values[i].x());
    vectors.push_back(grid.values[i].y());
    support.push_back(grid.support[i]);
    extrapolated.push_back(static_cast<int>(grid.extrapolated[i]));
  }
  j["vectors"] = vectors;
  j["support"] = support;
  j["extrapolated"] = extrapolated;
  std::ofstream f(path);
  if (!f) throw IoError("cannot write grid file " + path.string());
  f << j.dump(2) << "\n";
}

DistortionGrid load_grid(const fs::path& path) {
  const json j = load_json(path);
  if (j.value("format", "") != "fringefree-grid/1")
    throw ConfigError(path.string() + " is not a fringefree-grid/1 file");
  DistortionGrid grid;
  grid.spacing = j.at("spacing").get<double>();
  grid.origin = Vec2(j.at("origin")[0].get<double>(), j.at("origin")[1].get<double>());
  grid.nx = j.at("size")[0].get<int>();
  grid.ny = j.at("size")[1].get<int>();
  grid.directions = j.value("directions", "xy") == std::string("x")
                        ? DistortionGrid::Directions::XOnly
                        : DistortionGrid::Directions::XY;
  const auto& vectors = j.at("vectors");
  const size_t n = static_cast<size_t>(grid.nx) * grid.ny;
  if (vectors.size() != 2 * n) throw ConfigError("grid vector count does not match size");
  grid.values.resize(n);
  for (size_t i = 0; i < n; ++i)
    grid.values[i] = Vec2(vectors[2 * i].get<double>(), vectors[2 * i + 1].get<double>());
  grid.support.assign(n, 0);
  grid.extrapolated.assign(n, 0);
  if (j.contains("support"))
    for (size_t i = 0; i < n && i < j["support"].size(); ++i)
      grid.support[i] = j["support"][i].get<int>();
  if (j.contains("extrapolated"))
    for (size_t i = 0; i < n && i < j["extrapolated"].size(); ++i)
      grid.extrapolated[i] = static_cast<uint8_t>(j["extrapolated"][i].get<int>());
  return grid;
}

SensorRig load_calibration(const fs::path& path) {
  const json j = load_json(path);
  if (j.value("format", "") != "fringefree-calib/1")
    throw ConfigError(path.string() + " is not a fringefree-calib/1 file");
  PinholeDevice cam1 = device_from_json(j.at("cam1"), DeviceKind::Camera);
  PinholeDevice cam2 = device_from_json(j.at("cam2"), DeviceKind::Camera);
  PinholeDevice proj = device_from_json(j.at("projector"), DeviceKind::Projector);
  if (j.at("projector").contains("grid")) {
    const fs::path grid_path = path.parent_path() / j["projector"]["grid"].get<std::string>();
    proj.set_grid_correction(load_grid(grid_path));
  }
  return SensorRig(cam1, cam2, proj);
}

void save_calibration(const fs::path& path, const SensorRig& rig,
                      const std::optional<std::string>& grid_reference) {
  json j;
  j["format"] = "fringefree-calib/1";
  j["cam1"] = device_to_json(rig.cam1);
  j["cam2"] = device_to_json(rig.cam2);
  j["projector"] = device_to_json(rig.projector);
  if (grid_reference) j["projector"]["grid"] = *grid_reference;
  std::ofstream f(path);
  if (!f) throw IoError("cannot write calibration file " + path.string());
  f << j.dump(2) << "\n";
}

namespace {

MeasurementVolume volume_from_json(const json& j) {
  try {
    return MeasurementVolume(j.at("mvw").get<double>(), j.at("mvh").get<double>(),
                             j.at("mvd").get<double>(), j.at("d_min").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid measurement volume: ") + e.what());
  }
}

RigSpec rigspec_from_json(const json& j) {
  RigSpec spec;
  spec.image_width = j.value("image_width", spec.image_width);
  spec.image_height = j.value("image_height", spec.image_height);
  spec.focal_px = j.value("focal_px", spec.focal_px);
  spec.baseline_cc = j.value("baseline_cc_mm", spec.baseline_cc);
  spec.projector_frac = j.value("projector_frac", spec.projector_frac);
  spec.convergence_depth = j.value("convergence_mm", spec.convergence_depth);
  spec.projector_width = j.value("projector_width", spec.projector_width);
  spec.projector_height = j.value("projector_height", spec.projector_height);
  spec.projector_focal_px = j.value("projector_focal_px", spec.projector_focal_px);
  spec.projector_cx = j.value("projector_cx", (spec.projector_width - 1) / 2.0);
  spec.projector_cy = j.value("projector_cy", spec.projector_cy);
  if (j.contains("cam_lens")) spec.cam_lens = lens_from_json(j["cam_lens"]);
  if (j.contains("projector_lens")) spec.projector_lens = lens_from_json(j["projector_lens"]);
  return spec;
}

Scene scene_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "plane") {
    return Scene::plane(j.value("depth_mm", 600.0), j.value("extent_mm", 200.0));
  }
  if (kind == "pyramid_stump") {
    return Scene::pyramid_stump(j.value("base_depth_mm", 620.0), j.value("base_mm", 120.0),
                                j.value("top_mm", 60.0), j.value("height_mm", 40.0),
                                j.value("extent_mm", 200.0));
  }
  if (kind == "heightfield") {
    return Scene::heightfield(j.value("base_depth_mm", 620.0), j.value("amplitude_mm", 32.0),
                              j.value("bumps", 14), j.value("seed", 1),
                              j.value("extent_mm", 200.0));
  }
  throw ConfigError("unknown scene kind '" + kind + "'");
}

RenderConfig render_from_json(const json& j) {
  RenderConfig rc;
  rc.noise_sigma = j.value("noise_sigma", 0.0);
  rc.ambient = j.value("ambient", 0.5);
  rc.modulation = j.value("modulation", 0.3);
  rc.enable_second_direction = j.value("enable_second_direction", false);
  rc.quantize_8bit = j.value("quantize_8bit", false);
  rc.seed = j.value("seed", 0ULL);
  if (j.contains("injected_projector_distortion"))
    rc.injected_projector_distortion = lens_from_json(j["injected_projector_distortion"]);
  rc.validate();
  return rc;
}

}  // namespace

MeasurementVolume volume_from_json_file(const fs::path& path) {
  return volume_from_json(load_json(path));
}

SimulateConfig load_simulate_config(const fs::path& path) {
  const json j = load_json(path);
  SimulateConfig cfg;
  if (j.contains("rig"))
    cfg.rig = rigspec_from_json(j["rig"]);
  else if (j.contains("calibration"))
    cfg.calibration = path.parent_path() / j["calibration"].get<std::string>();
  else
    throw ConfigError("simulate config needs a 'rig' or a 'calibration' entry");

  if (!j.contains("volume")) throw ConfigError("simulate config lacks 'volume'");
  cfg.volume = volume_from_json(j["volume"]);
  if (!j.contains("scene")) throw ConfigError("simulate config lacks 'scene'");
  cfg.scene = scene_from_json(j["scene"]);
  cfg.render = j.contains("render") ? render_from_json(j["render"]) : RenderConfig{};

  const json fr = j.value("fringe", json::object());
  const double period = fr.value("period_px", 16.0);
  const int steps = fr.value("steps", 16);
  int projector_width = 1024;
  if (cfg.rig) projector_width = cfg.rig->projector_width;
  cfg.fringe = FringeConfig::for_projector(period, steps, projector_width);
  return cfg;
}

double parse_threshold(const std::string& text) {
  std::string t = text;
  double factor = 1.0;
  const size_t pos = t.find("pi");
  if (pos != std::string::npos) {
    factor = kPi;
    t = t.substr(0, pos);
  }
  try {
    size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v * factor;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse threshold '" + text + "' (use e.g. 0.04pi or 0.1257)");
  }
}

MatchConfig parse_match_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cannot parse match config: ") + e.what());
  }
  MatchConfig cfg;
  if (j.contains("thr")) {
    cfg.thr.clear();
    if (j["thr"].is_array()) {
      for (const auto& v : j["thr"])
        cfg.thr.push_back(v.is_string() ? parse_threshold(v.get<std::string>())
                                        : v.get<double>());
    } else {
      cfg.thr.push_back(j["thr"].is_string() ? parse_threshold(j["thr"].get<std::string>())
                                             : j["thr"].get<double>());
    }
  }
  if (cfg.thr.empty()) cfg.thr.push_back(0.1 * kPi);
  const std::string mode = j.value("mode", "m1");
  if (mode == "m1") {
    cfg.mode = MatchMode::M1;
  } else if (mode == "m2") {
    cfg.mode = MatchMode::M2;
  } else if (mode == "both") {
    cfg.run_both_modes = true;
  } else {
    throw ConfigError("match mode must be m1, m2 or both");
  }
  cfg.outlier_filter = j.value("outlier_filter", true);
  cfg.outlier_radius = j.value("outlier_radius_mm", 2.0);
  cfg.outlier_min_neighbors = j.value("outlier_min_neighbors", 4);
  cfg.modulation_threshold = j.value("modulation_threshold", kDefaultModulationThreshold);
  cfg.tolerance_mm = j.value("tolerance_mm", 1.0);
  return cfg;
}

MatchConfig load_match_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_match_config_json(text);
}

}  // namespace fringefree
