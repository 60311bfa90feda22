#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fringefree/correspond.hpp"
#include "fringefree/distortion_grid.hpp"
#include "fringefree/simulate.hpp"
#include "fringefree/unwrap.hpp"

namespace fringefree {

// Calibration file ("format": "fringefree-calib/1"): intrinsics, pose
// (rotation as 9 row-major numbers), lens coefficients for cam1, cam2 and
// the projector, plus an optional distortion grid reference for the
// projector (path relative to the calibration file).
SensorRig load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const SensorRig& rig,
                      const std::optional<std::string>& grid_reference = std::nullopt);

// Distortion grid file ("format": "fringefree-grid/1"): spacing, origin,
// node dimensions, row-major vectors, support counts, direction coverage.
DistortionGrid load_grid(const std::filesystem::path& path);
void save_grid(const std::filesystem::path& path, const DistortionGrid& grid);

// Config fragments shared by the CLI subcommands and the python module.
MeasurementVolume volume_from_json_file(const std::filesystem::path& path);

struct SimulateConfig {
  std::optional<RigSpec> rig;                       // parametric rig ...
  std::optional<std::filesystem::path> calibration;  // ... or a calibration file
  MeasurementVolume volume;
  FringeConfig fringe;   // fringe_count derived from the projector when absent
  Scene scene;
  RenderConfig render;
};

struct MatchConfig {
  std::vector<double> thr;  // radians
  MatchMode mode = MatchMode::M1;
  bool run_both_modes = false;
  bool outlier_filter = true;
  double outlier_radius = 2.0;
  int outlier_min_neighbors = 4;
  double modulation_threshold = kDefaultModulationThreshold;
  double tolerance_mm = 1.0;
};

SimulateConfig load_simulate_config(const std::filesystem::path& path);
MatchConfig load_match_config(const std::filesystem::path& path);
MatchConfig parse_match_config_json(const std::string& text);

// "0.04pi" or a plain number in radians.
double parse_threshold(const std::string& text);

}  // namespace fringefree
