#pragma once

// Scenario files: JSON documents describing the world, camera, noise and
// flight plan, plus optional parameter overrides.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "landsite/scene.hpp"

namespace landsite {

struct FlightPlan {
  double altitude = 5.0;           // m, absolute z during the scan
  Vec2 start{0.0, 0.0};
  double start_jitter = 0.0;       // m, per-seed uniform offset of the start
  Vec2 scan_min{0.0, 0.0};         // lawnmower area
  Vec2 scan_max{0.0, 0.0};
  double lane_spacing = 2.0;       // m
  double yaw = 0.0;                // rad, held constant

  /// Boustrophedon waypoints: lanes along x, stepping by lane_spacing in y.
  std::vector<Vec2> waypoints() const;
};

struct Scenario {
  std::string name;
  WorldSpec world;
  CameraModel camera;  // intrinsics; the pose is set by the simulator
  NoiseModel noise;
  FlightPlan flight;
  std::map<std::string, double> params;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
/// Throws std::runtime_error when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& scenario);

}  // namespace landsite
