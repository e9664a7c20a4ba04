#include "landsite/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace landsite {
namespace {

using nlohmann::json;

Vec2 vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument(std::string(what) + " must be a 2-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

TerrainType terrain_type(const std::string& name) {
  if (name == "flat") return TerrainType::kFlat;
  if (name == "ramp") return TerrainType::kRamp;
  if (name == "rough") return TerrainType::kRough;
  throw std::invalid_argument("unknown terrain type '" + name + "'");
}

const char* terrain_name(TerrainType t) {
  switch (t) {
    case TerrainType::kFlat: return "flat";
    case TerrainType::kRamp: return "ramp";
    case TerrainType::kRough: return "rough";
  }
  return "flat";
}

}  // namespace

std::vector<Vec2> FlightPlan::waypoints() const {
  std::vector<Vec2> out;
  const double spacing = lane_spacing > 0.0 ? lane_spacing : 1.0;
  const int lanes = std::max(1, static_cast<int>(std::floor((scan_max.y() - scan_min.y()) / spacing + 1e-9)) + 1);
  for (int i = 0; i < lanes; ++i) {
    const double y = scan_min.y() + i * spacing;
    if (i % 2 == 0) {
      out.emplace_back(scan_min.x(), y);
      out.emplace_back(scan_max.x(), y);
    } else {
      out.emplace_back(scan_max.x(), y);
      out.emplace_back(scan_min.x(), y);
    }
  }
  return out;
}

Scenario parse_scenario(const json& doc) {
  Scenario sc;
  read(doc, "name", sc.name);

  if (doc.contains("world")) {
    const json& w = doc.at("world");
    if (w.contains("extent")) {
      const auto& e = w.at("extent");
      if (!e.is_array() || e.size() != 4) throw std::invalid_argument("world.extent must be [x_min, y_min, x_max, y_max]");
      sc.world.x_min = e[0].get<double>();
      sc.world.y_min = e[1].get<double>();
      sc.world.x_max = e[2].get<double>();
      sc.world.y_max = e[3].get<double>();
    }
    read(w, "ground_resolution", sc.world.ground_resolution);
    read(w, "texture_resolution", sc.world.texture_resolution);
    read(w, "seed", sc.world.seed);
    if (w.contains("terrain")) {
      const json& t = w.at("terrain");
      sc.world.terrain.type = terrain_type(t.value("type", std::string("flat")));
      read(t, "grade_deg", sc.world.terrain.grade_deg);
      read(t, "amplitude", sc.world.terrain.amplitude);
      read(t, "cell", sc.world.terrain.cell);
    }
    const json pads = w.value("pads", json::array());
    for (const auto& p : pads) {
      FlatPad pad;
      pad.center = vec2(p.at("center"), "pad.center");
      pad.half_extent = vec2(p.at("half_extent"), "pad.half_extent");
      read(p, "height", pad.height);
      sc.world.pads.push_back(pad);
    }
    const json obstacles = w.value("obstacles", json::array());
    for (const auto& b : obstacles) {
      Box box;
      box.center = vec2(b.at("center"), "obstacle.center");
      box.extent = vec2(b.at("extent"), "obstacle.extent");
      read(b, "height", box.height);
      sc.world.obstacles.push_back(box);
    }
  }

  if (doc.contains("camera")) {
    const json& c = doc.at("camera");
    read(c, "width", sc.camera.width);
    read(c, "height", sc.camera.height);
    read(c, "focal_length", sc.camera.focal_length);
    if (c.contains("principal_point")) {
      sc.camera.principal_point = vec2(c.at("principal_point"), "camera.principal_point");
    } else {
      sc.camera.principal_point = Vec2(0.5 * (sc.camera.width - 1), 0.5 * (sc.camera.height - 1));
    }
  }

  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    read(n, "sigma_range", sc.noise.sigma_range);
    read(n, "sigma_range_per_m", sc.noise.sigma_range_per_m);
    read(n, "dropout_prob", sc.noise.dropout_prob);
    read(n, "burst_prob", sc.noise.burst_prob);
    read(n, "burst_magnitude", sc.noise.burst_magnitude);
    read(n, "rng_seed", sc.noise.rng_seed);
  }

  if (doc.contains("flight")) {
    const json& f = doc.at("flight");
    read(f, "altitude", sc.flight.altitude);
    if (f.contains("start")) sc.flight.start = vec2(f.at("start"), "flight.start");
    read(f, "start_jitter", sc.flight.start_jitter);
    read(f, "lane_spacing", sc.flight.lane_spacing);
    read(f, "yaw", sc.flight.yaw);
    if (f.contains("scan_area")) {
      const auto& a = f.at("scan_area");
      if (!a.is_array() || a.size() != 4) throw std::invalid_argument("flight.scan_area must be [x_min, y_min, x_max, y_max]");
      sc.flight.scan_min = Vec2(a[0].get<double>(), a[1].get<double>());
      sc.flight.scan_max = Vec2(a[2].get<double>(), a[3].get<double>());
    } else {
      sc.flight.scan_min = sc.flight.start;
      sc.flight.scan_max = sc.flight.start;
    }
  }

  const json params = doc.value("params", json::object());
  for (const auto& [k, v] : params.items()) sc.params[k] = v.get<double>();

  sc.camera.validate();
  sc.noise.validate();
  return sc;
}

Scenario parse_scenario_text(const std::string& text) { return parse_scenario(json::parse(text)); }

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

nlohmann::json to_json(const Scenario& sc) {
  json pads = json::array();
  for (const auto& p : sc.world.pads) {
    pads.push_back({{"center", {p.center.x(), p.center.y()}}, {"half_extent", {p.half_extent.x(), p.half_extent.y()}}, {"height", p.height}});
  }
  json boxes = json::array();
  for (const auto& b : sc.world.obstacles) {
    boxes.push_back({{"center", {b.center.x(), b.center.y()}}, {"extent", {b.extent.x(), b.extent.y()}}, {"height", b.height}});
  }
  return {
      {"name", sc.name},
      {"world",
       {{"extent", {sc.world.x_min, sc.world.y_min, sc.world.x_max, sc.world.y_max}},
        {"ground_resolution", sc.world.ground_resolution},
        {"texture_resolution", sc.world.texture_resolution},
        {"seed", sc.world.seed},
        {"terrain",
         {{"type", terrain_name(sc.world.terrain.type)},
          {"grade_deg", sc.world.terrain.grade_deg},
          {"amplitude", sc.world.terrain.amplitude},
          {"cell", sc.world.terrain.cell}}},
        {"pads", pads},
        {"obstacles", boxes}}},
      {"camera",
       {{"width", sc.camera.width},
        {"height", sc.camera.height},
        {"focal_length", sc.camera.focal_length},
        {"principal_point", {sc.camera.principal_point.x(), sc.camera.principal_point.y()}}}},
      {"noise",
       {{"sigma_range", sc.noise.sigma_range},
        {"sigma_range_per_m", sc.noise.sigma_range_per_m},
        {"dropout_prob", sc.noise.dropout_prob},
        {"burst_prob", sc.noise.burst_prob},
        {"burst_magnitude", sc.noise.burst_magnitude},
        {"rng_seed", sc.noise.rng_seed}}},
      {"flight",
       {{"altitude", sc.flight.altitude},
        {"start", {sc.flight.start.x(), sc.flight.start.y()}},
        {"start_jitter", sc.flight.start_jitter},
        {"scan_area", {sc.flight.scan_min.x(), sc.flight.scan_min.y(), sc.flight.scan_max.x(), sc.flight.scan_max.y()}},
        {"lane_spacing", sc.flight.lane_spacing},
        {"yaw", sc.flight.yaw}}},
      {"params", sc.params},
  };
}

}  // namespace landsite
