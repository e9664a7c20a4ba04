#pragma once

// Closed-loop episode: vehicle kinematics, the scan phase that accumulates
// belief until a site is committed, and the servo-guided descent.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "landsite/belief.hpp"
#include "landsite/params.hpp"
#include "landsite/perception.hpp"
#include "landsite/scenario.hpp"
#include "landsite/selector.hpp"
#include "landsite/servo.hpp"

namespace landsite {

struct VehicleState {
  Vec3 position{0, 0, 5};  // world, m
  Vec3 velocity{0, 0, 0};  // world, m/s
  double yaw = 0.0;        // rad, held constant
};

/// First-order velocity response toward the camera-frame command (rotated
/// to world by the fixed nadir attitude), integrated exactly over dt for a
/// command held constant across the step.
VehicleState step_vehicle(const VehicleState& state, const Vec3& command_camera, double dt, double time_constant);

enum class Outcome { kLanded, kAborted, kTimeout };
const char* to_string(Outcome outcome);

struct EpisodeResult {
  Outcome outcome = Outcome::kTimeout;
  std::optional<double> touchdown_error;  // m, landed only
  std::optional<int> frames_to_commit;    // t* + 1
  std::optional<double> commit_belief;
  double max_infeasible_belief = 0.0;     // at commit, or over the whole scan when none
  std::optional<LandingDecision> decision;
  int frames = 0;
  Vec3 final_position{0, 0, 0};
  std::uint64_t seed = 0;
};

enum class Phase { kScan, kExecute };

/// One row per simulated frame.
struct FrameRecord {
  int t = 0;
  Phase phase = Phase::kScan;
  Vec3 position{0, 0, 0};
  Vec3 velocity{0, 0, 0};
  Vec3 command{0, 0, 0};   // servo command, camera frame; zero while hovering
  bool hover = true;
  Vec3 guidance{0, 0, 0};  // scan-pattern velocity setpoint, world frame
  int regions = 0;
  int tracks = 0;
  double best_belief = 0.0;
  std::string event;       // "commit", "redetect", "lost", "blind", "landed", ...
  std::optional<LandingDecision> decision;  // set on the commit row
};

struct TrackRecord {
  int t = 0;
  int id = 0;
  CueVector cues;
  double l1 = 0.0;
  double l0 = 0.0;
  double belief = 0.0;
  bool observed = false;
  double rho = 0.0;
  bool feasible = false;
};

struct ServoRecord {
  int t = 0;
  int n_features = 0;
  Vec2 feature{0, 0};  // s_t, normalized
  Vec2 error{0, 0};
  double depth = 0.0;  // Z_t
  Vec3 command{0, 0, 0};
  bool descending = false;
  bool blind = false;  // final descent without tracking
  Vec2 true_site{0, 0};  // committed centre projected with the true pose, normalized
};

struct Telemetry {
  std::vector<FrameRecord> frames;
  std::vector<TrackRecord> tracks;
  std::vector<ServoRecord> servo;
};

/// Per-frame rasters for export.
struct FrameMaps {
  int t = 0;
  const DepthFrame* frame = nullptr;
  Grid<int> labels;           // track id per pixel, 0 = none
  Grid<float> belief;         // belief of the owning track
  Grid<float> likelihood;     // L1 / (L1 + L0) of the owning track this frame
  Grid<float> feasibility;    // rho (m) of the owning track
};

struct EpisodeOptions {
  bool record_telemetry = true;
  /// Called for scan frames with t % map_stride == 0 and on the commit frame.
  std::function<void(const FrameMaps&)> on_maps;
  int map_stride = 10;
};

struct EpisodeOutput {
  EpisodeResult result;
  Telemetry telemetry;
};

/// Runs one episode. Pure in (world, scenario, params, seed).
EpisodeOutput run_episode(const World& world, const Scenario& scenario, const Params& params, std::uint64_t seed,
                          const EpisodeOptions& options = {});
EpisodeOutput run_episode(const Scenario& scenario, const Params& params, std::uint64_t seed,
                          const EpisodeOptions& options = {});

/// Resolved parameters: defaults, then scenario values. Throws ConfigError.
Params scenario_params(const Scenario& scenario);

}  // namespace landsite
