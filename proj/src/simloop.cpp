#include "landsite/simloop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "landsite/distance_transform.hpp"

namespace landsite {
namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

BeliefConfig belief_config(const Params& p) {
  BeliefConfig cfg;
  cfg.likelihood.w_f = p.w_f;
  cfg.likelihood.w_s = p.w_s;
  cfg.likelihood.w_o = p.w_o;
  cfg.likelihood.scale_f = p.scale_f;
  cfg.likelihood.scale_s = p.scale_s;
  cfg.likelihood.scale_o = p.scale_o;
  cfg.likelihood.floor = p.epsilon_L;
  cfg.alpha = p.alpha;
  cfg.b0 = p.b0;
  cfg.min_iou = p.min_iou;
  cfg.max_missed = static_cast<int>(p.G);
  return cfg;
}

ServoGains servo_gains(const Params& p) {
  ServoGains g;
  g.lambda = p.lambda;
  g.v_xy_max = p.v_xy_max;
  g.v_z_max = p.v_z_max;
  g.descent_rate = p.v_des;
  g.align_threshold = p.e_align;
  return g;
}

// Lawnmower guidance: constant-speed legs between waypoints at fixed altitude.
class ScanGuidance {
 public:
  ScanGuidance(std::vector<Vec2> waypoints, double altitude, double speed, double climb)
      : waypoints_(std::move(waypoints)), altitude_(altitude), speed_(speed), climb_(climb) {}

  Vec3 setpoint(const Vec3& position, double dt) {
    Vec3 v(0, 0, std::clamp(altitude_ - position.z(), -climb_, climb_));
    if (waypoints_.empty()) return v;
    Vec2 delta = waypoints_[next_] - position.head<2>();
    if (delta.norm() < kReached) {
      next_ = (next_ + 1) % waypoints_.size();
      delta = waypoints_[next_] - position.head<2>();
    }
    const double dist = delta.norm();
    if (dist > 1e-12) v.head<2>() = delta / dist * std::min(speed_, dist / dt);
    return v;
  }

 private:
  static constexpr double kReached = 0.1;  // m
  std::vector<Vec2> waypoints_;
  std::size_t next_ = 0;
  double altitude_;
  double speed_;
  double climb_;
};

constexpr double kConsensusGate = 2.0;  // px

Mask disk_mask(int rows, int cols, const Vec2& center_uv, double radius) {
  Mask m(rows, cols, 0);
  const double r2 = radius * radius;
  const int r0 = std::max(0, static_cast<int>(std::floor(center_uv.y() - radius)));
  const int r1 = std::min(rows - 1, static_cast<int>(std::ceil(center_uv.y() + radius)));
  const int c0 = std::max(0, static_cast<int>(std::floor(center_uv.x() - radius)));
  const int c1 = std::min(cols - 1, static_cast<int>(std::ceil(center_uv.x() + radius)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double du = c - center_uv.x(), dv = r - center_uv.y();
      if (du * du + dv * dv <= r2) m(r, c) = 1;
    }
  }
  return m;
}

std::optional<double> mean_depth_in(const DepthFrame& frame, const Mask& m) {
  double sum = 0.0;
  int n = 0;
  for (int r = 0; r < frame.rows(); ++r) {
    for (int c = 0; c < frame.cols(); ++c) {
      if (m(r, c) && frame.is_valid(r, c)) {
        sum += frame.depth(r, c);
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

// Servo bookkeeping for the committed site. Each tracked point carries the
// pixel offset from itself to the site, measured at a reference depth; the
// offset scales as 1/Z while descending over near-level ground.
struct SiteAnchor {
  struct Offset {
    Vec2 delta{0, 0};
    double ref_depth = 1.0;
  };
  std::map<int, Offset> offsets;
  int next_id = 0;
  Vec2 pixel{0, 0};   // current site estimate (u, v)
  double depth = 1.0; // Z_t

  // Site estimate from every point; points disagreeing with the median by
  // more than `gate` pixels are removed from `fs` as mismatches.
  std::optional<Vec2> estimate(FeatureSet& fs, double z, double gate) const {
    if (fs.empty()) return std::nullopt;
    std::vector<Vec2> votes;
    for (const auto& p : fs.points) {
      const Offset& o = offsets.at(p.id);
      votes.push_back(p.pos + o.delta * (o.ref_depth / z));
    }
    auto median = [&](int axis) {
      std::vector<double> v;
      for (const auto& x : votes) v.push_back(x[axis]);
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      return v[v.size() / 2];
    };
    const Vec2 med(median(0), median(1));
    Vec2 sum(0, 0);
    FeatureSet kept;
    for (std::size_t i = 0; i < votes.size(); ++i) {
      if ((votes[i] - med).norm() > gate) continue;
      sum += votes[i];
      kept.points.push_back(std::move(fs.points[i]));
    }
    fs = std::move(kept);
    if (fs.empty()) return std::nullopt;
    return sum / static_cast<double>(fs.size());
  }

  void adopt(FeatureSet& fs, const Vec2& site, double z) {
    for (auto& p : fs.points) {
      if (p.id >= 0) continue;
      p.id = next_id++;
      p.template_depth = z;
      offsets[p.id] = {site - p.pos, z};
    }
  }

  void prune(const FeatureSet& fs) {
    std::erase_if(offsets, [&](const auto& kv) {
      return std::none_of(fs.points.begin(), fs.points.end(), [&](const TrackedPoint& p) { return p.id == kv.first; });
    });
  }
};

}  // namespace

VehicleState step_vehicle(const VehicleState& state, const Vec3& command_camera, double dt, double time_constant) {
  const Vec3 target = CameraModel::nadir_attitude(state.yaw).transpose() * command_camera;
  const double decay = std::exp(-dt / time_constant);
  VehicleState next = state;
  next.velocity = target + (state.velocity - target) * decay;
  next.position = state.position + target * dt + (state.velocity - target) * (time_constant * (1.0 - decay));
  return next;
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kLanded: return "landed";
    case Outcome::kAborted: return "aborted";
    case Outcome::kTimeout: return "timeout";
  }
  return "timeout";
}

Params scenario_params(const Scenario& scenario) {
  Params p;
  apply_overrides(p, scenario.params);
  p.validate();
  return p;
}

EpisodeOutput run_episode(const Scenario& scenario, const Params& params, std::uint64_t seed,
                          const EpisodeOptions& options) {
  return run_episode(build_world(scenario.world), scenario, params, seed, options);
}

EpisodeOutput run_episode(const World& world, const Scenario& scenario, const Params& params, std::uint64_t seed,
                          const EpisodeOptions& options) {
  params.validate();
  scenario.camera.validate();
  scenario.noise.validate();

  EpisodeOutput out;
  EpisodeResult& result = out.result;
  Telemetry& tel = out.telemetry;
  result.seed = seed;

  const double dt = 1.0 / params.f_s;
  const int max_frames = static_cast<int>(params.max_frames);
  const int max_servo_frames = static_cast<int>(params.max_servo_frames);
  const int max_lost = static_cast<int>(params.G);

  std::mt19937_64 noise_rng = make_rng(seed, scenario.noise.rng_seed, 0);
  std::mt19937_64 start_rng = make_rng(seed, scenario.noise.rng_seed, 1);

  VehicleState vehicle;
  vehicle.yaw = scenario.flight.yaw;
  vehicle.position = Vec3(scenario.flight.start.x(), scenario.flight.start.y(), scenario.flight.altitude);
  if (scenario.flight.start_jitter > 0.0) {
    std::uniform_real_distribution<double> jitter(-scenario.flight.start_jitter, scenario.flight.start_jitter);
    vehicle.position.x() += jitter(start_rng);
    vehicle.position.y() += jitter(start_rng);
  }

  ScanGuidance guidance(scenario.flight.waypoints(), scenario.flight.altitude, params.v_xy_max, params.v_z_max);
  const ScreeningThresholds screen_cfg;
  const CueConfig cue_cfg{params.sigma_f, params.d_scale, 9};
  TrackStore store(belief_config(params));
  const ServoGains gains = servo_gains(params);
  const TrackerConfig tracker;

  CameraModel cam = scenario.camera;
  cam.attitude = CameraModel::nadir_attitude(vehicle.yaw);
  const Vec3 gravity_cam = cam.attitude * Vec3(0, 0, -1);

  std::optional<LandingDecision> decision;
  double site_rho = 0.0;
  FeatureSet features;
  SiteAnchor anchor;
  int lost_frames = 0;
  int servo_frames = 0;
  bool done = false;

  for (int t = 0; !done; ++t) {
    cam.position = vehicle.position;
    const DepthFrame frame = corrupt(render_true_depth(world, cam, t), scenario.noise, noise_rng);

    FrameRecord rec;
    rec.t = t;
    rec.phase = decision ? Phase::kExecute : Phase::kScan;
    rec.position = vehicle.position;
    rec.velocity = vehicle.velocity;

    Vec3 world_setpoint(0, 0, 0);
    VelocityCommand command = VelocityCommand::hover_command();
    bool just_committed = false;

    if (!decision) {
      // Scan: regions -> tracks -> belief -> feasibility -> selection.
      const ScreeningResult screened = screen_pixels(frame, screen_cfg);
      std::vector<RegionMask> regions = extract_regions(frame, screen_cfg, screened);
      const ObstacleField obstacles(screened.obstacle);
      std::vector<RegionObservation> observations;
      observations.reserve(regions.size());
      for (auto& region : regions) {
        RegionObservation obs;
        if (const auto fit = fit_plane(frame, region)) {
          obs.cues = compute_cues(frame, region, *fit, gravity_cam, obstacles, cue_cfg);
        }
        obs.mask = std::move(region);
        observations.push_back(std::move(obs));
      }
      rec.regions = static_cast<int>(observations.size());
      const std::vector<int> observed = store.observe(t, std::move(observations));

      std::vector<SelectionCandidate> candidates;
      std::map<int, FeasibilityResult> feasibility;
      double infeasible_max = 0.0;
      for (int id : observed) {
        const RegionTrack* track = store.find(id);
        const FeasibilityResult fr = inscribed_radius(track->mask.pixels, region_gsd(track->mask, cam), params.rho_min);
        feasibility[id] = fr;
        candidates.push_back({id, track->belief, fr.rho, fr.feasible});
        if (!fr.feasible) infeasible_max = std::max(infeasible_max, track->belief);
      }
      rec.tracks = static_cast<int>(store.tracks().size());
      for (const auto& track : store.tracks()) rec.best_belief = std::max(rec.best_belief, track.belief);

      if (options.record_telemetry) {
        for (const auto& track : store.tracks()) {
          if (track.history.empty() || track.history.back().t != t) continue;
          const TrackSample& s = track.history.back();
          TrackRecord tr{t, track.id, track.cues, s.l1, s.l0, s.belief, s.observed, 0.0, false};
          if (auto it = feasibility.find(track.id); it != feasibility.end()) {
            tr.rho = it->second.rho;
            tr.feasible = it->second.feasible;
          }
          tel.tracks.push_back(tr);
        }
      }

      const auto chosen = select(candidates, params.tau);
      if (chosen) {
        const SelectionCandidate& cand = candidates[*chosen];
        const RegionTrack* track = store.find(cand.track_id);
        const FeasibilityResult& fr = feasibility.at(cand.track_id);
        LandingDecision d;
        d.track_id = cand.track_id;
        d.center_px = fr.center;
        d.rho = fr.rho;
        d.belief = cand.belief;
        d.frame = t;
        const int r = fr.center.row, c = fr.center.col;
        const double z = frame.is_valid(r, c) ? frame.depth(r, c) : track->mask.mean_depth;
        d.ground_center = cam.camera_to_world(cam.back_project(c, r, z));
        decision = d;
        site_rho = fr.rho;
        just_committed = true;

        result.frames_to_commit = t + 1;
        result.commit_belief = cand.belief;
        result.max_infeasible_belief = infeasible_max;
        rec.event = "commit";
        rec.decision = d;

        // Initialise tracking inside the inscribed disk of the committed region.
        const Vec2 site(c, r);
        Mask allowed = disk_mask(frame.rows(), frame.cols(), site, std::max(1.0, std::sqrt(fr.max_squared_px) - 1.0));
        for (int rr = 0; rr < frame.rows(); ++rr) {
          for (int cc = 0; cc < frame.cols(); ++cc) {
            allowed(rr, cc) = allowed(rr, cc) && track->mask.pixels(rr, cc) && frame.is_valid(rr, cc);
          }
        }
        anchor.pixel = site;
        anchor.depth = mean_depth_in(frame, allowed).value_or(z);
        features = detect_features(frame.intensity, allowed, tracker);
        anchor.adopt(features, site, anchor.depth);
      } else {
        result.max_infeasible_belief = std::max(result.max_infeasible_belief, infeasible_max);
      }

      if (options.on_maps && (just_committed || (options.map_stride > 0 && t % options.map_stride == 0))) {
        FrameMaps maps;
        maps.t = t;
        maps.frame = &frame;
        maps.labels = Grid<int>(frame.rows(), frame.cols(), 0);
        maps.belief = Grid<float>(frame.rows(), frame.cols(), 0.0f);
        maps.likelihood = Grid<float>(frame.rows(), frame.cols(), 0.0f);
        maps.feasibility = Grid<float>(frame.rows(), frame.cols(), 0.0f);
        for (int id : observed) {
          const RegionTrack* track = store.find(id);
          const TrackSample& s = track->history.back();
          const float lik = s.observed && s.l1 + s.l0 > 0.0 ? static_cast<float>(s.l1 / (s.l1 + s.l0)) : 0.5f;
          const float rho = static_cast<float>(feasibility.at(id).rho);
          for (int r = 0; r < frame.rows(); ++r) {
            for (int c = 0; c < frame.cols(); ++c) {
              if (!track->mask.pixels(r, c)) continue;
              maps.labels(r, c) = id;
              maps.belief(r, c) = static_cast<float>(track->belief);
              maps.likelihood(r, c) = lik;
              maps.feasibility(r, c) = rho;
            }
          }
        }
        options.on_maps(maps);
      }

      if (!decision) {
        if (t + 1 >= max_frames) {
          result.outcome = Outcome::kTimeout;
          rec.event = "timeout";
          done = true;
        } else {
          world_setpoint = guidance.setpoint(vehicle.position, dt);
        }
      }
    }

    if (decision && !done) {
      // Execute: track the site, servo, descend. The selector is not re-entered.
      ServoRecord srec;
      srec.t = t;
      {
        const Vec3 p = cam.attitude * (decision->ground_center - cam.position);
        srec.true_site = p.head<2>() / p.z();
      }
      const double height = vehicle.position.z() - decision->ground_center.z();
      if (height < params.h_blind) {
        command.v = saturate(Vec3(0, 0, params.v_des), gains);
        command.hover = false;
        command.descending = true;
        srec.blind = true;
        srec.descending = true;
        srec.depth = height;
        if (rec.event.empty()) rec.event = "blind";
      } else {
        if (!just_committed) {
          const double radius = site_rho * cam.focal_length / anchor.depth;
          const Mask near = disk_mask(frame.rows(), frame.cols(), anchor.pixel, radius);
          const double z = mean_depth_in(frame, near).value_or(anchor.depth);
          FeatureSet tracked = track_features(frame.intensity, features, tracker, z);
          anchor.prune(tracked);
          const Vec2 site = anchor.estimate(tracked, z, kConsensusGate).value_or(anchor.pixel);
          anchor.prune(tracked);
          if (static_cast<int>(tracked.size()) < tracker.min_features) {
            Mask allowed = disk_mask(frame.rows(), frame.cols(), site, std::max(1.0, site_rho * cam.focal_length / z - 1.0));
            for (int r = 0; r < frame.rows(); ++r) {
              for (int c = 0; c < frame.cols(); ++c) allowed(r, c) = allowed(r, c) && frame.is_valid(r, c);
            }
            tracked = detect_features(frame.intensity, allowed, tracker, tracked);
            anchor.adopt(tracked, site, z);
            if (rec.event.empty()) rec.event = "redetect";
          }
          features = std::move(tracked);
          anchor.pixel = site;
          anchor.depth = z;
        }

        srec.n_features = static_cast<int>(features.size());
        srec.depth = anchor.depth;
        if (features.empty()) {
          ++lost_frames;
          if (rec.event.empty() || rec.event == "redetect") rec.event = "lost";
          if (lost_frames > max_lost) {
            result.outcome = Outcome::kAborted;
            rec.event = "abort";
            done = true;
          }
        } else {
          lost_frames = 0;
          ServoState state;
          state.feature = cam.normalized(anchor.pixel.x(), anchor.pixel.y());
          state.depth = anchor.depth;
          command = control(state, gains);
          srec.feature = state.feature;
          srec.error = state.error();
          srec.descending = command.descending;
        }
      }
      srec.command = command.v;
      if (options.record_telemetry) tel.servo.push_back(srec);

      if (!done && ++servo_frames >= max_servo_frames) {
        result.outcome = Outcome::kTimeout;
        rec.event = "timeout";
        done = true;
      }
    }

    rec.command = command.v;
    rec.hover = command.hover;
    rec.guidance = world_setpoint;

    // Actuate: servo command in the camera frame, or the scan setpoint.
    const Vec3 command_cam = decision ? command.v : cam.attitude * world_setpoint;
    if (!done) vehicle = step_vehicle(vehicle, command_cam, dt, params.T_v);

    if (decision && !done) {
      const double ground = world.surface_height(vehicle.position.x(), vehicle.position.y()).value_or(world.min_height());
      if (vehicle.position.z() - ground < params.h_td) {
        result.outcome = Outcome::kLanded;
        result.touchdown_error = (vehicle.position.head<2>() - decision->ground_center.head<2>()).norm();
        rec.event = "landed";
        done = true;
      }
    }

    if (options.record_telemetry) tel.frames.push_back(rec);
    result.frames = t + 1;
  }

  result.decision = decision;
  result.final_position = vehicle.position;
  return out;
}

}  // namespace landsite
