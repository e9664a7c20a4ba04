#pragma once

// Terminal execution: salient-point tracking, the centroid feature and the
// image-based visual servo law.

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "landsite/grid.hpp"
#include "landsite/scene.hpp"

namespace landsite {

struct TrackedPoint {
  Vec2 pos{0, 0};              // (u, v) pixels, sub-pixel
  std::vector<float> patch;    // patch_size^2 samples centred on pos
  int id = -1;                 // caller-assigned, kept across frames
  double template_depth = 0.0; // scene depth when the patch was taken; 0 = unknown
};

struct FeatureSet {
  std::vector<TrackedPoint> points;
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct TrackerConfig {
  int patch_size = 9;       // odd
  int search_size = 21;     // candidate centres per axis, odd
  int score_window = 5;     // odd
  int max_features = 40;
  int min_features = 8;     // N_min, re-detect below this
  double min_spacing = 6.0;     // px, non-max suppression radius
  double min_score = 1e-5;      // corner score floor; textureless -> none
  double max_mean_ssd = 0.01;   // per-pixel SSD above which a match is dropped
  double max_scale_change = 0.2;  // template refresh once |scale - 1| exceeds this
};

/// Corner detection restricted to `allowed` pixels: the smaller eigenvalue
/// of the windowed intensity-gradient covariance, local maxima with
/// non-max suppression, strongest first.
FeatureSet detect_features(const Grid<float>& intensity, const Mask& allowed, const TrackerConfig& cfg,
                           const FeatureSet& keep = {});

/// SSD patch matching inside the search window, with a parabolic sub-pixel
/// refinement. Unmatched points are dropped. Templates are kept across
/// frames; when the current scene depth is known (> 0) the patch grid is
/// scaled by template_depth / depth, and the template is re-taken once that
/// scale drifts past max_scale_change.
FeatureSet track_features(const Grid<float>& intensity, const FeatureSet& previous, const TrackerConfig& cfg,
                          double depth = 0.0);

struct TrackingResult {
  FeatureSet features;
  bool redetected = false;
  bool lost = false;  // N_t == 0 after re-detection
};

/// Tracks `previous` (if any), then re-detects inside `allowed` when fewer
/// than `min_features` survive.
TrackingResult detect_and_track(const Grid<float>& intensity, const Mask& allowed, const FeatureSet& previous,
                                const TrackerConfig& cfg);

/// Mean feature position in normalized image coordinates. Throws
/// std::invalid_argument on an empty set.
Vec2 centroid(const FeatureSet& features, const CameraModel& intrinsics);

using InteractionMatrix = Eigen::Matrix<double, 2, 3>;

/// Translational interaction matrix of a normalized image point at depth Z:
/// [[-1/Z, 0, u/Z], [0, -1/Z, v/Z]]. nullopt for Z <= 0 or non-finite input.
std::optional<InteractionMatrix> interaction_matrix(const Vec2& s, double depth);

/// Moore-Penrose pseudoinverse of a full-row-rank 2x3 matrix, L^T (L L^T)^-1.
/// nullopt when L L^T is singular.
std::optional<Eigen::Matrix<double, 3, 2>> pseudo_inverse(const InteractionMatrix& L);

struct ServoGains {
  double lambda = 0.8;
  double v_xy_max = 0.25;   // m/s
  double v_z_max = 0.30;    // m/s
  double descent_rate = 0.2;      // v_des, m/s
  double align_threshold = 0.05;  // e_align, normalized

  void validate() const;
};

struct ServoState {
  Vec2 feature{0, 0};  // s_t, normalized
  Vec2 target{0, 0};   // s*, image centre
  double depth = 1.0;  // Z_t, m

  Vec2 error() const { return feature - target; }
};

/// Camera-frame translational velocity; +z is along the optical axis, so a
/// positive v_z descends toward the scene.
struct VelocityCommand {
  Vec3 v{0, 0, 0};
  bool hover = true;
  bool descending = false;

  static VelocityCommand hover_command() { return {}; }
};

/// Caps the lateral norm at v_xy_max (direction kept) and |v_z| at v_z_max.
Vec3 saturate(const Vec3& v, const ServoGains& gains);

/// v_raw = -lambda L^+ e; v_z replaced by the descent rate once ||e|| is
/// below the alignment threshold; then saturated. Hover on invalid input.
VelocityCommand control(const ServoState& state, const ServoGains& gains);

}  // namespace landsite
