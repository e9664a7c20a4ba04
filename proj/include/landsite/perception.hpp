#pragma once

// Candidate region extraction and per-region geometric cues.

#include <cstdint>
#include <optional>
#include <vector>

#include "landsite/grid.hpp"
#include "landsite/scene.hpp"

namespace landsite {

struct ScreeningThresholds {
  int window = 5;                    // k, odd
  double max_height_std = 0.03;      // v_max (m)
  double max_gradient = 0.10;        // g_max (m/px)
  int min_area = 100;                // A_min (px)
  double max_invalid_fraction = 0.3;
  double footprint_cell = 0.1;       // ground raster cell for footprints (m)
};

/// Ground-frame footprint approximated as a set of occupied raster cells.
class GroundFootprint {
 public:
  GroundFootprint() = default;
  GroundFootprint(double cell, std::vector<std::int64_t> keys);

  static std::int64_t key(std::int32_t ix, std::int32_t iy);
  static GroundFootprint from_points(double cell, const std::vector<Vec2>& points);

  double cell() const { return cell_; }
  const std::vector<std::int64_t>& keys() const { return keys_; }
  double area() const { return static_cast<double>(keys_.size()) * cell_ * cell_; }

 private:
  double cell_ = 0.1;
  std::vector<std::int64_t> keys_;  // sorted, unique
};

/// Intersection over union of two footprints with the same cell size.
double footprint_iou(const GroundFootprint& a, const GroundFootprint& b);

struct RegionMask {
  Mask pixels;             // full-frame binary mask, 4-connected
  int area_px = 0;
  int invalid_px = 0;
  Vec2 centroid_px{0, 0};  // (u, v)
  PixelIndex bbox_min;
  PixelIndex bbox_max;
  double mean_depth = 0.0;  // over valid member pixels
  GroundFootprint footprint;
};

struct ScreeningResult {
  Mask passable;  // pixels eligible for regions
  Mask obstacle;  // valid pixels failing the geometric screen
};

/// Per-pixel screen: windowed depth std below v_max and central-difference
/// gradient below g_max. Invalid pixels are passable when most of their
/// valid 8-neighbours pass.
ScreeningResult screen_pixels(const DepthFrame& frame, const ScreeningThresholds& th);

/// 4-connected components of the passable set with area >= A_min and at
/// most `max_invalid_fraction` invalid pixels, sorted by area descending.
std::vector<RegionMask> extract_regions(const DepthFrame& frame, const ScreeningThresholds& th);
std::vector<RegionMask> extract_regions(const DepthFrame& frame, const ScreeningThresholds& th,
                                        const ScreeningResult& screened);

struct PlaneFit {
  Vec3 normal{0, 0, -1};  // unit, camera frame, facing the camera
  double offset = 0.0;    // normal . p + offset = 0
  double rms_residual = 0.0;
  int inlier_count = 0;
};

/// Total-least-squares plane. nullopt for fewer than three points or a
/// collinear set.
std::optional<PlaneFit> fit_plane(const std::vector<Vec3>& points);
/// Fits the valid pixels of `mask`, back-projected into the camera frame.
std::optional<PlaneFit> fit_plane(const DepthFrame& frame, const RegionMask& mask);

struct CueVector {
  double flatness = 0.0;   // f, dimensionless
  double slope = 0.0;      // s, rad
  double obstacle = 0.0;   // o, [0, 1]
};

struct CueConfig {
  double flatness_scale = 0.02;  // sigma_f (m)
  double obstacle_scale = 0.5;   // d_scale (m)
  int nearest_k = 9;
};

/// Distance field to the nearest obstacle pixel, built once per frame.
class ObstacleField {
 public:
  explicit ObstacleField(const Mask& obstacle_map);
  bool empty() const { return empty_; }
  /// Squared pixel distance to the nearest obstacle; +inf when there is none.
  double squared_distance(int r, int c) const { return sq_(r, c); }

 private:
  Grid<double> sq_;
  bool empty_ = true;
};

/// f = rms / sigma_f; s = acos(|n . g|); o = exp(-d_obs / d_scale), d_obs
/// measured from the K member pixels closest to the centroid.
CueVector compute_cues(const DepthFrame& frame, const RegionMask& mask, const PlaneFit& fit,
                       const Vec3& gravity_in_camera, const ObstacleField& obstacles, const CueConfig& cfg);
CueVector compute_cues(const DepthFrame& frame, const RegionMask& mask, const PlaneFit& fit,
                       const Vec3& gravity_in_camera, const Mask& obstacle_map, const CueConfig& cfg);

/// Ground sample distance (m/px) of a region, from its mean depth.
inline double region_gsd(const RegionMask& mask, const CameraModel& cam) { return mask.mean_depth / cam.focal_length; }

}  // namespace landsite
