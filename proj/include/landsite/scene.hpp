#pragma once

// Procedural world and the noisy nadir depth camera that observes it.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "landsite/grid.hpp"

namespace landsite {

enum class TerrainType { kFlat, kRamp, kRough };

struct TerrainSpec {
  TerrainType type = TerrainType::kFlat;
  double grade_deg = 0.0;   // ramp: rises along +x
  double amplitude = 0.3;   // rough: heights uniform in [0, amplitude] (m)
  double cell = 0.05;       // rough: lattice spacing of the random heights (m)
};

/// Rectangular patch where the terrain is replaced by a level plane.
struct FlatPad {
  Vec2 center{0.0, 0.0};
  Vec2 half_extent{0.5, 0.5};
  double height = 0.0;
};

/// Axis-aligned box standing on the terrain. `height` is the absolute
/// z of the top face; the box extends down through the terrain.
struct Box {
  Vec2 center{0.0, 0.0};
  Vec2 extent{1.0, 1.0};
  double height = 1.0;
  friend bool operator==(const Box&, const Box&) = default;
};

struct WorldSpec {
  double x_min = -6.0, y_min = -6.0, x_max = 6.0, y_max = 6.0;
  double ground_resolution = 0.05;
  double texture_resolution = 0.01;
  TerrainSpec terrain;
  std::vector<FlatPad> pads;
  std::vector<Box> obstacles;
  std::uint64_t seed = 1;
};

class World {
 public:
  /// Terrain height (bilinear on the lattice), ignoring boxes. nullopt outside the lattice.
  std::optional<double> terrain_height(double x, double y) const;
  /// Highest surface (terrain or box top) at (x, y).
  std::optional<double> surface_height(double x, double y) const;
  /// Ground albedo in [0, 1]; 0 outside the texture.
  double albedo(double x, double y) const;
  bool contains(double x, double y) const;

  double x_min() const { return origin_.x(); }
  double y_min() const { return origin_.y(); }
  double x_max() const { return origin_.x() + (heightmap_.cols() - 1) * ground_resolution_; }
  double y_max() const { return origin_.y() + (heightmap_.rows() - 1) * ground_resolution_; }
  double min_height() const { return min_height_; }
  double max_height() const { return max_height_; }
  double ground_resolution() const { return ground_resolution_; }
  const Grid<double>& heightmap() const { return heightmap_; }
  const Grid<float>& texture() const { return texture_; }
  const std::vector<Box>& obstacles() const { return obstacles_; }

  friend bool operator==(const World&, const World&) = default;

 private:
  friend World build_world(const WorldSpec& spec);

  Vec2 origin_{0.0, 0.0};
  double ground_resolution_ = 0.05;
  double texture_resolution_ = 0.01;
  Grid<double> heightmap_;  // row = y index, col = x index
  Grid<float> texture_;
  std::vector<Box> obstacles_;
  double min_height_ = 0.0;
  double max_height_ = 0.0;
};

/// Deterministic in (spec); throws std::invalid_argument on non-positive
/// extents or resolutions. Overlapping boxes are allowed (union geometry).
World build_world(const WorldSpec& spec);

struct CameraModel {
  int width = 160;
  int height = 120;
  double focal_length = 120.0;         // px
  Vec2 principal_point{79.5, 59.5};    // px
  Vec3 position{0.0, 0.0, 5.0};        // world, m
  Mat3 attitude = nadir_attitude(0.0);  // rotation world -> camera

  /// Downward camera: optical axis along world -z, image u along world +x
  /// rotated by yaw.
  static Mat3 nadir_attitude(double yaw);

  /// Normalized image coordinates of pixel centre (u, v).
  Vec2 normalized(double u, double v) const {
    return {(u - principal_point.x()) / focal_length, (v - principal_point.y()) / focal_length};
  }
  /// World-frame ray direction whose camera-frame z component is 1, so the
  /// ray parameter of a hit equals its z-depth.
  Vec3 ray_direction(double u, double v) const;
  /// Back-projects a pixel with z-depth into the camera frame.
  Vec3 back_project(double u, double v, double z_depth) const;
  Vec3 camera_to_world(const Vec3& p_cam) const { return attitude.transpose() * p_cam + position; }

  void validate() const;
};

/// One range image. Depth is z-depth (distance along the optical axis);
/// pixels without a return have valid(r, c) == 0 and their depth value is
/// meaningless.
struct DepthFrame {
  int t = 0;
  Grid<double> depth;
  Mask valid;
  Grid<float> intensity;
  CameraModel camera;

  int rows() const { return depth.rows(); }
  int cols() const { return depth.cols(); }
  bool is_valid(int r, int c) const { return valid(r, c) != 0; }
};

struct NoiseModel {
  double sigma_range = 0.0;        // m
  double sigma_range_per_m = 0.0;  // extra std per metre of depth
  double dropout_prob = 0.0;
  double burst_prob = 0.0;
  double burst_magnitude = 0.0;    // m
  std::uint64_t rng_seed = 0;

  void validate() const;
};

inline constexpr double kMinCorruptedDepth = 0.01;

/// Parameter of the first hit along p(t) = origin + t * dir, or nullopt if
/// the ray leaves the world first.
std::optional<double> cast_ray(const World& world, const Vec3& origin, const Vec3& dir);

/// Noise-free render. Pure in (world, camera).
DepthFrame render_true_depth(const World& world, const CameraModel& camera, int t = 0);

/// Applies additive Gaussian range noise, per-pixel dropout and a per-frame
/// burst bias. Consumes `rng` in a fixed order so streams are reproducible.
DepthFrame corrupt(const DepthFrame& frame, const NoiseModel& noise, std::mt19937_64& rng);

}  // namespace landsite
