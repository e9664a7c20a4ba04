#include "landsite/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace landsite {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1), a pure function of its arguments.
double lattice_value(std::uint64_t seed, std::uint64_t salt, std::int64_t ix, std::int64_t iy) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(salt));
  h = splitmix64(h ^ static_cast<std::uint64_t>(ix));
  h = splitmix64(h ^ static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, std::uint64_t salt, double x, double y, double cell, bool smooth) {
  const double gx = x / cell;
  const double gy = y / cell;
  const auto ix = static_cast<std::int64_t>(std::floor(gx));
  const auto iy = static_cast<std::int64_t>(std::floor(gy));
  double tx = gx - static_cast<double>(ix);
  double ty = gy - static_cast<double>(iy);
  if (smooth) {
    tx = smoothstep(tx);
    ty = smoothstep(ty);
  }
  const double v00 = lattice_value(seed, salt, ix, iy);
  const double v10 = lattice_value(seed, salt, ix + 1, iy);
  const double v01 = lattice_value(seed, salt, ix, iy + 1);
  const double v11 = lattice_value(seed, salt, ix + 1, iy + 1);
  return (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
}

double ground_albedo(std::uint64_t seed, double x, double y) {
  // Octaves from 0.64 m down to 0.02 m keep patches textured from 5 m
  // altitude down to the blind-descent height.
  double sum = 0.0;
  double norm = 0.0;
  double cell = 0.64;
  double amp = 1.0;
  for (int octave = 0; octave < 6; ++octave) {
    sum += amp * value_noise(seed, 100 + octave, x, y, cell, true);
    norm += amp;
    cell *= 0.5;
    amp *= 0.8;
  }
  const double noise = sum / norm;
  const bool dark = (static_cast<std::int64_t>(std::floor(x / 0.5)) + static_cast<std::int64_t>(std::floor(y / 0.5))) % 2 != 0;
  const double checker = dark ? 0.25 : 0.75;
  return std::clamp(0.7 * noise + 0.3 * checker, 0.0, 1.0);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Slab test against an axis-aligned box. Returns the entry parameter.
std::optional<double> intersect_box(const Box& box, double z_floor, const Vec3& o, const Vec3& d) {
  const Vec3 lo(box.center.x() - 0.5 * box.extent.x(), box.center.y() - 0.5 * box.extent.y(), z_floor);
  const Vec3 hi(box.center.x() + 0.5 * box.extent.x(), box.center.y() + 0.5 * box.extent.y(), box.height);
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::nullopt;
      continue;
    }
    double t0 = (lo[k] - o[k]) / d[k];
    double t1 = (hi[k] - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far < 0.0) return std::nullopt;
  return std::max(t_near, 0.0);
}

}  // namespace

World build_world(const WorldSpec& spec) {
  require(spec.x_max > spec.x_min && spec.y_max > spec.y_min, "world extent must be non-empty");
  require(spec.ground_resolution > 0.0, "ground_resolution must be > 0");
  require(spec.texture_resolution > 0.0, "texture_resolution must be > 0");
  if (spec.terrain.type == TerrainType::kRough) {
    require(spec.terrain.cell > 0.0, "rough terrain cell must be > 0");
    require(spec.terrain.amplitude >= 0.0, "rough terrain amplitude must be >= 0");
  }
  for (const auto& box : spec.obstacles) {
    require(box.extent.x() > 0.0 && box.extent.y() > 0.0, "obstacle extents must be > 0");
  }
  for (const auto& pad : spec.pads) {
    require(pad.half_extent.x() > 0.0 && pad.half_extent.y() > 0.0, "pad extents must be > 0");
  }

  World w;
  w.origin_ = Vec2(spec.x_min, spec.y_min);
  w.ground_resolution_ = spec.ground_resolution;
  w.texture_resolution_ = spec.texture_resolution;
  w.obstacles_ = spec.obstacles;

  const int nx = static_cast<int>(std::lround((spec.x_max - spec.x_min) / spec.ground_resolution)) + 1;
  const int ny = static_cast<int>(std::lround((spec.y_max - spec.y_min) / spec.ground_resolution)) + 1;
  w.heightmap_ = Grid<double>(ny, nx, 0.0);
  const double grade = std::tan(spec.terrain.grade_deg * std::numbers::pi / 180.0);
  for (int r = 0; r < ny; ++r) {
    const double y = spec.y_min + r * spec.ground_resolution;
    for (int c = 0; c < nx; ++c) {
      const double x = spec.x_min + c * spec.ground_resolution;
      double h = 0.0;
      switch (spec.terrain.type) {
        case TerrainType::kFlat: h = 0.0; break;
        case TerrainType::kRamp: h = x * grade; break;
        case TerrainType::kRough:
          h = spec.terrain.amplitude * value_noise(spec.seed, 1, x, y, spec.terrain.cell, false);
          break;
      }
      for (const auto& pad : spec.pads) {
        if (std::abs(x - pad.center.x()) <= pad.half_extent.x() + 1e-9 &&
            std::abs(y - pad.center.y()) <= pad.half_extent.y() + 1e-9) {
          h = pad.height;
        }
      }
      w.heightmap_(r, c) = h;
    }
  }
  const auto hv = w.heightmap_.values();
  const auto [lo, hi] = std::minmax_element(hv.begin(), hv.end());
  w.min_height_ = *lo;
  w.max_height_ = *hi;

  const int tx = static_cast<int>(std::lround((spec.x_max - spec.x_min) / spec.texture_resolution)) + 1;
  const int ty = static_cast<int>(std::lround((spec.y_max - spec.y_min) / spec.texture_resolution)) + 1;
  w.texture_ = Grid<float>(ty, tx, 0.0f);
  for (int r = 0; r < ty; ++r) {
    const double y = spec.y_min + r * spec.texture_resolution;
    for (int c = 0; c < tx; ++c) {
      const double x = spec.x_min + c * spec.texture_resolution;
      w.texture_(r, c) = static_cast<float>(ground_albedo(spec.seed, x, y));
    }
  }
  return w;
}

bool World::contains(double x, double y) const {
  return x >= x_min() && x <= x_max() && y >= y_min() && y <= y_max();
}

std::optional<double> World::terrain_height(double x, double y) const {
  if (!contains(x, y)) return std::nullopt;
  const double gx = (x - origin_.x()) / ground_resolution_;
  const double gy = (y - origin_.y()) / ground_resolution_;
  const int c0 = std::min(static_cast<int>(gx), heightmap_.cols() - 2);
  const int r0 = std::min(static_cast<int>(gy), heightmap_.rows() - 2);
  const double tx = gx - c0;
  const double ty = gy - r0;
  const auto& h = heightmap_;
  return (h(r0, c0) * (1 - tx) + h(r0, c0 + 1) * tx) * (1 - ty) +
         (h(r0 + 1, c0) * (1 - tx) + h(r0 + 1, c0 + 1) * tx) * ty;
}

std::optional<double> World::surface_height(double x, double y) const {
  auto h = terrain_height(x, y);
  if (!h) return h;
  for (const auto& box : obstacles_) {
    if (std::abs(x - box.center.x()) <= 0.5 * box.extent.x() && std::abs(y - box.center.y()) <= 0.5 * box.extent.y()) {
      *h = std::max(*h, box.height);
    }
  }
  return h;
}

double World::albedo(double x, double y) const {
  const double gx = (x - origin_.x()) / texture_resolution_;
  const double gy = (y - origin_.y()) / texture_resolution_;
  if (gx < 0.0 || gy < 0.0 || gx > texture_.cols() - 1 || gy > texture_.rows() - 1) return 0.0;
  const int c0 = std::min(static_cast<int>(gx), texture_.cols() - 2);
  const int r0 = std::min(static_cast<int>(gy), texture_.rows() - 2);
  const double tx = gx - c0;
  const double ty = gy - r0;
  const auto& t = texture_;
  return (t(r0, c0) * (1 - tx) + t(r0, c0 + 1) * tx) * (1 - ty) + (t(r0 + 1, c0) * (1 - tx) + t(r0 + 1, c0 + 1) * tx) * ty;
}

Mat3 CameraModel::nadir_attitude(double yaw) {
  // Camera axes expressed in world coordinates, stacked as rows.
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r << c, s, 0.0,
       s, -c, 0.0,
       0.0, 0.0, -1.0;
  return r;
}

Vec3 CameraModel::ray_direction(double u, double v) const {
  const Vec2 n = normalized(u, v);
  return attitude.transpose() * Vec3(n.x(), n.y(), 1.0);
}

Vec3 CameraModel::back_project(double u, double v, double z_depth) const {
  const Vec2 n = normalized(u, v);
  return Vec3(n.x() * z_depth, n.y() * z_depth, z_depth);
}

void CameraModel::validate() const {
  require(width > 0 && height > 0, "camera image size must be positive");
  require(focal_length > 0.0, "focal_length must be > 0");
  require(principal_point.x() >= 0.0 && principal_point.x() <= width - 1 && principal_point.y() >= 0.0 &&
              principal_point.y() <= height - 1,
          "principal point must lie inside the image");
  require((attitude * attitude.transpose() - Mat3::Identity()).norm() < 1e-9 && std::abs(attitude.determinant() - 1.0) < 1e-9,
          "attitude must be a proper rotation");
}

void NoiseModel::validate() const {
  require(sigma_range >= 0.0 && sigma_range_per_m >= 0.0, "noise sigma must be >= 0");
  require(dropout_prob >= 0.0 && dropout_prob <= 1.0, "dropout_prob must be in [0,1]");
  require(burst_prob >= 0.0 && burst_prob <= 1.0, "burst_prob must be in [0,1]");
}

std::optional<double> cast_ray(const World& world, const Vec3& origin, const Vec3& dir) {
  std::optional<double> best;
  const double z_floor = world.min_height() - 1.0;
  for (const auto& box : world.obstacles()) {
    if (auto t = intersect_box(box, z_floor, origin, dir)) {
      const Vec3 p = origin + *t * dir;
      if (world.contains(p.x(), p.y()) && (!best || *t < *best)) best = t;
    }
  }

  // March the heightfield only inside the slab [min_height, max_height].
  if (dir.z() < 0.0) {
    const double down = -dir.z();
    const double t_start = std::max(0.0, (origin.z() - world.max_height()) / down);
    const double t_end = (origin.z() - world.min_height()) / down;
    const double dt = 0.5 * world.ground_resolution() / dir.norm();
    auto gap = [&](double t) -> std::optional<double> {
      const Vec3 p = origin + t * dir;
      auto h = world.terrain_height(p.x(), p.y());
      if (!h) return std::nullopt;
      return p.z() - *h;
    };
    std::optional<double> hit;
    double t_prev = t_start;
    auto g_prev = gap(t_start);
    if (g_prev && *g_prev <= 0.0) {
      hit = t_start;
    } else if (g_prev) {
      for (double t = t_start + dt;; t += dt) {
        if (best && t_prev > *best) break;
        const double tc = std::min(t, t_end);
        const auto g = gap(tc);
        if (!g) break;  // left the world before hitting it
        if (*g <= 0.0) {
          // Bracketed on [t_prev, tc]: Illinois false position, falling
          // back to bisection when the interpolant leaves the bracket.
          double a = t_prev, b = tc, ga = *g_prev, gb = *g;
          int side = 0;
          for (int it = 0; it < 100 && b - a > 1e-12 && gb < 0.0; ++it) {
            double m = b - gb * (b - a) / (gb - ga);
            if (!(m > a && m < b)) m = 0.5 * (a + b);
            const auto gm = gap(m);
            if (!gm) break;
            if (*gm > 0.0) {
              a = m;
              ga = *gm;
              if (side == -1) gb *= 0.5;
              side = -1;
            } else {
              b = m;
              gb = *gm;
              if (side == 1) ga *= 0.5;
              side = 1;
            }
          }
          hit = b;
          break;
        }
        if (tc >= t_end) break;
        t_prev = tc;
        g_prev = g;
      }
    }
    if (hit && (!best || *hit < *best)) best = hit;
  }
  return best;
}

DepthFrame render_true_depth(const World& world, const CameraModel& camera, int t) {
  camera.validate();
  DepthFrame f;
  f.t = t;
  f.camera = camera;
  f.depth = Grid<double>(camera.height, camera.width, 0.0);
  f.valid = Mask(camera.height, camera.width, 0);
  f.intensity = Grid<float>(camera.height, camera.width, 0.0f);
  for (int r = 0; r < camera.height; ++r) {
    for (int c = 0; c < camera.width; ++c) {
      const Vec3 dir = camera.ray_direction(c, r);
      const auto hit = cast_ray(world, camera.position, dir);
      if (!hit || *hit <= 0.0) continue;
      const Vec3 p = camera.position + *hit * dir;
      f.depth(r, c) = *hit;
      f.valid(r, c) = 1;
      const double ground = world.terrain_height(p.x(), p.y()).value_or(p.z());
      double a = world.albedo(p.x(), p.y());
      if (p.z() > ground + 1e-6) a = 0.25 + 0.5 * a;  // box faces
      f.intensity(r, c) = static_cast<float>(a);
    }
  }
  return f;
}

DepthFrame corrupt(const DepthFrame& frame, const NoiseModel& noise, std::mt19937_64& rng) {
  noise.validate();
  DepthFrame out = frame;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double bias = 0.0;
  if (noise.burst_prob > 0.0 && uniform(rng) < noise.burst_prob) {
    bias = (uniform(rng) < 0.5 ? -1.0 : 1.0) * noise.burst_magnitude;
  }
  const bool gaussian = noise.sigma_range > 0.0 || noise.sigma_range_per_m > 0.0;
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < out.cols(); ++c) {
      if (!out.is_valid(r, c)) continue;
      if (noise.dropout_prob > 0.0 && uniform(rng) < noise.dropout_prob) {
        out.valid(r, c) = 0;
        continue;
      }
      double d = out.depth(r, c) + bias;
      if (gaussian) d += (noise.sigma_range + noise.sigma_range_per_m * out.depth(r, c)) * gauss(rng);
      if (bias != 0.0 || gaussian) d = std::max(d, kMinCorruptedDepth);
      out.depth(r, c) = d;
    }
  }
  return out;
}

}  // namespace landsite
