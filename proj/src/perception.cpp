#include "landsite/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "landsite/distance_transform.hpp"

namespace landsite {

GroundFootprint::GroundFootprint(double cell, std::vector<std::int64_t> keys) : cell_(cell), keys_(std::move(keys)) {
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
}

std::int64_t GroundFootprint::key(std::int32_t ix, std::int32_t iy) {
  return static_cast<std::int64_t>((static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
                                   static_cast<std::uint32_t>(iy));
}

GroundFootprint GroundFootprint::from_points(double cell, const std::vector<Vec2>& points) {
  std::vector<std::int64_t> keys;
  keys.reserve(points.size());
  for (const auto& p : points) {
    keys.push_back(key(static_cast<std::int32_t>(std::floor(p.x() / cell)), static_cast<std::int32_t>(std::floor(p.y() / cell))));
  }
  return GroundFootprint(cell, std::move(keys));
}

double footprint_iou(const GroundFootprint& a, const GroundFootprint& b) {
  if (a.keys().empty() || b.keys().empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = a.keys().begin();
  auto ib = b.keys().begin();
  while (ia != a.keys().end() && ib != b.keys().end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.keys().size() + b.keys().size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

ScreeningResult screen_pixels(const DepthFrame& frame, const ScreeningThresholds& th) {
  if (th.window < 1 || th.window % 2 == 0) throw std::invalid_argument("screening window must be odd and positive");
  const int rows = frame.rows();
  const int cols = frame.cols();
  const int half = th.window / 2;
  ScreeningResult out{Mask(rows, cols, 0), Mask(rows, cols, 0)};

  auto depth_at = [&](int r, int c) -> std::optional<double> {
    if (!frame.depth.in_bounds(r, c) || !frame.is_valid(r, c)) return std::nullopt;
    return frame.depth(r, c);
  };
  auto derivative = [&](int r, int c, int dr, int dc) {
    const auto plus = depth_at(r + dr, c + dc);
    const auto minus = depth_at(r - dr, c - dc);
    const double here = frame.depth(r, c);
    if (plus && minus) return 0.5 * (*plus - *minus);
    if (plus) return *plus - here;
    if (minus) return here - *minus;
    return 0.0;
  };

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(th.window) * th.window);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!frame.is_valid(r, c)) continue;
      samples.clear();
      int window_px = 0;  // in-bounds window size, smaller at the image border
      for (int rr = std::max(0, r - half); rr <= std::min(rows - 1, r + half); ++rr) {
        for (int cc = std::max(0, c - half); cc <= std::min(cols - 1, c + half); ++cc) {
          ++window_px;
          if (frame.is_valid(rr, cc)) samples.push_back(frame.depth(rr, cc));
        }
      }
      if (2 * static_cast<int>(samples.size()) <= window_px) continue;
      const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
      double var = 0.0;
      for (double s : samples) var += (s - mean) * (s - mean);
      const double std_dev = std::sqrt(var / samples.size());
      const double grad = std::hypot(derivative(r, c, 0, 1), derivative(r, c, 1, 0));
      if (std_dev <= th.max_height_std && grad <= th.max_gradient) {
        out.passable(r, c) = 1;
      } else {
        out.obstacle(r, c) = 1;
      }
    }
  }

  // Dropout holes take the majority verdict of their valid neighbours.
  Mask filled = out.passable;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (frame.is_valid(r, c)) continue;
      int n_valid = 0;
      int n_pass = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr == 0 && dc == 0) || !frame.valid.in_bounds(r + dr, c + dc) || !frame.is_valid(r + dr, c + dc)) continue;
          ++n_valid;
          n_pass += out.passable(r + dr, c + dc);
        }
      }
      if (n_valid >= 3 && 2 * n_pass > n_valid) filled(r, c) = 1;
    }
  }
  out.passable = std::move(filled);
  return out;
}

std::vector<RegionMask> extract_regions(const DepthFrame& frame, const ScreeningThresholds& th) {
  return extract_regions(frame, th, screen_pixels(frame, th));
}

std::vector<RegionMask> extract_regions(const DepthFrame& frame, const ScreeningThresholds& th,
                                        const ScreeningResult& screened) {
  const int rows = frame.rows();
  const int cols = frame.cols();
  Mask visited(rows, cols, 0);
  std::vector<RegionMask> regions;
  std::vector<PixelIndex> stack;
  std::vector<PixelIndex> members;

  for (int r0 = 0; r0 < rows; ++r0) {
    for (int c0 = 0; c0 < cols; ++c0) {
      if (!screened.passable(r0, c0) || visited(r0, c0)) continue;
      members.clear();
      stack.assign(1, {r0, c0});
      visited(r0, c0) = 1;
      while (!stack.empty()) {
        const PixelIndex p = stack.back();
        stack.pop_back();
        members.push_back(p);
        constexpr int kDr[4] = {-1, 1, 0, 0};
        constexpr int kDc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int r = p.row + kDr[k];
          const int c = p.col + kDc[k];
          if (visited.in_bounds(r, c) && !visited(r, c) && screened.passable(r, c)) {
            visited(r, c) = 1;
            stack.push_back({r, c});
          }
        }
      }

      const int area = static_cast<int>(members.size());
      if (area < th.min_area) continue;
      int invalid = 0;
      double depth_sum = 0.0;
      double su = 0.0, sv = 0.0;
      RegionMask region;
      region.pixels = Mask(rows, cols, 0);
      region.bbox_min = {rows, cols};
      region.bbox_max = {-1, -1};
      for (const auto& p : members) {
        region.pixels(p.row, p.col) = 1;
        su += p.col;
        sv += p.row;
        region.bbox_min = {std::min(region.bbox_min.row, p.row), std::min(region.bbox_min.col, p.col)};
        region.bbox_max = {std::max(region.bbox_max.row, p.row), std::max(region.bbox_max.col, p.col)};
        if (frame.is_valid(p.row, p.col)) {
          depth_sum += frame.depth(p.row, p.col);
        } else {
          ++invalid;
        }
      }
      if (invalid == area || static_cast<double>(invalid) > th.max_invalid_fraction * area) continue;
      region.area_px = area;
      region.invalid_px = invalid;
      region.centroid_px = Vec2(su / area, sv / area);
      region.mean_depth = depth_sum / (area - invalid);

      std::vector<Vec2> ground;
      ground.reserve(members.size());
      for (const auto& p : members) {
        const double d = frame.is_valid(p.row, p.col) ? frame.depth(p.row, p.col) : region.mean_depth;
        const Vec3 w = frame.camera.camera_to_world(frame.camera.back_project(p.col, p.row, d));
        ground.emplace_back(w.x(), w.y());
      }
      region.footprint = GroundFootprint::from_points(th.footprint_cell, ground);
      regions.push_back(std::move(region));
    }
  }
  // Raster discovery order breaks ties, so the sort is deterministic.
  std::stable_sort(regions.begin(), regions.end(), [](const RegionMask& a, const RegionMask& b) { return a.area_px > b.area_px; });
  return regions;
}

std::optional<PlaneFit> fit_plane(const std::vector<Vec3>& points) {
  if (points.size() < 3) return std::nullopt;
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 scatter = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    scatter.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> solver(scatter);
  if (solver.info() != Eigen::Success) return std::nullopt;
  const Vec3 ev = solver.eigenvalues();  // ascending
  // Collinear (or coincident) points span less than a plane.
  if (ev(2) <= 0.0 || ev(1) <= 1e-12 * ev(2)) return std::nullopt;

  PlaneFit fit;
  fit.normal = solver.eigenvectors().col(0).normalized();
  if (fit.normal.dot(-mean) < 0.0) fit.normal = -fit.normal;
  fit.offset = -fit.normal.dot(mean);
  fit.rms_residual = std::sqrt(std::max(ev(0), 0.0) / static_cast<double>(points.size()));
  fit.inlier_count = static_cast<int>(points.size());
  return fit;
}

std::optional<PlaneFit> fit_plane(const DepthFrame& frame, const RegionMask& mask) {
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(mask.area_px));
  for (int r = mask.bbox_min.row; r <= mask.bbox_max.row; ++r) {
    for (int c = mask.bbox_min.col; c <= mask.bbox_max.col; ++c) {
      if (mask.pixels(r, c) && frame.is_valid(r, c)) points.push_back(frame.camera.back_project(c, r, frame.depth(r, c)));
    }
  }
  return fit_plane(points);
}

ObstacleField::ObstacleField(const Mask& obstacle_map) : sq_(squared_distance_to_sources(obstacle_map)) {
  const auto v = obstacle_map.values();
  empty_ = std::none_of(v.begin(), v.end(), [](std::uint8_t x) { return x != 0; });
}

CueVector compute_cues(const DepthFrame& frame, const RegionMask& mask, const PlaneFit& fit,
                       const Vec3& gravity_in_camera, const ObstacleField& obstacles, const CueConfig& cfg) {
  CueVector cues;
  cues.flatness = fit.rms_residual / cfg.flatness_scale;
  const double cosine = std::min(1.0, std::abs(fit.normal.dot(gravity_in_camera.normalized())));
  cues.slope = std::acos(cosine);

  if (obstacles.empty()) {
    cues.obstacle = 0.0;
    return cues;
  }
  // Member pixels closest to the centroid stand in for the centroid, which
  // may fall outside a non-convex region.
  struct Near {
    double d2;
    PixelIndex p;
  };
  std::vector<Near> near;
  near.reserve(static_cast<std::size_t>(mask.area_px));
  for (int r = mask.bbox_min.row; r <= mask.bbox_max.row; ++r) {
    for (int c = mask.bbox_min.col; c <= mask.bbox_max.col; ++c) {
      if (!mask.pixels(r, c)) continue;
      const double du = c - mask.centroid_px.x();
      const double dv = r - mask.centroid_px.y();
      near.push_back({du * du + dv * dv, {r, c}});
    }
  }
  const std::size_t k = std::min<std::size_t>(std::max(cfg.nearest_k, 1), near.size());
  std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end(), [](const Near& a, const Near& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && (a.p.row < b.p.row || (a.p.row == b.p.row && a.p.col < b.p.col)));
  });
  double best = kInfiniteDistance;
  for (std::size_t i = 0; i < k; ++i) best = std::min(best, obstacles.squared_distance(near[i].p.row, near[i].p.col));
  const double d_obs = std::sqrt(best) * region_gsd(mask, frame.camera);
  cues.obstacle = std::exp(-d_obs / cfg.obstacle_scale);
  return cues;
}

CueVector compute_cues(const DepthFrame& frame, const RegionMask& mask, const PlaneFit& fit,
                       const Vec3& gravity_in_camera, const Mask& obstacle_map, const CueConfig& cfg) {
  return compute_cues(frame, mask, fit, gravity_in_camera, ObstacleField(obstacle_map), cfg);
}

}  // namespace landsite
