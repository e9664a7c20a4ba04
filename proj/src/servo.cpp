#include "landsite/servo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace landsite {
namespace {

// Bilinear sample at (u, v); NaN outside [0, cols-1] x [0, rows-1].
float sample(const Grid<float>& img, double u, double v) {
  if (!(u >= 0.0 && v >= 0.0 && u <= img.cols() - 1 && v <= img.rows() - 1)) return std::numeric_limits<float>::quiet_NaN();
  const int c0 = std::min(static_cast<int>(u), img.cols() - 2);
  const int r0 = std::min(static_cast<int>(v), img.rows() - 2);
  const double tx = u - c0;
  const double ty = v - r0;
  return static_cast<float>((img(r0, c0) * (1 - tx) + img(r0, c0 + 1) * tx) * (1 - ty) +
                            (img(r0 + 1, c0) * (1 - tx) + img(r0 + 1, c0 + 1) * tx) * ty);
}

bool extract_patch(const Grid<float>& img, const Vec2& pos, int size, std::vector<float>& out) {
  const int h = size / 2;
  out.resize(static_cast<std::size_t>(size) * size);
  for (int dy = -h; dy <= h; ++dy) {
    for (int dx = -h; dx <= h; ++dx) {
      const float s = sample(img, pos.x() + dx, pos.y() + dy);
      if (std::isnan(s)) return false;
      out[static_cast<std::size_t>(dy + h) * size + (dx + h)] = s;
    }
  }
  return true;
}

// Vertex offset of the parabola through (-1, a), (0, b), (1, c).
double parabola_offset(double a, double b, double c) {
  const double denom = a - 2.0 * b + c;
  if (denom <= 0.0) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

}  // namespace

FeatureSet detect_features(const Grid<float>& intensity, const Mask& allowed, const TrackerConfig& cfg, const FeatureSet& keep) {
  const int rows = intensity.rows();
  const int cols = intensity.cols();
  const int hw = cfg.score_window / 2;
  const int margin = std::max(cfg.patch_size / 2 + 1, hw + 1);

  Grid<float> score(rows, cols, 0.0f);
  for (int r = margin; r < rows - margin; ++r) {
    for (int c = margin; c < cols - margin; ++c) {
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (int rr = r - hw; rr <= r + hw; ++rr) {
        for (int cc = c - hw; cc <= c + hw; ++cc) {
          const double ix = 0.5 * (intensity(rr, cc + 1) - intensity(rr, cc - 1));
          const double iy = 0.5 * (intensity(rr + 1, cc) - intensity(rr - 1, cc));
          sxx += ix * ix;
          sxy += ix * iy;
          syy += iy * iy;
        }
      }
      const double n = static_cast<double>(cfg.score_window) * cfg.score_window;
      sxx /= n;
      sxy /= n;
      syy /= n;
      const double half_trace = 0.5 * (sxx + syy);
      const double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
      score(r, c) = static_cast<float>(half_trace - disc);
    }
  }

  struct Candidate {
    float score;
    int r, c;
  };
  std::vector<Candidate> cands;
  for (int r = margin; r < rows - margin; ++r) {
    for (int c = margin; c < cols - margin; ++c) {
      if (!allowed(r, c) || score(r, c) < cfg.min_score) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr || dc) && score(r + dr, c + dc) > score(r, c)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) cands.push_back({score(r, c), r, c});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  FeatureSet out = keep;
  const double min_d2 = cfg.min_spacing * cfg.min_spacing;
  for (const auto& cand : cands) {
    if (static_cast<int>(out.size()) >= cfg.max_features) break;
    const Vec2 pos(cand.c, cand.r);
    const bool crowded = std::any_of(out.points.begin(), out.points.end(),
                                     [&](const TrackedPoint& p) { return (p.pos - pos).squaredNorm() < min_d2; });
    if (crowded) continue;
    TrackedPoint point;
    point.pos = pos;
    if (!extract_patch(intensity, pos, cfg.patch_size, point.patch)) continue;
    out.points.push_back(std::move(point));
  }
  return out;
}

FeatureSet track_features(const Grid<float>& intensity, const FeatureSet& previous, const TrackerConfig& cfg,
                          double depth) {
  const int ps = cfg.patch_size;
  const int ph = ps / 2;
  const int sr = cfg.search_size / 2;
  const double n = static_cast<double>(ps) * ps;
  const double inf = std::numeric_limits<double>::infinity();
  const int rows = intensity.rows(), cols = intensity.cols();

  FeatureSet out;
  std::vector<int> x0(ps), y0(ps);
  std::vector<double> wx(ps), wy(ps);
  for (const auto& point : previous.points) {
    const double scale = depth > 0.0 && point.template_depth > 0.0 ? point.template_depth / depth : 1.0;
    // Sample grid of the (possibly scaled) patch. Every candidate shift is a
    // whole pixel, so the bilinear weights are shared by all candidates.
    for (int k = 0; k < ps; ++k) {
      const double x = point.pos.x() + scale * (k - ph);
      const double y = point.pos.y() + scale * (k - ph);
      x0[k] = static_cast<int>(std::floor(x));
      y0[k] = static_cast<int>(std::floor(y));
      wx[k] = x - x0[k];
      wy[k] = y - y0[k];
    }
    auto match_cost = [&](int dx, int dy, double bound) {
      double sum = 0.0;
      for (int py = 0; py < ps; ++py) {
        const int r = y0[py] + dy;
        const double ty = wy[py];
        if (r < 0 || r > rows - 1 || (r == rows - 1 && ty > 0.0)) return inf;
        const int r1 = std::min(r + 1, rows - 1);
        const float* t = &point.patch[static_cast<std::size_t>(py) * ps];
        for (int px = 0; px < ps; ++px) {
          const int c = x0[px] + dx;
          const double tx = wx[px];
          if (c < 0 || c > cols - 1 || (c == cols - 1 && tx > 0.0)) return inf;
          const int c1 = std::min(c + 1, cols - 1);
          const double v = (intensity(r, c) * (1 - tx) + intensity(r, c1) * tx) * (1 - ty) +
                           (intensity(r1, c) * (1 - tx) + intensity(r1, c1) * tx) * ty;
          const double d = static_cast<float>(v) - t[px];
          sum += d * d;
        }
        if (sum > bound) return sum;  // partial sum already worse
      }
      return sum;
    };

    double best = inf;
    int best_dx = 0, best_dy = 0;
    for (int dy = -sr; dy <= sr; ++dy) {
      for (int dx = -sr; dx <= sr; ++dx) {
        const double sum = match_cost(dx, dy, best);
        // Prefer the smallest displacement among equal scores.
        if (sum < best || (sum == best && dx * dx + dy * dy < best_dx * best_dx + best_dy * best_dy)) {
          best = sum;
          best_dx = dx;
          best_dy = dy;
        }
      }
    }
    if (!std::isfinite(best) || best / n > cfg.max_mean_ssd) continue;

    Vec2 sub(0.0, 0.0);
    if (best > 1e-12) {
      const int cy = best_dy + sr, cx = best_dx + sr;
      auto full = [&](int dx, int dy) { return match_cost(dx, dy, inf); };
      if (cx > 0 && cx < 2 * sr) {
        const double l = full(best_dx - 1, best_dy), r = full(best_dx + 1, best_dy);
        if (std::isfinite(l) && std::isfinite(r)) sub.x() = parabola_offset(l, best, r);
      }
      if (cy > 0 && cy < 2 * sr) {
        const double u = full(best_dx, best_dy - 1), d = full(best_dx, best_dy + 1);
        if (std::isfinite(u) && std::isfinite(d)) sub.y() = parabola_offset(u, best, d);
      }
    }
    TrackedPoint moved = point;
    moved.pos = point.pos + Vec2(best_dx, best_dy) + sub;
    if (depth > 0.0 && (point.template_depth <= 0.0 || std::abs(scale - 1.0) > cfg.max_scale_change)) {
      if (!extract_patch(intensity, moved.pos, cfg.patch_size, moved.patch)) continue;
      moved.template_depth = depth;
    } else {
      std::vector<float> probe;
      if (!extract_patch(intensity, moved.pos, cfg.patch_size, probe)) continue;
    }
    out.points.push_back(std::move(moved));
  }
  return out;
}

TrackingResult detect_and_track(const Grid<float>& intensity, const Mask& allowed, const FeatureSet& previous,
                                const TrackerConfig& cfg) {
  TrackingResult result;
  if (!previous.empty()) result.features = track_features(intensity, previous, cfg);
  if (static_cast<int>(result.features.size()) < cfg.min_features) {
    result.features = detect_features(intensity, allowed, cfg, result.features);
    result.redetected = true;
  }
  result.lost = result.features.empty();
  return result;
}

Vec2 centroid(const FeatureSet& features, const CameraModel& intrinsics) {
  if (features.empty()) throw std::invalid_argument("centroid of an empty feature set");
  Vec2 mean(0.0, 0.0);
  for (const auto& p : features.points) mean += p.pos;
  mean /= static_cast<double>(features.size());
  return intrinsics.normalized(mean.x(), mean.y());
}

std::optional<InteractionMatrix> interaction_matrix(const Vec2& s, double depth) {
  if (!std::isfinite(depth) || depth <= 0.0 || !s.allFinite()) return std::nullopt;
  InteractionMatrix L;
  L << -1.0 / depth, 0.0, s.x() / depth,
       0.0, -1.0 / depth, s.y() / depth;
  return L;
}

std::optional<Eigen::Matrix<double, 3, 2>> pseudo_inverse(const InteractionMatrix& L) {
  const Eigen::Matrix2d gram = L * L.transpose();
  const double det = gram.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-300) return std::nullopt;
  return Eigen::Matrix<double, 3, 2>(L.transpose() * gram.inverse());
}

void ServoGains::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(v_xy_max > 0.0) || !(v_z_max > 0.0)) throw std::invalid_argument("velocity limits must be > 0");
  if (!(descent_rate > 0.0)) throw std::invalid_argument("descent rate must be > 0");
  if (!(align_threshold > 0.0)) throw std::invalid_argument("alignment threshold must be > 0");
}

Vec3 saturate(const Vec3& v, const ServoGains& gains) {
  Vec3 out = v;
  const double lateral = std::hypot(v.x(), v.y());
  if (lateral > gains.v_xy_max) {
    const double k = gains.v_xy_max / lateral;
    out.x() *= k;
    out.y() *= k;
  }
  out.z() = std::clamp(v.z(), -gains.v_z_max, gains.v_z_max);
  return out;
}

VelocityCommand control(const ServoState& state, const ServoGains& gains) {
  const auto L = interaction_matrix(state.feature, state.depth);
  if (!L) return VelocityCommand::hover_command();
  const auto L_pinv = pseudo_inverse(*L);
  if (!L_pinv) return VelocityCommand::hover_command();
  const Vec2 e = state.error();
  if (!e.allFinite()) return VelocityCommand::hover_command();

  VelocityCommand cmd;
  Vec3 v = -gains.lambda * (*L_pinv) * e;
  if (e.norm() < gains.align_threshold) {
    v.z() = gains.descent_rate;
    cmd.descending = true;
  }
  cmd.v = saturate(v, gains);
  if (!cmd.v.allFinite()) return VelocityCommand::hover_command();
  cmd.hover = false;
  return cmd;
}

}  // namespace landsite
