#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "landsite/perception.hpp"

using namespace landsite;

namespace {

World flat_world(std::vector<Box> boxes = {}, TerrainType type = TerrainType::kFlat, double grade = 0.0) {
  WorldSpec s;
  s.x_min = s.y_min = -5;
  s.x_max = s.y_max = 5;
  s.terrain.type = type;
  s.terrain.grade_deg = grade;
  s.obstacles = std::move(boxes);
  return build_world(s);
}

DepthFrame constant_frame(double depth) {
  DepthFrame f;
  f.camera = CameraModel{};
  f.depth = Grid<double>(f.camera.height, f.camera.width, depth);
  f.valid = Mask(f.camera.height, f.camera.width, 1);
  f.intensity = Grid<float>(f.camera.height, f.camera.width, 0.5f);
  return f;
}

// 4-connected components of `m` by breadth-first flood fill.
std::vector<std::vector<PixelIndex>> components(const Mask& m) {
  Grid<int> seen(m.rows(), m.cols(), 0);
  std::vector<std::vector<PixelIndex>> out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (!m(r, c) || seen(r, c)) continue;
      std::vector<PixelIndex> comp;
      std::queue<PixelIndex> q;
      q.push({r, c});
      seen(r, c) = 1;
      while (!q.empty()) {
        const PixelIndex p = q.front();
        q.pop();
        comp.push_back(p);
        const int dr[] = {1, -1, 0, 0}, dc[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int rr = p.row + dr[k], cc = p.col + dc[k];
          if (m.in_bounds(rr, cc) && m(rr, cc) && !seen(rr, cc)) {
            seen(rr, cc) = 1;
            q.push({rr, cc});
          }
        }
      }
      out.push_back(std::move(comp));
    }
  }
  return out;
}

RegionMask block_region(int r0, int r1, int c0, int c1, double depth) {
  CameraModel cam;
  RegionMask m;
  m.pixels = Mask(cam.height, cam.width, 0);
  double su = 0, sv = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      m.pixels(r, c) = 1;
      ++m.area_px;
      su += c;
      sv += r;
    }
  }
  m.centroid_px = {su / m.area_px, sv / m.area_px};
  m.bbox_min = {r0, c0};
  m.bbox_max = {r1, c1};
  m.mean_depth = depth;
  return m;
}

Vec3 svd_normal(const std::vector<Vec3>& pts) {
  Eigen::MatrixXd a(pts.size(), 3);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = (pts[i] - mean).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  return svd.matrixV().col(2);
}

}  // namespace

TEST_CASE("noise-free flat frame gives one region over all valid pixels") {
  const DepthFrame f = render_true_depth(flat_world(), CameraModel{});
  const auto regions = extract_regions(f, ScreeningThresholds{});
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].area_px == f.rows() * f.cols());
  CHECK(regions[0].invalid_px == 0);
}

TEST_CASE("a wall splits the frame into two regions") {
  const DepthFrame f = render_true_depth(flat_world({Box{{0.0, 0.0}, {0.1, 12.0}, 1.0}}), CameraModel{});
  const ScreeningThresholds th;
  const ScreeningResult screened = screen_pixels(f, th);
  const auto regions = extract_regions(f, th, screened);
  REQUIRE(regions.size() == 2);

  // Oracle: flood-fill components of the passable set, filtered by area.
  auto comps = components(screened.passable);
  std::erase_if(comps, [&](const auto& c) { return static_cast<int>(c.size()) < th.min_area; });
  REQUIRE(comps.size() == 2);
  for (const auto& region : regions) {
    const bool matched = std::any_of(comps.begin(), comps.end(), [&](const auto& comp) {
      if (static_cast<int>(comp.size()) != region.area_px) return false;
      return std::all_of(comp.begin(), comp.end(), [&](const PixelIndex& p) { return region.pixels(p.row, p.col) != 0; });
    });
    CHECK(matched);
  }
  // One region on each side of the image centre.
  const bool left = regions[0].centroid_px.x() < 79.5;
  CHECK(left != (regions[1].centroid_px.x() < 79.5));
}

TEST_CASE("all-invalid frame yields no regions") {
  DepthFrame f = constant_frame(5.0);
  f.valid.fill(0);
  CHECK(extract_regions(f, ScreeningThresholds{}).empty());
}

TEST_CASE("regions are disjoint, 4-connected and sorted by area") {
  WorldSpec s;
  s.terrain.type = TerrainType::kRough;
  s.pads.push_back({{0.8, 0.0}, {1.0, 1.0}, 0.15});
  s.pads.push_back({{-1.5, 0.5}, {0.5, 0.5}, 0.15});
  s.obstacles.push_back({{-1.0, -1.0}, {0.5, 0.5}, 1.0});
  const World w = build_world(s);
  NoiseModel n;
  n.sigma_range = 0.01;
  n.dropout_prob = 0.05;
  std::mt19937_64 rng(4);
  const DepthFrame f = corrupt(render_true_depth(w, CameraModel{}), n, rng);
  const auto regions = extract_regions(f, ScreeningThresholds{});
  REQUIRE(regions.size() >= 2);
  Grid<int> owner(f.rows(), f.cols(), 0);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (i > 0) CHECK(regions[i - 1].area_px >= regions[i].area_px);
    CHECK(components(regions[i].pixels).size() == 1);
    for (int r = 0; r < f.rows(); ++r) {
      for (int c = 0; c < f.cols(); ++c) owner(r, c) += regions[i].pixels(r, c);
    }
    const auto& cen = regions[i].centroid_px;
    CHECK(cen.x() >= regions[i].bbox_min.col);
    CHECK(cen.x() <= regions[i].bbox_max.col);
    CHECK(cen.y() >= regions[i].bbox_min.row);
    CHECK(cen.y() <= regions[i].bbox_max.row);
    CHECK(regions[i].invalid_px <= 0.3 * regions[i].area_px);
  }
  for (int v : owner.values()) CHECK(v <= 1);
}

TEST_CASE("plane fit on an exact level plane") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) pts.emplace_back(0.1 * i, 0.1 * j, 5.0);
  }
  const auto fit = fit_plane(pts);
  REQUIRE(fit);
  CHECK(fit->normal.x() == doctest::Approx(0.0));
  CHECK(fit->normal.y() == doctest::Approx(0.0));
  CHECK(fit->normal.z() == doctest::Approx(-1.0));
  CHECK(fit->rms_residual < 1e-12);
  CHECK(fit->inlier_count == 100);
}

TEST_CASE("plane fit recovers an analytic tilt") {
  std::vector<Vec3> pts;
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) {
      const double x = 0.1 * i, y = 0.1 * j;
      pts.emplace_back(x, y, 5.0 + 0.1 * x);
    }
  }
  const auto fit = fit_plane(pts);
  REQUIRE(fit);
  const Vec3 truth = Vec3(0.1, 0.0, -1.0).normalized();  // facing the camera at the origin
  CHECK((fit->normal - truth).norm() < 1e-6);
}

TEST_CASE("noisy plane fit agrees with an SVD oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.005);
  const Vec3 n_true = Vec3(0.2, -0.1, -1.0).normalized();
  const Vec3 p0(0.0, 0.0, 5.0);
  const Vec3 e1 = n_true.unitOrthogonal();
  const Vec3 e2 = n_true.cross(e1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.push_back(p0 + u(rng) * e1 + u(rng) * e2 + noise(rng) * n_true);
  const auto fit = fit_plane(pts);
  REQUIRE(fit);
  CHECK(fit->rms_residual >= 0.0035);
  CHECK(fit->rms_residual <= 0.0065);
  const double angle = std::acos(std::min(1.0, std::abs(fit->normal.dot(n_true))));
  CHECK(angle < std::numbers::pi / 180.0);
  CHECK(std::abs(std::abs(fit->normal.dot(svd_normal(pts))) - 1.0) < 1e-9);
  CHECK(fit->normal.norm() == doctest::Approx(1.0));
}

TEST_CASE("plane fit is invariant to ordering and duplication") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50; ++i) pts.emplace_back(0.05 * i, 0.03 * (i % 7), 4.0 + g(rng));
  const auto a = fit_plane(pts);
  auto shuffled = pts;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto b = fit_plane(shuffled);
  auto doubled = pts;
  doubled.insert(doubled.end(), pts.begin(), pts.end());
  const auto c = fit_plane(doubled);
  REQUIRE((a && b && c));
  CHECK((a->normal - b->normal).norm() < 1e-9);
  CHECK((a->normal - c->normal).norm() < 1e-9);
  CHECK(a->rms_residual == doctest::Approx(c->rms_residual).epsilon(1e-9));
}

TEST_CASE("degenerate plane inputs fail explicitly") {
  CHECK_FALSE(fit_plane(std::vector<Vec3>{{0, 0, 1}, {1, 0, 1}}));
  CHECK_FALSE(fit_plane(std::vector<Vec3>{{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}}));
}

TEST_CASE("ideal flat region has zero cues") {
  const DepthFrame f = render_true_depth(flat_world(), CameraModel{});
  const auto regions = extract_regions(f, ScreeningThresholds{});
  REQUIRE(regions.size() == 1);
  const auto fit = fit_plane(f, regions[0]);
  REQUIRE(fit);
  const Mask none(f.rows(), f.cols(), 0);
  const CueVector cues = compute_cues(f, regions[0], *fit, Vec3(0, 0, 1), none, CueConfig{});
  CHECK(cues.flatness < 1e-9);
  CHECK(cues.slope < 1e-6);
  CHECK(cues.obstacle == 0.0);
}

TEST_CASE("ten degree ramp gives the analytic slope") {
  const DepthFrame f = render_true_depth(flat_world({}, TerrainType::kRamp, 10.0), CameraModel{});
  const auto regions = extract_regions(f, ScreeningThresholds{});
  REQUIRE(regions.size() == 1);
  const auto fit = fit_plane(f, regions[0]);
  REQUIRE(fit);
  const Mask none(f.rows(), f.cols(), 0);
  const CueVector cues = compute_cues(f, regions[0], *fit, Vec3(0, 0, 1), none, CueConfig{});
  CHECK(std::abs(cues.slope - 0.1745) < 1e-3);
  // Sign of the normal does not matter.
  PlaneFit flipped = *fit;
  flipped.normal = -flipped.normal;
  CHECK(compute_cues(f, regions[0], flipped, Vec3(0, 0, 1), none, CueConfig{}).slope == doctest::Approx(cues.slope));
}

TEST_CASE("obstacle one metre away scores exp(-2)") {
  const DepthFrame f = constant_frame(5.0);  // gsd = 5 / 120 m/px
  const RegionMask region = block_region(40, 80, 40, 80, 5.0);  // centroid (60, 60)
  // The nine pixels nearest the centroid span columns 59..61; an obstacle
  // column 24 px beyond is 24 * 5/120 = 1.0 m away.
  Mask obstacles(f.rows(), f.cols(), 0);
  for (int r = 0; r < f.rows(); ++r) obstacles(r, 85) = 1;
  PlaneFit fit;
  CueConfig cfg;
  cfg.obstacle_scale = 0.5;
  const CueVector cues = compute_cues(f, region, fit, Vec3(0, 0, 1), obstacles, cfg);
  CHECK(cues.obstacle == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(cues.obstacle == doctest::Approx(0.1353).epsilon(1e-3));
}

TEST_CASE("obstacle score does not increase with distance") {
  const DepthFrame f = constant_frame(5.0);
  const RegionMask region = block_region(40, 80, 40, 80, 5.0);
  double prev = 2.0;
  for (int col = 82; col < 160; col += 5) {
    Mask obstacles(f.rows(), f.cols(), 0);
    for (int r = 0; r < f.rows(); ++r) obstacles(r, col) = 1;
    const double o = compute_cues(f, region, PlaneFit{}, Vec3(0, 0, 1), obstacles, CueConfig{}).obstacle;
    CHECK(o <= prev);
    CHECK(o >= 0.0);
    CHECK(o <= 1.0);
    prev = o;
  }
}

TEST_CASE("footprint IoU") {
  std::vector<std::int64_t> a, b;
  for (int ix = 0; ix < 10; ++ix) {
    for (int iy = 0; iy < 10; ++iy) a.push_back(GroundFootprint::key(ix, iy));
  }
  for (int ix = 5; ix < 15; ++ix) {
    for (int iy = 0; iy < 10; ++iy) b.push_back(GroundFootprint::key(ix, iy));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const GroundFootprint fa(0.1, a), fb(0.1, b);
  CHECK(fa.area() == doctest::Approx(1.0));
  CHECK(footprint_iou(fa, fb) == doctest::Approx(0.5 / 1.5));
  CHECK(footprint_iou(fa, fa) == 1.0);
  std::vector<std::int64_t> c;
  for (int ix = 20; ix < 25; ++ix) c.push_back(GroundFootprint::key(ix, 0));
  CHECK(footprint_iou(fa, GroundFootprint(0.1, c)) == 0.0);
}

TEST_CASE("footprints are measured on the ground") {
  const DepthFrame f = render_true_depth(flat_world(), CameraModel{});
  const auto regions = extract_regions(f, ScreeningThresholds{});
  REQUIRE(regions.size() == 1);
  // 160 x 120 px at 5/120 m/px covers 6.67 m x 5 m.
  CHECK(regions[0].footprint.area() == doctest::Approx(6.667 * 5.0).epsilon(0.05));
}
