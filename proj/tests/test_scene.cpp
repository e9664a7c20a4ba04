#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "landsite/scene.hpp"

using namespace landsite;

namespace {

WorldSpec small_spec(TerrainType type) {
  WorldSpec s;
  s.x_min = -4;
  s.y_min = -4;
  s.x_max = 4;
  s.y_max = 4;
  s.terrain.type = type;
  s.seed = 3;
  return s;
}

// Independent heightfield oracle: own bilinear lookup and a fine fixed-step
// march followed by plain bisection.
double oracle_height(const World& w, double x, double y) {
  const auto& h = w.heightmap();
  const double res = w.ground_resolution();
  const double gx = (x - w.x_min()) / res, gy = (y - w.y_min()) / res;
  const int c = std::clamp(static_cast<int>(std::floor(gx)), 0, h.cols() - 2);
  const int r = std::clamp(static_cast<int>(std::floor(gy)), 0, h.rows() - 2);
  const double tx = gx - c, ty = gy - r;
  return (1 - ty) * ((1 - tx) * h(r, c) + tx * h(r, c + 1)) + ty * ((1 - tx) * h(r + 1, c) + tx * h(r + 1, c + 1));
}

double oracle_depth(const World& w, const CameraModel& cam, int row, int col) {
  const Eigen::Vector3d n((col - cam.principal_point.x()) / cam.focal_length,
                          (row - cam.principal_point.y()) / cam.focal_length, 1.0);
  const Eigen::Vector3d d = cam.attitude.transpose() * n;
  auto gap = [&](double t) {
    const Eigen::Vector3d p = cam.position + t * d;
    return p.z() - oracle_height(w, p.x(), p.y());
  };
  const double step = 1e-3;
  double t = 0.0;
  while (gap(t + step) > 0.0) t += step;
  double a = t, b = t + step;
  for (int i = 0; i < 80; ++i) {
    const double m = 0.5 * (a + b);
    (gap(m) > 0.0 ? a : b) = m;
  }
  return b;
}

}  // namespace

TEST_CASE("flat terrain is identically zero") {
  const World w = build_world(small_spec(TerrainType::kFlat));
  for (double v : w.heightmap().values()) CHECK(v == 0.0);
}

TEST_CASE("ramp follows x tan(grade)") {
  auto spec = small_spec(TerrainType::kRamp);
  spec.terrain.grade_deg = 10.0;
  const World w = build_world(spec);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.9, 3.9);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), y = u(rng);
    CHECK(*w.terrain_height(x, y) == doctest::Approx(x * std::tan(10.0 * std::numbers::pi / 180.0)).epsilon(1e-12));
  }
}

TEST_CASE("world construction is deterministic") {
  auto spec = small_spec(TerrainType::kRough);
  spec.obstacles.push_back({{1, 1}, {0.5, 0.5}, 1.0});
  CHECK(build_world(spec) == build_world(spec));
  auto other = spec;
  other.seed = 4;
  CHECK_FALSE(build_world(spec) == build_world(other));
}

TEST_CASE("non-positive extents are rejected") {
  auto spec = small_spec(TerrainType::kFlat);
  spec.x_max = spec.x_min;
  CHECK_THROWS_AS(build_world(spec), std::invalid_argument);
  spec = small_spec(TerrainType::kFlat);
  spec.ground_resolution = 0.0;
  CHECK_THROWS_AS(build_world(spec), std::invalid_argument);
  spec = small_spec(TerrainType::kFlat);
  spec.obstacles.push_back({{0, 0}, {0.0, 1.0}, 1.0});
  CHECK_THROWS_AS(build_world(spec), std::invalid_argument);
}

TEST_CASE("overlapping boxes are accepted as a union") {
  auto spec = small_spec(TerrainType::kFlat);
  spec.obstacles.push_back({{0, 0}, {1, 1}, 1.0});
  spec.obstacles.push_back({{0.4, 0}, {1, 1}, 2.0});
  const World w = build_world(spec);
  CHECK(*w.surface_height(-0.3, 0) == 1.0);
  CHECK(*w.surface_height(0.3, 0) == 2.0);
}

TEST_CASE("nadir camera over flat ground sees constant z-depth") {
  const World w = build_world(small_spec(TerrainType::kFlat));
  CameraModel cam;
  cam.position = {0.2, -0.1, 5.0};
  const DepthFrame f = render_true_depth(w, cam);
  int valid = 0;
  for (int r = 0; r < f.rows(); ++r) {
    for (int c = 0; c < f.cols(); ++c) {
      if (!f.is_valid(r, c)) continue;
      ++valid;
      CHECK(std::abs(f.depth(r, c) - 5.0) < 1e-9);
    }
  }
  CHECK(valid == f.rows() * f.cols());
}

TEST_CASE("box top under the image centre") {
  auto spec = small_spec(TerrainType::kFlat);
  spec.obstacles.push_back({{0, 0}, {1, 1}, 1.0});
  const World w = build_world(spec);
  CameraModel cam;
  const DepthFrame f = render_true_depth(w, cam);
  CHECK(f.depth(59, 79) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f.depth(60, 80) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f.depth(0, 0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("rays that leave the world are invalid") {
  auto spec = small_spec(TerrainType::kFlat);
  spec.x_max = 0.5;
  const World w = build_world(spec);
  CameraModel cam;
  const DepthFrame f = render_true_depth(w, cam);
  CHECK(f.is_valid(60, 10));
  CHECK_FALSE(f.is_valid(60, 150));
}

TEST_CASE("rough terrain render matches an independent ray-march oracle") {
  const World w = build_world(small_spec(TerrainType::kRough));
  CameraModel cam;
  cam.position = {0.3, 0.7, 4.0};
  cam.attitude = CameraModel::nadir_attitude(0.4);
  const DepthFrame f = render_true_depth(w, cam);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> ur(0, cam.height - 1), uc(0, cam.width - 1);
  for (int i = 0; i < 8; ++i) {
    const int r = ur(rng), c = uc(rng);
    REQUIRE(f.is_valid(r, c));
    CHECK(std::abs(f.depth(r, c) - oracle_depth(w, cam, r, c)) < 1e-6);
  }
}

TEST_CASE("rendering is pure") {
  const World w = build_world(small_spec(TerrainType::kRough));
  CameraModel cam;
  const DepthFrame a = render_true_depth(w, cam);
  const DepthFrame b = render_true_depth(w, cam);
  CHECK(a.depth == b.depth);
  CHECK(a.valid == b.valid);
  CHECK(a.intensity == b.intensity);
}

TEST_CASE("camera validation") {
  CameraModel cam;
  CHECK_NOTHROW(cam.validate());
  cam.focal_length = 0;
  CHECK_THROWS(cam.validate());
  cam = CameraModel{};
  cam.principal_point = {200, 10};
  CHECK_THROWS(cam.validate());
  cam = CameraModel{};
  cam.attitude = Mat3::Identity() * 2.0;
  CHECK_THROWS(cam.validate());
  cam.attitude = -Mat3::Identity();
  CHECK_THROWS(cam.validate());  // det = -1
}

namespace {
DepthFrame constant_frame(int rows, int cols, double depth) {
  DepthFrame f;
  f.depth = Grid<double>(rows, cols, depth);
  f.valid = Mask(rows, cols, 1);
  f.intensity = Grid<float>(rows, cols, 0.5f);
  return f;
}
}  // namespace

TEST_CASE("zero noise is the identity") {
  const World w = build_world(small_spec(TerrainType::kRough));
  const DepthFrame f = render_true_depth(w, CameraModel{});
  std::mt19937_64 rng(5);
  const DepthFrame g = corrupt(f, NoiseModel{}, rng);
  CHECK(g.depth == f.depth);
  CHECK(g.valid == f.valid);
}

TEST_CASE("gaussian range noise statistics") {
  const DepthFrame f = constant_frame(1000, 1000, 5.0);
  NoiseModel n;
  n.sigma_range = 0.01;
  std::mt19937_64 rng(17);
  const DepthFrame g = corrupt(f, n, rng);
  double sum = 0, sq = 0;
  for (double d : g.depth.values()) {
    sum += d - 5.0;
    sq += (d - 5.0) * (d - 5.0);
  }
  const double N = 1e6;
  const double sd = std::sqrt(sq / N - (sum / N) * (sum / N));
  CHECK(std::abs(sd - 0.01) / 0.01 < 0.02);
}

TEST_CASE("dropout fraction") {
  const DepthFrame f = constant_frame(1000, 1000, 5.0);
  NoiseModel n;
  n.dropout_prob = 0.05;
  std::mt19937_64 rng(23);
  const DepthFrame g = corrupt(f, n, rng);
  int invalid = 0;
  for (auto v : g.valid.values()) invalid += v == 0;
  const double frac = invalid / 1e6;
  CHECK(frac >= 0.048);
  CHECK(frac <= 0.052);
}

TEST_CASE("burst bias shifts the whole frame") {
  const DepthFrame f = constant_frame(20, 20, 5.0);
  NoiseModel n;
  n.burst_prob = 1.0;
  n.burst_magnitude = 0.1;
  std::mt19937_64 rng(2);
  const DepthFrame g = corrupt(f, n, rng);
  const double shift = g.depth(0, 0) - 5.0;
  CHECK(std::abs(std::abs(shift) - 0.1) < 1e-12);
  for (double d : g.depth.values()) CHECK(d - 5.0 == doctest::Approx(shift));
}

TEST_CASE("corruption is reproducible and never produces non-positive depths") {
  const DepthFrame f = constant_frame(100, 100, 0.02);
  NoiseModel n;
  n.sigma_range = 0.05;
  n.dropout_prob = 0.1;
  n.burst_prob = 0.5;
  n.burst_magnitude = 0.2;
  std::mt19937_64 a(99), b(99);
  const DepthFrame ga = corrupt(f, n, a);
  const DepthFrame gb = corrupt(f, n, b);
  CHECK(ga.depth == gb.depth);
  CHECK(ga.valid == gb.valid);
  for (int r = 0; r < 100; ++r) {
    for (int c = 0; c < 100; ++c) {
      if (ga.is_valid(r, c)) CHECK(ga.depth(r, c) >= kMinCorruptedDepth);
    }
  }
}

TEST_CASE("noise model validation") {
  NoiseModel n;
  n.dropout_prob = 1.5;
  CHECK_THROWS(n.validate());
  n = NoiseModel{};
  n.sigma_range = -1;
  CHECK_THROWS(n.validate());
}
