#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "landsite/servo.hpp"

using namespace landsite;

namespace {

// Sum of random Gaussian blobs: smooth and aperiodic.
double texture(double u, double v) {
  struct Blob {
    double u, v, a, s;
  };
  static const std::vector<Blob> blobs = [] {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pu(-20, 180), pv(-20, 140), amp(-0.3, 0.3), sig(2.0, 4.0);
    std::vector<Blob> b;
    for (int i = 0; i < 400; ++i) b.push_back({pu(rng), pv(rng), amp(rng), sig(rng)});
    return b;
  }();
  double out = 0.5;
  for (const auto& b : blobs) {
    const double d2 = (u - b.u) * (u - b.u) + (v - b.v) * (v - b.v);
    out += b.a * std::exp(-d2 / (2 * b.s * b.s));
  }
  return out;
}

Grid<float> image(double du, double dv, int rows = 120, int cols = 160) {
  Grid<float> img(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) img(r, c) = static_cast<float>(texture(c - du, r - dv));
  }
  return img;
}

}  // namespace

TEST_CASE("interaction matrix entries") {
  const auto L = interaction_matrix(Vec2(0.2, -0.1), 4.0);
  REQUIRE(L);
  InteractionMatrix expected;
  expected << -0.25, 0.0, 0.05, 0.0, -0.25, -0.025;
  CHECK((*L - expected).norm() < 1e-15);
  CHECK_FALSE(interaction_matrix(Vec2(0, 0), 0.0));
  CHECK_FALSE(interaction_matrix(Vec2(0, 0), -1.0));
  CHECK_FALSE(interaction_matrix(Vec2(0, 0), std::nan("")));
  CHECK_FALSE(interaction_matrix(Vec2(std::nan(""), 0), 1.0));
}

TEST_CASE("closed-form pseudoinverse matches an orthogonal-decomposition oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> s(-0.7, 0.7), z(0.3, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const auto L = interaction_matrix(Vec2(s(rng), s(rng)), z(rng));
    REQUIRE(L);
    const auto P = pseudo_inverse(*L);
    REQUIRE(P);
    const Eigen::Matrix<double, 3, 2> oracle = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(*L).pseudoInverse();
    CHECK((*P - oracle).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
    CHECK(((*L) * (*P) - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("rank-deficient input has no pseudoinverse") {
  CHECK_FALSE(pseudo_inverse(InteractionMatrix::Zero()));
}

TEST_CASE("centred feature descends straight down") {
  const ServoGains g;
  const VelocityCommand cmd = control(ServoState{{0, 0}, {0, 0}, 5.0}, g);
  CHECK_FALSE(cmd.hover);
  CHECK(cmd.descending);
  CHECK(cmd.v.x() == 0.0);
  CHECK(cmd.v.y() == 0.0);
  CHECK(cmd.v.z() == g.descent_rate);
}

TEST_CASE("misaligned feature moves toward it without descending") {
  ServoGains g;
  g.v_xy_max = 10.0;
  g.v_z_max = 10.0;
  const ServoState st{{0.1, 0.0}, {0, 0}, 5.0};
  const VelocityCommand cmd = control(st, g);
  CHECK_FALSE(cmd.descending);
  const Eigen::Matrix<double, 3, 2> P =
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(*interaction_matrix(st.feature, st.depth)).pseudoInverse();
  const Vec3 expected = -g.lambda * P * st.error();
  CHECK((cmd.v - expected).norm() < 1e-12);
  CHECK(cmd.v.x() > 0.0);
}

TEST_CASE("alignment gate is strict") {
  ServoGains g;
  CHECK(control(ServoState{{0.049, 0}, {0, 0}, 3.0}, g).descending);
  CHECK_FALSE(control(ServoState{{0.05, 0}, {0, 0}, 3.0}, g).descending);
}

TEST_CASE("saturation caps lateral norm and vertical magnitude") {
  const ServoGains g;
  const Vec3 v = saturate(Vec3(3.0, 4.0, -2.0), g);
  CHECK(std::hypot(v.x(), v.y()) == doctest::Approx(g.v_xy_max));
  CHECK(v.x() / v.y() == doctest::Approx(0.75));
  CHECK(v.z() == -g.v_z_max);
  const Vec3 small(0.1, -0.1, 0.05);
  CHECK(saturate(small, g) == small);
}

TEST_CASE("commands respect limits for random states") {
  const ServoGains g;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> s(-0.7, 0.7), z(0.3, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const VelocityCommand cmd = control(ServoState{{s(rng), s(rng)}, {0, 0}, z(rng)}, g);
    REQUIRE_FALSE(cmd.hover);
    CHECK(std::hypot(cmd.v.x(), cmd.v.y()) <= g.v_xy_max + 1e-12);
    CHECK(std::abs(cmd.v.z()) <= g.v_z_max + 1e-12);
  }
}

TEST_CASE("invalid depth hovers") {
  const VelocityCommand cmd = control(ServoState{{0.1, 0.1}, {0, 0}, 0.0}, ServoGains{});
  CHECK(cmd.hover);
  CHECK(cmd.v == Vec3::Zero());
}

TEST_CASE("gain validation") {
  ServoGains g;
  g.lambda = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("centroid in normalized coordinates") {
  const CameraModel cam;
  FeatureSet fs;
  for (Vec2 p : {Vec2(79.5, 59.5), Vec2(91.5, 59.5), Vec2(79.5, 71.5), Vec2(91.5, 71.5)}) {
    TrackedPoint tp;
    tp.pos = p;
    fs.points.push_back(tp);
  }
  const Vec2 s = centroid(fs, cam);
  CHECK(s.x() == doctest::Approx(6.0 / 120.0));
  CHECK(s.y() == doctest::Approx(6.0 / 120.0));
  CHECK_THROWS_AS(centroid(FeatureSet{}, cam), std::invalid_argument);
}

TEST_CASE("textureless image yields no features") {
  const Grid<float> flat(120, 160, 0.4f);
  const Mask all(120, 160, 1);
  CHECK(detect_features(flat, all, TrackerConfig{}).empty());
}

TEST_CASE("detection respects the allowed mask and spacing") {
  const Grid<float> img = image(0, 0);
  Mask allowed(120, 160, 0);
  for (int r = 30; r < 90; ++r) {
    for (int c = 40; c < 120; ++c) allowed(r, c) = 1;
  }
  const TrackerConfig cfg;
  const FeatureSet fs = detect_features(img, allowed, cfg);
  REQUIRE(fs.size() >= static_cast<std::size_t>(cfg.min_features));
  CHECK(fs.size() <= static_cast<std::size_t>(cfg.max_features));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Vec2& p = fs.points[i].pos;
    CHECK(allowed(static_cast<int>(p.y()), static_cast<int>(p.x())) == 1);
    CHECK(fs.points[i].patch.size() == static_cast<std::size_t>(cfg.patch_size * cfg.patch_size));
    for (std::size_t j = 0; j < i; ++j) CHECK((fs.points[j].pos - p).norm() >= cfg.min_spacing);
  }
}

TEST_CASE("tracking recovers a sub-pixel image shift") {
  const TrackerConfig cfg;
  Mask interior(120, 160, 0);  // keep shifted patches inside the image
  for (int r = 15; r < 105; ++r) {
    for (int c = 15; c < 145; ++c) interior(r, c) = 1;
  }
  const FeatureSet fs = detect_features(image(0, 0), interior, cfg);
  REQUIRE(fs.size() >= 10);
  const double du = 2.3, dv = -1.6;
  const FeatureSet moved = track_features(image(du, dv), fs, cfg);
  REQUIRE(moved.size() >= fs.size() / 2);
  Vec2 mean_shift(0, 0);
  for (const auto& p : moved.points) {
    const auto it = std::find_if(fs.points.begin(), fs.points.end(), [&](const TrackedPoint& q) {
      return (q.pos - p.pos + Vec2(du, dv)).norm() < 1.0;
    });
    REQUIRE(it != fs.points.end());
    mean_shift += p.pos - it->pos;
  }
  mean_shift /= static_cast<double>(moved.size());
  CHECK(std::abs(mean_shift.x() - du) < 0.15);
  CHECK(std::abs(mean_shift.y() - dv) < 0.15);
}

TEST_CASE("tracked points keep their ids and templates without depth") {
  const TrackerConfig cfg;
  const Mask all(120, 160, 1);
  FeatureSet fs = detect_features(image(0, 0), all, cfg);
  for (std::size_t i = 0; i < fs.size(); ++i) fs.points[i].id = static_cast<int>(i) + 100;
  const FeatureSet moved = track_features(image(1.0, 1.0), fs, cfg);
  REQUIRE_FALSE(moved.empty());
  for (const auto& p : moved.points) {
    CHECK(p.id >= 100);
    CHECK(p.patch == fs.points[static_cast<std::size_t>(p.id - 100)].patch);
  }
}

TEST_CASE("template is re-taken once the depth scale drifts") {
  const TrackerConfig cfg;
  const Mask all(120, 160, 1);
  FeatureSet fs = detect_features(image(0, 0), all, cfg);
  REQUIRE_FALSE(fs.empty());
  const FeatureSet first = track_features(image(0, 0), fs, cfg, 5.0);
  REQUIRE_FALSE(first.empty());
  for (const auto& p : first.points) CHECK(p.template_depth == 5.0);
  // 10% closer: template kept.
  const FeatureSet near = track_features(image(0, 0), first, cfg, 4.5);
  for (const auto& p : near.points) CHECK(p.template_depth == 5.0);
  // 25% closer: template re-taken at the new depth.
  const FeatureSet nearer = track_features(image(0, 0), first, cfg, 4.0);
  for (const auto& p : nearer.points) CHECK(p.template_depth == 4.0);
}

TEST_CASE("detect_and_track re-detects when too few points survive") {
  const TrackerConfig cfg;
  const Mask all(120, 160, 1);
  const TrackingResult first = detect_and_track(image(0, 0), all, FeatureSet{}, cfg);
  CHECK(first.redetected);
  CHECK_FALSE(first.lost);
  const TrackingResult second = detect_and_track(image(0.5, 0.5), all, first.features, cfg);
  CHECK_FALSE(second.redetected);
  const TrackingResult blank = detect_and_track(Grid<float>(120, 160, 0.2f), all, FeatureSet{}, cfg);
  CHECK(blank.lost);
}
