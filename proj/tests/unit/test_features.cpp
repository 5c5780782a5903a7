#include <doctest.h>

#include <cmath>
#include <numbers>

#include "intent/features.hpp"

using namespace intent;
using namespace intent::features;
using perception::GazeEstimate;

namespace {

constexpr int kCases = 1000;

Vec3 random_point(Rng& rng, double r = 1.0) {
  return {rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r)};
}

SensorSnapshot random_snapshot(Rng& rng, std::size_t n, double p_active) {
  SensorSnapshot s;
  for (std::size_t i = 0; i < n; ++i) {
    s.gamma.push_back(rng.bernoulli(p_active) ? 1 : 0);
    s.positions.push_back(random_point(rng));
  }
  return s;
}

PoiSet random_pois(Rng& rng) {
  PoiSet p;
  p.pois.push_back({"hand_left", PoiKind::HandLeft, {rng.uniform(0, 640), rng.uniform(0, 480)}, {}});
  p.pois.push_back({"hand_right", PoiKind::HandRight, {rng.uniform(0, 640), rng.uniform(0, 480)}, {}});
  for (int i = 0; i < 3; ++i)
    p.pois.push_back({"static", PoiKind::Static, {rng.uniform(0, 640), rng.uniform(0, 480)}, {}});
  return p;
}

GazeEstimate random_gaze(Rng& rng) {
  const double th = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return GazeEstimate::from({rng.uniform(0, 640), rng.uniform(0, 480)}, {std::cos(th), std::sin(th)});
}

ScalingParams random_scaling(Rng& rng) {
  ScalingParams s;
  s.d_max = rng.uniform(0.05, 2.0);
  s.d_dot_max = rng.uniform(0.05, 5.0);
  s.alpha_max = rng.uniform(0.1, std::numbers::pi);
  s.alpha_dot_max = rng.uniform(0.05, 5.0);
  s.proximity_dot_max = rng.uniform(0.05, 5.0);
  return s;
}

FrameInputs random_frame(Rng& rng, double t, double p_active) {
  FrameInputs in;
  in.t = t;
  in.snapshot = random_snapshot(rng, 1 + rng.index(12), p_active);
  if (rng.bernoulli(0.9)) in.wrists.left = random_point(rng);
  if (rng.bernoulli(0.9)) in.wrists.right = random_point(rng);
  if (rng.bernoulli(0.9)) in.gaze = random_gaze(rng);
  in.pois = random_pois(rng);
  return in;
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

TEST_SUITE("features") {

TEST_CASE("hand distance") {
  SensorSnapshot s{{0, 1}, {Vec3(0, 0, 0), Vec3(1, 0, 0)}};
  ScalingParams sc;
  sc.d_max = 0.6;
  CHECK(hand_distance(Vec3(5, 5, 5), 0, s, sc) == 1.0);
  CHECK(hand_distance(Vec3(1, 0, 0), 1, s, sc) == 0.0);
  CHECK(hand_distance(Vec3(1, 0.3, 0), 1, s, sc) == doctest::Approx(0.5));
  CHECK(hand_distance(Vec3(9, 0, 0), 1, s, sc) == 1.0);
  CHECK_THROWS_AS(hand_distance(Vec3::Zero(), 2, s, sc), LookupError);
}

TEST_CASE("backward difference") {
  BackwardDifference bd;
  CHECK(bd.update(0.4, 0.0, 1.0) == 0.0);
  CHECK(bd.update(0.4, 0.1, 1.0) == 0.0);

  BackwardDifference b2;
  b2.update(0.7, 1.0, 2.0);
  CHECK(b2.update(0.5, 1.1, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(b2.update(0.5, 1.1, 2.0), StreamOrderError);

  // A gating jump shows up for exactly one frame.
  BackwardDifference b3;
  b3.update(1.0, 0.0, 20.0);
  CHECK(b3.update(0.2, 1.0 / 15, 20.0) > 0.5);
  CHECK(b3.update(0.2, 2.0 / 15, 20.0) == 0.0);
}

TEST_CASE("hand assignment examples") {
  ScalingParams sc;
  sc.alpha_max = std::numbers::pi;
  const auto gaze = GazeEstimate::from({100, 100}, {1, 0});
  PoiSet pois;
  pois.pois.push_back({"hand_left", PoiKind::HandLeft, {100, 300}, {}});
  pois.pois.push_back({"hand_right", PoiKind::HandRight, {300, 100}, {}});
  Wrists w{Vec3(0, 1, 0), Vec3(0, -1, 0)};

  SensorSnapshot none{{0, 0}, {Vec3(0, 1.1, 0), Vec3(0, -1.1, 0)}};
  auto a = assign_hands_and_gaze(none, w, gaze, pois, sc);
  CHECK(a.left == 1.0);
  CHECK(a.right == 1.0);

  SensorSnapshot right{{0, 1}, none.positions};
  a = assign_hands_and_gaze(right, w, gaze, pois, sc);
  CHECK(a.right == 0.0);
  CHECK(a.left == 1.0);

  SensorSnapshot both{{1, 1}, none.positions};
  auto mid = GazeEstimate::from({100, 100}, {1, 1});
  a = assign_hands_and_gaze(both, w, mid, pois, sc);
  CHECK(a.left < 1.0);
  CHECK(a.right < 1.0);

  SensorSnapshot tie{{1}, {Vec3(0, 0, 0)}};
  a = assign_hands_and_gaze(tie, w, gaze, pois, sc);
  CHECK(a.left < 1.0);
  CHECK(a.right == 1.0);
}

TEST_CASE("reduction examples") {
  ScalingParams sc;
  sc.d_max = 0.5;
  sc.alpha_max = std::numbers::pi;
  PoiSet pois;
  pois.pois.push_back({"hand_left", PoiKind::HandLeft, {100, 300}, {}});
  pois.pois.push_back({"hand_right", PoiKind::HandRight, {300, 100}, {}});
  pois.pois.push_back({"monitor", PoiKind::Static, {100, 0}, {}});

  FrameInputs in;
  in.snapshot = {{0, 0}, {Vec3(0, 1, 0), Vec3(0, -1, 0)}};
  in.wrists = {Vec3(0.5, 1, 0), Vec3(0.5, -1, 0)};
  in.gaze = GazeEstimate::from({100, 100}, {0, -1});
  in.pois = pois;
  FeatureStreamState st;
  FeatureVector f;
  for (int i = 0; i < 3; ++i) {
    in.t = i * 0.1;
    f = extract(in, sc, st);
  }
  CHECK(f.gamma == 0.0);
  CHECK(f.d == 1.0);
  CHECK(f.d_dot == 0.0);
  CHECK(f.alpha == 0.0);
  CHECK(f.alpha_dot == 0.0);

  in.snapshot.gamma = {0, 1};
  in.wrists.right = Vec3(0, -1, 0);
  in.gaze = GazeEstimate::from({100, 100}, {1, 0});
  in.t = 1.0;
  f = extract(in, sc, st);
  CHECK(f.gamma == 1.0);
  CHECK(f.d == 0.0);
  CHECK(f.alpha == 0.0);

  // Body contact: wrists far from the sensor, gaze off every target by more
  // than the fitted maximum angle.
  FeatureStreamState st2;
  sc.alpha_max = 1.0;
  in.wrists = {Vec3(3, 1, 0), Vec3(3, -1, 0)};
  in.gaze = GazeEstimate::from({100, 100}, {-1, 0});
  for (int i = 0; i < 3; ++i) {
    in.t = 2.0 + i * 0.1;
    f = extract(in, sc, st2);
  }
  CHECK(f.gamma == 1.0);
  CHECK(f.d == 1.0);
  CHECK(f.d_dot == 0.0);
  CHECK(f.alpha == 1.0);
  CHECK(f.alpha_dot == 0.0);
}

TEST_CASE("property: touch gating") {
  Rng rng(101);
  for (int i = 0; i < kCases; ++i) {
    auto in = random_frame(rng, 0.0, 0.0);
    const auto sc = random_scaling(rng);
    const auto a = assign_hands_and_gaze(in.snapshot, in.wrists, in.gaze, in.pois, sc);
    FeatureStreamState st;
    const auto f = extract(in, sc, st);
    REQUIRE(f.d == 1.0);
    REQUIRE(a.left == 1.0);
    REQUIRE(a.right == 1.0);
    REQUIRE(f.gamma == 0.0);
  }
}

TEST_CASE("property: every feature lies in the unit interval") {
  Rng rng(102);
  for (int i = 0; i < kCases; ++i) {
    const auto sc = random_scaling(rng);
    FeatureStreamState st;
    double t = 0.0;
    for (int k = 0; k < 4; ++k) {
      t += rng.uniform(0.001, 0.2);
      const auto f = extract(random_frame(rng, t, 0.4), sc, st);
      REQUIRE((f.gamma == 0.0 || f.gamma == 1.0));
      for (double v : {f.d, f.d_dot, f.alpha, f.alpha_dot, f.proximity, f.proximity_dot})
        REQUIRE(in_unit(v));
    }
  }
}

TEST_CASE("property: an exact distance tie assigns the left hand") {
  Rng rng(103);
  for (int i = 0; i < kCases; ++i) {
    // Mirror the wrists in y about a sensor on the y = 0 plane.
    const Vec3 sensor(rng.uniform(-1, 1), 0.0, rng.uniform(-1, 1));
    const Vec3 l(rng.uniform(-1, 1), rng.uniform(0.01, 1), rng.uniform(-1, 1));
    const Vec3 r(l.x(), -l.y(), l.z());
    SensorSnapshot s{{1}, {sensor}};
    REQUIRE((l - sensor).norm() == (r - sensor).norm());
    const auto gaze = random_gaze(rng);
    auto pois = random_pois(rng);
    pois.pois[0].pixel = gaze.origin + 50.0 * gaze.direction;
    const auto raw = assign_hands_and_gaze_raw(s, Wrists{l, r}, gaze, pois);
    REQUIRE(raw.left.has_value());
    REQUIRE_FALSE(raw.right.has_value());
    const auto a = assign_hands_and_gaze(s, Wrists{l, r}, gaze, pois, random_scaling(rng));
    REQUIRE(a.right == 1.0);
    REQUIRE(a.left < 1e-6);
  }
}

TEST_CASE("property: a single active sensor picks exactly one hand") {
  Rng rng(104);
  for (int i = 0; i < kCases; ++i) {
    SensorSnapshot s{{1}, {random_point(rng)}};
    const Wrists w{random_point(rng), random_point(rng)};
    const auto raw = assign_hands_and_gaze_raw(s, w, random_gaze(rng), random_pois(rng));
    REQUIRE(raw.left.has_value() != raw.right.has_value());
  }
}

TEST_CASE("property: a ramp gives the analytic rate after the first step") {
  Rng rng(105);
  for (int i = 0; i < kCases; ++i) {
    const double a = rng.uniform(-3, 3);
    const double rate_max = rng.uniform(0.5, 6);
    BackwardDifference bd;
    double t = rng.uniform(0, 10);
    REQUIRE(bd.update(a * t, t, rate_max) == 0.0);
    for (int k = 0; k < 5; ++k) {
      t += rng.uniform(0.01, 0.3);
      const double expect = std::min(1.0, std::abs(a) / rate_max);
      REQUIRE(bd.update(a * t, t, rate_max) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: a hand receding on a ramp gives the analytic d_dot") {
  Rng rng(106);
  for (int i = 0; i < kCases; ++i) {
    const Vec3 sensor = random_point(rng);
    const Vec3 dir = random_point(rng).normalized();
    const double speed = rng.uniform(0.01, 0.5);
    ScalingParams sc = random_scaling(rng);
    sc.d_max = 10.0;
    FeatureStreamState st;
    FrameInputs in;
    in.snapshot = {{1}, {sensor}};
    double t = 0.0;
    for (int k = 0; k < 4; ++k) {
      t += rng.uniform(0.02, 0.2);
      in.t = t;
      in.wrists.left = sensor + dir * (0.1 + speed * t);
      const auto f = extract(in, sc, st);
      const double expect = k == 0 ? 0.0 : std::min(1.0, speed / sc.d_max / sc.d_dot_max);
      REQUIRE(f.d_dot == doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("property: activating a sensor never raises d") {
  Rng rng(107);
  for (int i = 0; i < kCases; ++i) {
    auto in = random_frame(rng, 0.0, 0.3);
    const auto sc = random_scaling(rng);
    FeatureStreamState a, b;
    const double before = extract(in, sc, a).d;
    in.snapshot.gamma[rng.index(in.snapshot.size())] = 1;
    REQUIRE(extract(in, sc, b).d <= before);
  }
}

TEST_CASE("property: touch flag ignores scaling") {
  Rng rng(108);
  for (int i = 0; i < kCases; ++i) {
    const auto in = random_frame(rng, 0.0, 0.2);
    FeatureStreamState a, b;
    REQUIRE(extract(in, random_scaling(rng), a).gamma == extract(in, random_scaling(rng), b).gamma);
  }
}

TEST_CASE("frames must advance in time") {
  FeatureStreamState st;
  FrameInputs in;
  in.snapshot = {{0}, {Vec3::Zero()}};
  in.t = 1.0;
  extract(in, {}, st);
  CHECK_THROWS_AS(extract(in, {}, st), StreamOrderError);
}

TEST_CASE("fitted maxima") {
  auto frame = [](double t, double dist, double angle) {
    FrameMeasurements m;
    m.t = t;
    m.any_touch = true;
    m.active_distances = {dist};
    m.gated_min = m.ungated_min = dist;
    m.angles.statics = {angle};
    return m;
  };
  std::vector<std::vector<FrameMeasurements>> streams{
      {frame(0.0, 0.1, 0.5), frame(0.1, 0.4, 1.0), frame(0.2, 0.25, 3.0)}};
  const auto p = fit_scaling(streams);
  CHECK(p.d_max == 0.4);
  CHECK(p.alpha_max == 3.0);
  CHECK(p.alpha_max <= std::numbers::pi);
  const auto q = fit_scaling(streams);
  CHECK(p.d_dot_max == q.d_dot_max);
  CHECK(p.alpha_dot_max == q.alpha_dot_max);

  std::vector<std::vector<FrameMeasurements>> empty{{}};
  CHECK_THROWS_AS(fit_scaling(empty), FitError);
}

}
