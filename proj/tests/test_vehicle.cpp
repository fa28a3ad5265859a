#include <doctest.h>

#include <cmath>
#include <vector>

#include "nanonav/rng.hpp"
#include "nanonav/vehicle.hpp"

using namespace nanonav;

TEST_CASE("zero command from rest is a fixed point") {
  const VehicleParams params;
  VehicleState state;
  state.true_pose = {1.0, -2.0, 30.0};
  state.est_pose = state.true_pose;
  const VehicleState next = step_kinematics(state, Command{}, params);
  CHECK(next.true_pose.x == doctest::Approx(1.0));
  CHECK(next.true_pose.y == doctest::Approx(-2.0));
  CHECK(next.true_pose.yaw == doctest::Approx(30.0));
  CHECK(next.v_current == doctest::Approx(0.0));
}

TEST_CASE("first-order step response reaches 99% after five time constants") {
  const VehicleParams params;
  VehicleState state;
  const Command cmd{1.0, 0.0};
  const int steps = static_cast<int>(5.0 * params.v_time_constant / params.sim_dt);
  for (int i = 0; i < steps; ++i) state = step_kinematics(state, cmd, params);
  CHECK(state.v_current > 0.99);
  CHECK(state.v_current <= 1.0);
}

TEST_CASE("tracked yaw rate integrates to the commanded turn") {
  const VehicleParams params;
  VehicleState state;
  const Command cmd{0.0, 60.0};
  // Converge the rate, then measure one second of turning.
  for (int i = 0; i < 100; ++i) state = step_kinematics(state, cmd, params);
  const double yaw_before = state.true_pose.yaw;
  for (int i = 0; i < 100; ++i) state = step_kinematics(state, cmd, params);
  CHECK(normalize_deg(state.true_pose.yaw - yaw_before) == doctest::Approx(60.0).epsilon(0.01));
}

TEST_CASE("first-order lag never overshoots the commanded speed") {
  const VehicleParams params;
  Rng rng(17);
  VehicleState state;
  for (int i = 0; i < 2000; ++i) {
    const Command cmd{rng.uniform(0.0, 1.0), rng.uniform(-60.0, 60.0)};
    state = step_kinematics(state, cmd, params);
    CHECK(state.v_current <= 1.0 + 1e-12);
    CHECK(state.v_current >= 0.0 - 1e-12);
  }
}

TEST_CASE("disc-rectangle collision checks") {
  const std::vector<ObstacleSpec> obstacles{make_obstacle(ObstacleClass::Cube, 2.0, 0.0)};
  const double radius = 0.07;
  CHECK(!check_collision({0, 0, 0}, radius, obstacles));
  CHECK(check_collision({2.0, 0.0, 0}, radius, obstacles));
  // Footprint edge at x = 1.75: one millimetre inside the reach collides...
  CHECK(check_collision({1.75 - radius + 0.001, 0.0, 0}, radius, obstacles));
  // ...one millimetre beyond it does not.
  CHECK(!check_collision({1.75 - radius - 0.001, 0.0, 0}, radius, obstacles));
  // Corner case is measured diagonally.
  const double d = (radius + 0.001) / std::sqrt(2.0);
  CHECK(!check_collision({1.75 - d, -0.25 - d, 0}, radius, obstacles));
}

TEST_CASE("estimator drift: identity, determinism and random-walk growth") {
  const VehicleParams params;

  SUBCASE("zero drift keeps the estimate equal to truth") {
    VehicleState state;
    Rng rng(5);
    const Command cmd{0.8, 10.0};
    for (int i = 0; i < 500; ++i) state = step_kinematics(state, cmd, params, DriftModel{}, rng);
    CHECK(state.est_pose.x == doctest::Approx(state.true_pose.x));
    CHECK(state.est_pose.y == doctest::Approx(state.true_pose.y));
    CHECK(state.est_pose.yaw == doctest::Approx(state.true_pose.yaw));
  }

  SUBCASE("a fixed seed reproduces the drifted trace") {
    const DriftModel drift{1e-3, 0.02};
    VehicleState a, b;
    Rng ra(33), rb(33);
    const Command cmd{0.5, 5.0};
    for (int i = 0; i < 300; ++i) {
      a = step_kinematics(a, cmd, params, drift, ra);
      b = step_kinematics(b, cmd, params, drift, rb);
    }
    CHECK(a.est_pose.x == b.est_pose.x);
    CHECK(a.est_pose.y == b.est_pose.y);
    CHECK(a.est_pose.yaw == b.est_pose.yaw);
  }

  SUBCASE("RMS drift grows like sqrt(steps) * sigma") {
    const DriftModel drift{1e-3, 0.0};
    const int steps = 1000;
    const int walks = 200;
    double sq_sum = 0.0;
    for (int w = 0; w < walks; ++w) {
      VehicleState state;
      Rng rng(1000 + static_cast<std::uint64_t>(w));
      for (int i = 0; i < steps; ++i) {
        state = step_kinematics(state, Command{}, params, drift, rng);
      }
      sq_sum += state.est_pose.x * state.est_pose.x;
    }
    const double rms = std::sqrt(sq_sum / walks);
    const double expected = std::sqrt(static_cast<double>(steps)) * 1e-3;
    CHECK(rms > 0.7 * expected);
    CHECK(rms < 1.3 * expected);
  }
}

TEST_CASE("path length dominates straight-line displacement") {
  const VehicleParams params;
  Rng rng(71);
  VehicleState state;
  double path = 0.0;
  Pose2D prev = state.true_pose;
  for (int i = 0; i < 1500; ++i) {
    const Command cmd{rng.uniform(0.0, 1.0), rng.uniform(-60.0, 60.0)};
    state = step_kinematics(state, cmd, params);
    path += std::hypot(state.true_pose.x - prev.x, state.true_pose.y - prev.y);
    prev = state.true_pose;
  }
  CHECK(path >= std::hypot(state.true_pose.x, state.true_pose.y) - 1e-9);
}
