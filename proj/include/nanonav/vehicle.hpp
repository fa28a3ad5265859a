#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "nanonav/geometry.hpp"
#include "nanonav/obstacles.hpp"
#include "nanonav/planner.hpp"
#include "nanonav/rng.hpp"

namespace nanonav {

// First-order command-tracking model standing in for the onboard controller
// cascade. The sim tick matches the 10 ms pose-telemetry period.
struct VehicleParams {
  double sim_dt = 0.01;           // s
  double v_time_constant = 0.8;   // s
  double yaw_time_constant = 0.15;  // s
  double drone_radius = 0.07;     // m
};

struct VehicleState {
  Pose2D true_pose;
  Pose2D est_pose;
  double v_current = 0.0;         // m/s tracked velocity
  double yaw_rate_current = 0.0;  // deg/s tracked yaw rate
};

// Per-step random-walk error injected into the pose estimate, modelling the
// slow disagreement between onboard state estimation and the global frame.
struct DriftModel {
  double per_step_xy_sigma = 0.0;   // m per sim tick
  double per_step_yaw_sigma = 0.0;  // deg per sim tick
};

// Advances the vehicle one tick: velocity and yaw rate relax toward the
// command through a first-order lag (no overshoot), then the unicycle
// integrates. The estimate integrates the same motion from its own pose.
inline VehicleState step_kinematics(const VehicleState& state, const Command& cmd,
                                    const VehicleParams& params) {
  VehicleState next = state;
  next.v_current += (cmd.v - next.v_current) * (params.sim_dt / params.v_time_constant);
  next.yaw_rate_current +=
      (cmd.yaw_rate - next.yaw_rate_current) * (params.sim_dt / params.yaw_time_constant);

  const double dyaw = next.yaw_rate_current * params.sim_dt;
  next.true_pose.yaw = normalize_deg(next.true_pose.yaw + dyaw);
  next.true_pose.x += next.v_current * std::cos(next.true_pose.yaw * kDegToRad) * params.sim_dt;
  next.true_pose.y += next.v_current * std::sin(next.true_pose.yaw * kDegToRad) * params.sim_dt;

  next.est_pose.yaw = normalize_deg(next.est_pose.yaw + dyaw);
  next.est_pose.x += next.v_current * std::cos(next.est_pose.yaw * kDegToRad) * params.sim_dt;
  next.est_pose.y += next.v_current * std::sin(next.est_pose.yaw * kDegToRad) * params.sim_dt;
  return next;
}

// Variant with estimator drift; the error accumulates as a random walk.
inline VehicleState step_kinematics(const VehicleState& state, const Command& cmd,
                                    const VehicleParams& params, const DriftModel& drift,
                                    Rng& rng) {
  VehicleState next = step_kinematics(state, cmd, params);
  if (drift.per_step_xy_sigma > 0.0) {
    next.est_pose.x += rng.gaussian(0.0, drift.per_step_xy_sigma);
    next.est_pose.y += rng.gaussian(0.0, drift.per_step_xy_sigma);
  }
  if (drift.per_step_yaw_sigma > 0.0) {
    next.est_pose.yaw = normalize_deg(next.est_pose.yaw + rng.gaussian(0.0, drift.per_step_yaw_sigma));
  }
  return next;
}

// True iff the disc of drone_radius around the pose intersects any obstacle
// footprint (flight altitude is constant, heights are ignored).
inline bool check_collision(const Pose2D& true_pose, double drone_radius,
                            std::span<const ObstacleSpec> obstacles) {
  for (const ObstacleSpec& o : obstacles) {
    const Rect r = footprint(o);
    const double nx = std::clamp(true_pose.x, r.min_x, r.max_x);
    const double ny = std::clamp(true_pose.y, r.min_y, r.max_y);
    const double dx = true_pose.x - nx;
    const double dy = true_pose.y - ny;
    if (dx * dx + dy * dy <= drone_radius * drone_radius) return true;
  }
  return false;
}

}  // namespace nanonav
