#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

#include "nanonav/detection.hpp"
#include "nanonav/geometry.hpp"

namespace nanonav {

// Tuning of the reactive planner. Angles are degrees throughout: the control
// law divides the heading offset by 180 and clamps the yaw rate in deg/s, so
// the API stays in that unit and only the trigonometry uses radians.
struct PlannerConfig {
  double safety_margin_px = 20.0;      // horizontal inflation per box side
  double critical_halfwidth_px = 20.0; // half of the critical-FOV window
  double risk_low_frac = 0.2;          // inflated width at which risk starts rising
  double risk_high_frac = 0.8;         // inflated width at which risk saturates
  double alpha = 0.5;                  // safety-factor smoothing, weight of the new value
  double beta = 0.5;                   // repulsive-velocity smoothing, weight of the new value
  double k_vel = 1.5;                  // repulsion gain
  double v_max = 1.0;                  // m/s
  double yaw_rate_max = 60.0;          // deg/s
  double dt = 0.2;                     // s, command period used to turn yaw into yaw rate
  double image_width_px = 320.0;
};

// Carried between iterations: the exponentially smoothed safety factor and
// repulsive-velocity magnitude, the current waypoint, and the side of the
// last avoidance decision (a residual smoothed repulsion keeps pushing to the
// same side once the obstacle leaves the critical FOV).
struct PlannerState {
  double s_prev = 1.0;       // in [0, 1]; 1 = fully safe before any evidence
  double v_rep_prev = 0.0;   // >= 0
  std::size_t target_index = 0;
  int last_steer_sign = +1;  // +1 steers left (positive yaw), -1 right
};

struct Command {
  double v = 0.0;         // m/s, in [0, v_max]
  double yaw_rate = 0.0;  // deg/s, in [-yaw_rate_max, yaw_rate_max]
};

// Horizontal pixel interval [lo, hi] on the image plane.
struct PixelSpan {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

enum class StepEvent { none, waypoint_reached, mission_complete };

// Adds the safety margin to both horizontal box edges and clips the result
// to the image.
inline PixelSpan inflate_and_clip(const BoundingBox& box, const PlannerConfig& cfg) {
  return {std::max(0.0, box.xm - cfg.safety_margin_px),
          std::min(cfg.image_width_px, box.xM + cfg.safety_margin_px)};
}

// An inflated span poses a risk only if it covers the image centre column.
// Inflating by the window half-width makes this equal to checking the raw box
// against the 40 px critical-FOV window.
inline bool intersects_critical_fov(const PixelSpan& span, const PlannerConfig& cfg) {
  const double centre = cfg.image_width_px / 2.0;
  return span.lo <= centre && span.hi >= centre;
}

// Remaps the inflated width linearly onto [0, 1] between the two knee
// fractions of the image width. Zero when the span misses the critical FOV.
inline double collision_risk(const PixelSpan& span, const PlannerConfig& cfg) {
  if (!intersects_critical_fov(span, cfg)) return 0.0;
  const double frac = span.width() / cfg.image_width_px;
  const double r = (frac - cfg.risk_low_frac) / (cfg.risk_high_frac - cfg.risk_low_frac);
  return std::clamp(r, 0.0, 1.0);
}

// S = (risk - 1)^2: monotonically decreasing in risk, used to throttle the
// longitudinal velocity.
inline double safety_factor(double risk) { return (risk - 1.0) * (risk - 1.0); }

// Exponential smoothing; coeff weighs the new raw value.
inline double smooth(double prev, double raw, double coeff) {
  return coeff * raw + (1.0 - coeff) * prev;
}

struct SteerChoice {
  double width_of_interest = 0.0;  // px of the span in the selected half-plane
  int sign = +1;                   // +1 left, -1 right
};

// Picks the avoidance half-plane: the one the span occupies less. The width
// of interest is the span's overlap with that half-plane, i.e. how much
// obstacle still blocks the chosen escape side. Equal occupancy steers left.
inline SteerChoice width_of_interest(const PixelSpan& span, const PlannerConfig& cfg) {
  const double centre = cfg.image_width_px / 2.0;
  const double left_occ = std::max(0.0, std::min(span.hi, centre) - std::max(span.lo, 0.0));
  const double right_occ =
      std::max(0.0, std::min(span.hi, cfg.image_width_px) - std::max(span.lo, centre));
  if (left_occ <= right_occ) return {left_occ, +1};
  return {right_occ, -1};
}

// v_rep = k_vel * WoI / (W/2), the repulsion magnitude normalized so that a
// half-plane-filling obstacle yields k_vel.
inline double repulsive_velocity(double woi_px, const PlannerConfig& cfg) {
  return cfg.k_vel * woi_px / (cfg.image_width_px / 2.0);
}

// v_d = min(v_max, |distance| * S * (1 - |psi_r|/180)). The heading term uses
// the absolute offset so speed decays symmetrically as the vehicle faces away
// from the target on either side.
inline double forward_velocity(double x_g, double y_g, double psi_r, double s,
                               const PlannerConfig& cfg) {
  const double heading_gain = std::abs(std::abs(psi_r) / 180.0 - 1.0);
  return std::min(cfg.v_max, std::hypot(x_g, y_g) * s * heading_gain);
}

// psi_rep = atan2(v_rep, v_d) in degrees; a magnitude, the steer sign applies
// the direction. Zero when both inputs vanish.
inline double repulsive_yaw(double v_rep, double v_d) {
  if (v_rep == 0.0 && v_d == 0.0) return 0.0;
  return std::atan2(v_rep, v_d) * kRadToDeg;
}

// yaw_rate = (psi_r * S + sign * psi_rep) / dt, clamped to the actuator limit.
inline double yaw_rate(double psi_r, double s, double psi_rep, int steer_sign,
                       const PlannerConfig& cfg) {
  const double raw = (psi_r * s + steer_sign * psi_rep) / cfg.dt;
  return std::clamp(raw, -cfg.yaw_rate_max, cfg.yaw_rate_max);
}

struct PlanningOutcome {
  Command command;
  PlannerState state;
  StepEvent event = StepEvent::none;
  // Telemetry of the iteration, for the command log.
  double risk = 0.0;
  double safety = 1.0;
  double v_rep = 0.0;
  double psi_r = 0.0;
};

// One planner iteration: capture the waypoint if inside its radius, otherwise
// derive the collision risk from the detection, smooth safety factor and
// repulsion, and blend attraction to the target with the avoidance yaw.
// Pure function of its arguments; callers own the state.
inline PlanningOutcome planning_step(const PlannerState& state, const Pose2D& pose,
                                     std::span<const Waypoint> targets,
                                     const std::optional<Detection>& det,
                                     const PlannerConfig& cfg) {
  PlanningOutcome out;
  out.state = state;
  out.safety = state.s_prev;
  out.v_rep = state.v_rep_prev;
  if (state.target_index >= targets.size()) {
    out.event = StepEvent::mission_complete;
    return out;
  }

  const Waypoint& target = targets[state.target_index];
  if (planar_distance(pose, target) <= target.capture_radius) {
    // Stay on target for this tick (zero command), then move to the next one.
    out.state.target_index += 1;
    out.event = out.state.target_index >= targets.size() ? StepEvent::mission_complete
                                                         : StepEvent::waypoint_reached;
    return out;
  }

  double raw_risk = 0.0;
  double raw_v_rep = 0.0;
  int sign = state.last_steer_sign;
  if (det.has_value()) {
    const PixelSpan span = inflate_and_clip(det->box, cfg);
    raw_risk = collision_risk(span, cfg);
    if (raw_risk > 0.0) {
      const SteerChoice choice = width_of_interest(span, cfg);
      raw_v_rep = repulsive_velocity(choice.width_of_interest, cfg);
      sign = choice.sign;
    }
  }
  const double raw_s = safety_factor(raw_risk);
  const double v_rep_smoothed = smooth(state.v_rep_prev, raw_v_rep, cfg.beta);
  const double s_smoothed = smooth(state.s_prev, raw_s, cfg.alpha);

  const RelativeTarget rel = relative_target(pose, target);
  const double v_d = forward_velocity(rel.x_g, rel.y_g, rel.psi_r, s_smoothed, cfg);
  const double psi_rep = repulsive_yaw(v_rep_smoothed, v_d);

  out.command.v = v_d;
  out.command.yaw_rate = yaw_rate(rel.psi_r, s_smoothed, psi_rep, sign, cfg);
  out.state.s_prev = s_smoothed;
  out.state.v_rep_prev = v_rep_smoothed;
  out.state.last_steer_sign = sign;
  out.risk = raw_risk;
  out.safety = s_smoothed;
  out.v_rep = v_rep_smoothed;
  out.psi_r = rel.psi_r;
  return out;
}

}  // namespace nanonav
