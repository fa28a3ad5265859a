#pragma once

#include <cmath>

namespace nanonav {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

// Normalizes an angle in degrees into (-180, 180]. Ties at +/-180 resolve
// to +180 so every heading has a unique representation.
inline double normalize_deg(double deg) {
  double a = std::fmod(deg + 180.0, 360.0);
  if (a <= 0.0) a += 360.0;
  return a - 180.0;
}

// Planar pose in the global frame anchored at the start waypoint.
// yaw is in degrees, positive counter-clockwise (z up), kept in (-180, 180].
struct Pose2D {
  double x = 0.0;    // m
  double y = 0.0;    // m
  double yaw = 0.0;  // deg

  Pose2D() = default;
  Pose2D(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(normalize_deg(yaw_)) {}
};

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double capture_radius = 0.10;  // m, waypoint counts as reached inside this disc
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Distance components from a pose to the target expressed in both frames,
// plus the heading offset that would point the vehicle straight at it.
struct RelativeTarget {
  double x_g = 0.0;     // global-frame distance components (m)
  double y_g = 0.0;
  double dx_rel = 0.0;  // body-frame distance components (m)
  double dy_rel = 0.0;
  double psi_r = 0.0;   // heading offset (deg), in (-180, 180]
};

inline Vec2 global_distance(const Pose2D& pose, const Waypoint& target) {
  return {target.x - pose.x, target.y - pose.y};
}

// Rotates a global-frame displacement by -yaw into the body frame
// (body x forward, body y left).
inline Vec2 relative_distance(const Pose2D& pose, double x_g, double y_g) {
  const double c = std::cos(pose.yaw * kDegToRad);
  const double s = std::sin(pose.yaw * kDegToRad);
  return {x_g * c + y_g * s, -x_g * s + y_g * c};
}

// Four-quadrant bearing of a body-frame displacement, in degrees.
// Returns 0 when both components are zero (target-reached path handles that).
inline double heading_offset(double dx_rel, double dy_rel) {
  if (dx_rel == 0.0 && dy_rel == 0.0) return 0.0;
  return normalize_deg(std::atan2(dy_rel, dx_rel) * kRadToDeg);
}

inline RelativeTarget relative_target(const Pose2D& pose, const Waypoint& target) {
  RelativeTarget out;
  const Vec2 g = global_distance(pose, target);
  out.x_g = g.x;
  out.y_g = g.y;
  const Vec2 r = relative_distance(pose, g.x, g.y);
  out.dx_rel = r.x;
  out.dy_rel = r.y;
  out.psi_r = heading_offset(r.x, r.y);
  return out;
}

inline double planar_distance(const Pose2D& pose, const Waypoint& target) {
  return std::hypot(target.x - pose.x, target.y - pose.y);
}

}  // namespace nanonav
