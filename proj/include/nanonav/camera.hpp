#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nanonav/geometry.hpp"
#include "nanonav/obstacles.hpp"

namespace nanonav {

// Forward-facing pinhole model of the greyscale onboard camera.
// Square pixels: the horizontal FOV fixes one focal length used on both axes.
struct CameraModel {
  double width_px = 320.0;
  double height_px = 240.0;
  double hfov_deg = 65.0;      // nominal wide-angle default, config-exposed
  double mount_yaw_deg = 0.0;  // 0 = aligned with the body x axis
  double height_m = 0.5;       // optical-centre altitude at cruise

  double focal_px() const { return (width_px / 2.0) / std::tan((hfov_deg / 2.0) * kDegToRad); }
};

// Image-plane box; origin top-left, x rightward, y downward.
// (xm, ym) is the top-left corner, (xM, yM) the bottom-right.
struct BoundingBox {
  double xm = 0.0;
  double ym = 0.0;
  double xM = 0.0;
  double yM = 0.0;

  double width() const { return xM - xm; }
  double height() const { return yM - ym; }
  double area() const { return width() * height(); }
};

namespace detail {

struct CamPoint {
  double forward = 0.0;  // along the optical axis, m
  double left = 0.0;     // lateral, m
};

// Clips a footprint polygon against the near plane forward >= near.
inline std::vector<CamPoint> clip_near(const std::vector<CamPoint>& poly, double near) {
  std::vector<CamPoint> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const CamPoint& a = poly[i];
    const CamPoint& b = poly[(i + 1) % n];
    const bool a_in = a.forward >= near;
    const bool b_in = b.forward >= near;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      const double t = (near - a.forward) / (b.forward - a.forward);
      out.push_back({near, a.left + t * (b.left - a.left)});
    }
  }
  return out;
}

}  // namespace detail

// Projects the obstacle's box volume through the pinhole and returns the
// image-plane bounding box of its visible extent, clipped to the frame.
// Empty when the obstacle lies behind the camera, outside the frustum, or
// contains the camera itself. Footprint corners are projected individually,
// which is exact for an axis-aligned prism.
inline std::optional<BoundingBox> project_obstacle(const CameraModel& cam, const Pose2D& pose,
                                                   const ObstacleSpec& obstacle) {
  constexpr double kNearPlane = 1e-6;
  const Rect fp = footprint(obstacle);
  if (pose.x >= fp.min_x && pose.x <= fp.max_x && pose.y >= fp.min_y && pose.y <= fp.max_y) {
    return std::nullopt;
  }

  const double cam_yaw = (pose.yaw + cam.mount_yaw_deg) * kDegToRad;
  const double c = std::cos(cam_yaw);
  const double s = std::sin(cam_yaw);
  const auto to_camera = [&](double wx, double wy) -> detail::CamPoint {
    const double dx = wx - pose.x;
    const double dy = wy - pose.y;
    return {dx * c + dy * s, -dx * s + dy * c};
  };

  std::vector<detail::CamPoint> poly = {
      to_camera(fp.min_x, fp.min_y), to_camera(fp.max_x, fp.min_y),
      to_camera(fp.max_x, fp.max_y), to_camera(fp.min_x, fp.max_y)};
  poly = detail::clip_near(poly, kNearPlane);
  if (poly.empty()) return std::nullopt;

  const double f = cam.focal_px();
  const double cx = cam.width_px / 2.0;
  const double cy = cam.height_px / 2.0;

  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& p : poly) {
    const double px = cx - f * p.left / p.forward;
    x_lo = std::min(x_lo, px);
    x_hi = std::max(x_hi, px);
    // The prism spans z in [0, height]; a point above the camera maps to a
    // smaller y pixel (image y points down).
    for (const double z : {0.0, obstacle.height}) {
      const double py = cy - f * (z - cam.height_m) / p.forward;
      y_lo = std::min(y_lo, py);
      y_hi = std::max(y_hi, py);
    }
  }

  if (x_hi <= 0.0 || x_lo >= cam.width_px || y_hi <= 0.0 || y_lo >= cam.height_px) {
    return std::nullopt;
  }
  BoundingBox box;
  box.xm = std::clamp(x_lo, 0.0, cam.width_px);
  box.xM = std::clamp(x_hi, 0.0, cam.width_px);
  box.ym = std::clamp(y_lo, 0.0, cam.height_px);
  box.yM = std::clamp(y_hi, 0.0, cam.height_px);
  return box;
}

}  // namespace nanonav
