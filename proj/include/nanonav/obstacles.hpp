#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nanonav {

// Obstacle shapes assembled from 50x50x50 cm boxes.
enum class ObstacleClass : std::uint8_t {
  Cube = 0,    // single box
  Short = 1,   // two stacked boxes
  Large = 2,   // two boxes side by side
  Column = 3,  // three stacked boxes
};

inline const char* obstacle_class_name(ObstacleClass c) {
  switch (c) {
    case ObstacleClass::Cube: return "cube";
    case ObstacleClass::Short: return "short";
    case ObstacleClass::Large: return "large";
    case ObstacleClass::Column: return "column";
  }
  return "cube";
}

inline ObstacleClass parse_obstacle_class(const std::string& name) {
  if (name == "cube") return ObstacleClass::Cube;
  if (name == "short") return ObstacleClass::Short;
  if (name == "large") return ObstacleClass::Large;
  if (name == "column") return ObstacleClass::Column;
  throw std::invalid_argument("unknown obstacle class: " + name);
}

// Axis-aligned obstacle in the global frame. footprint_d is the extent along
// global x (depth seen from the start waypoint), footprint_w the extent along
// global y (width across the nominal A->B axis).
struct ObstacleSpec {
  ObstacleClass cls = ObstacleClass::Cube;
  double center_x = 0.0;  // m
  double center_y = 0.0;  // m
  double footprint_w = 0.5;
  double footprint_d = 0.5;
  double height = 0.5;
};

inline ObstacleSpec make_obstacle(ObstacleClass cls, double center_x, double center_y) {
  ObstacleSpec o;
  o.cls = cls;
  o.center_x = center_x;
  o.center_y = center_y;
  switch (cls) {
    case ObstacleClass::Cube:
      o.footprint_w = 0.5; o.footprint_d = 0.5; o.height = 0.5;
      break;
    case ObstacleClass::Short:
      o.footprint_w = 0.5; o.footprint_d = 0.5; o.height = 1.0;
      break;
    case ObstacleClass::Large:
      o.footprint_w = 1.0; o.footprint_d = 0.5; o.height = 0.5;
      break;
    case ObstacleClass::Column:
      o.footprint_w = 0.5; o.footprint_d = 0.5; o.height = 1.5;
      break;
  }
  return o;
}

struct Rect {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
};

inline Rect footprint(const ObstacleSpec& o) {
  return {o.center_x - o.footprint_d / 2.0, o.center_y - o.footprint_w / 2.0,
          o.center_x + o.footprint_d / 2.0, o.center_y + o.footprint_w / 2.0};
}

}  // namespace nanonav
