#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanonav/scenario.hpp"

namespace nanonav {

// JSON (de)serialization of the scenario configuration. Loading is
// update-style: keys present in the document override the defaults, the rest
// keep their built-in values, so partial configs and --set overrides compose.

namespace config {

using nlohmann::json;

inline void apply_json(const json& j, DelayDistribution& d) {
  const std::string kind = j.value("kind", std::string("constant"));
  if (kind == "constant") d.kind = DelayDistribution::Kind::Constant;
  else if (kind == "gaussian") d.kind = DelayDistribution::Kind::Gaussian;
  else if (kind == "lognormal") d.kind = DelayDistribution::Kind::Lognormal;
  else if (kind == "empirical") d.kind = DelayDistribution::Kind::Empirical;
  else throw std::invalid_argument("delay kind must be constant|gaussian|lognormal|empirical");
  d.mean = j.value("mean", d.mean);
  d.sigma = j.value("sigma", d.sigma);
  if (j.contains("trace")) d.trace = j.at("trace").get<std::vector<double>>();
}

inline json to_json(const DelayDistribution& d) {
  json j;
  switch (d.kind) {
    case DelayDistribution::Kind::Constant: j["kind"] = "constant"; break;
    case DelayDistribution::Kind::Gaussian: j["kind"] = "gaussian"; break;
    case DelayDistribution::Kind::Lognormal: j["kind"] = "lognormal"; break;
    case DelayDistribution::Kind::Empirical: j["kind"] = "empirical"; break;
  }
  j["mean"] = d.mean;
  j["sigma"] = d.sigma;
  if (!d.trace.empty()) j["trace"] = d.trace;
  return j;
}

inline void apply_json(const json& j, LinkConfig& link) {
  if (j.contains("format")) {
    const std::string f = j.at("format").get<std::string>();
    if (f == "raw") link.format = LinkConfig::Format::RAW;
    else if (f == "jpeg") link.format = LinkConfig::Format::JPEG;
    else throw std::invalid_argument("link.format must be raw|jpeg");
  }
  link.raw_bytes = j.value("raw_bytes", link.raw_bytes);
  link.jpeg_bytes_mean = j.value("jpeg_bytes_mean", link.jpeg_bytes_mean);
  link.mtu = j.value("mtu", link.mtu);
  link.header_bytes = j.value("header_bytes", link.header_bytes);
  link.sequential_capture = j.value("sequential_capture", link.sequential_capture);
  if (j.contains("capture_ms")) apply_json(j.at("capture_ms"), link.capture_ms);
  if (j.contains("encode_ms")) apply_json(j.at("encode_ms"), link.encode_ms);
  if (j.contains("transmit_ms")) apply_json(j.at("transmit_ms"), link.transmit_ms);
  if (j.contains("propagation_ms")) apply_json(j.at("propagation_ms"), link.propagation_ms);
  if (j.contains("inference_ms")) apply_json(j.at("inference_ms"), link.inference_ms);
  if (j.contains("planning_ms")) apply_json(j.at("planning_ms"), link.planning_ms);
  if (j.contains("command_uplink_ms")) apply_json(j.at("command_uplink_ms"), link.command_uplink_ms);
}

inline json to_json(const LinkConfig& link) {
  return json{{"format", link.format == LinkConfig::Format::RAW ? "raw" : "jpeg"},
              {"raw_bytes", link.raw_bytes},
              {"jpeg_bytes_mean", link.jpeg_bytes_mean},
              {"mtu", link.mtu},
              {"header_bytes", link.header_bytes},
              {"sequential_capture", link.sequential_capture},
              {"capture_ms", to_json(link.capture_ms)},
              {"encode_ms", to_json(link.encode_ms)},
              {"transmit_ms", to_json(link.transmit_ms)},
              {"propagation_ms", to_json(link.propagation_ms)},
              {"inference_ms", to_json(link.inference_ms)},
              {"planning_ms", to_json(link.planning_ms)},
              {"command_uplink_ms", to_json(link.command_uplink_ms)}};
}

inline void apply_json(const json& j, PlannerConfig& p) {
  p.safety_margin_px = j.value("safety_margin_px", p.safety_margin_px);
  p.critical_halfwidth_px = j.value("critical_halfwidth_px", p.critical_halfwidth_px);
  p.risk_low_frac = j.value("risk_low_frac", p.risk_low_frac);
  p.risk_high_frac = j.value("risk_high_frac", p.risk_high_frac);
  p.alpha = j.value("alpha", p.alpha);
  p.beta = j.value("beta", p.beta);
  p.k_vel = j.value("k_vel", p.k_vel);
  p.v_max = j.value("v_max", p.v_max);
  p.yaw_rate_max = j.value("yaw_rate_max", p.yaw_rate_max);
  p.dt = j.value("dt", p.dt);
  p.image_width_px = j.value("image_width_px", p.image_width_px);
}

inline json to_json(const PlannerConfig& p) {
  return json{{"safety_margin_px", p.safety_margin_px},
              {"critical_halfwidth_px", p.critical_halfwidth_px},
              {"risk_low_frac", p.risk_low_frac},
              {"risk_high_frac", p.risk_high_frac},
              {"alpha", p.alpha},
              {"beta", p.beta},
              {"k_vel", p.k_vel},
              {"v_max", p.v_max},
              {"yaw_rate_max", p.yaw_rate_max},
              {"dt", p.dt},
              {"image_width_px", p.image_width_px}};
}

inline void apply_json(const json& j, CameraModel& c) {
  c.width_px = j.value("width_px", c.width_px);
  c.height_px = j.value("height_px", c.height_px);
  c.hfov_deg = j.value("hfov_deg", c.hfov_deg);
  c.mount_yaw_deg = j.value("mount_yaw_deg", c.mount_yaw_deg);
  c.height_m = j.value("height_m", c.height_m);
}

inline json to_json(const CameraModel& c) {
  return json{{"width_px", c.width_px},
              {"height_px", c.height_px},
              {"hfov_deg", c.hfov_deg},
              {"mount_yaw_deg", c.mount_yaw_deg},
              {"height_m", c.height_m}};
}

inline void apply_json(const json& j, VehicleParams& v) {
  v.sim_dt = j.value("sim_dt", v.sim_dt);
  v.v_time_constant = j.value("v_time_constant", v.v_time_constant);
  v.yaw_time_constant = j.value("yaw_time_constant", v.yaw_time_constant);
  v.drone_radius = j.value("drone_radius", v.drone_radius);
}

inline json to_json(const VehicleParams& v) {
  return json{{"sim_dt", v.sim_dt},
              {"v_time_constant", v.v_time_constant},
              {"yaw_time_constant", v.yaw_time_constant},
              {"drone_radius", v.drone_radius}};
}

inline void apply_json(const json& j, DetectionNoise& n) {
  n.edge_jitter_sigma = j.value("edge_jitter_sigma", n.edge_jitter_sigma);
  n.miss_rate = j.value("miss_rate", n.miss_rate);
  n.false_positive_rate = j.value("false_positive_rate", n.false_positive_rate);
  n.score_low = j.value("score_low", n.score_low);
  n.score_high = j.value("score_high", n.score_high);
}

inline json to_json(const DetectionNoise& n) {
  return json{{"edge_jitter_sigma", n.edge_jitter_sigma},
              {"miss_rate", n.miss_rate},
              {"false_positive_rate", n.false_positive_rate},
              {"score_low", n.score_low},
              {"score_high", n.score_high}};
}

inline void apply_json(const json& j, DriftModel& d) {
  d.per_step_xy_sigma = j.value("per_step_xy_sigma", d.per_step_xy_sigma);
  d.per_step_yaw_sigma = j.value("per_step_yaw_sigma", d.per_step_yaw_sigma);
}

inline json to_json(const DriftModel& d) {
  return json{{"per_step_xy_sigma", d.per_step_xy_sigma},
              {"per_step_yaw_sigma", d.per_step_yaw_sigma}};
}

inline void apply_json(const json& j, PhaseConfig& p) {
  p.takeoff_s = j.value("takeoff_s", p.takeoff_s);
  p.landing_s = j.value("landing_s", p.landing_s);
  p.max_sim_s = j.value("max_sim_s", p.max_sim_s);
  p.recommand_ms = j.value("recommand_ms", p.recommand_ms);
}

inline json to_json(const PhaseConfig& p) {
  return json{{"takeoff_s", p.takeoff_s},
              {"landing_s", p.landing_s},
              {"max_sim_s", p.max_sim_s},
              {"recommand_ms", p.recommand_ms}};
}

inline void apply_json(const json& j, ScenarioConfig& cfg) {
  if (j.contains("waypoints")) {
    cfg.waypoints.clear();
    for (const json& wj : j.at("waypoints")) {
      Waypoint w;
      w.x = wj.value("x", 0.0);
      w.y = wj.value("y", 0.0);
      w.capture_radius = wj.value("capture_radius", 0.10);
      cfg.waypoints.push_back(w);
    }
  }
  if (j.contains("obstacles")) {
    cfg.obstacles.clear();
    for (const json& oj : j.at("obstacles")) {
      ObstacleSpec o = make_obstacle(parse_obstacle_class(oj.value("class", std::string("cube"))),
                                     oj.value("center_x", 0.0), oj.value("center_y", 0.0));
      o.footprint_w = oj.value("footprint_w", o.footprint_w);
      o.footprint_d = oj.value("footprint_d", o.footprint_d);
      o.height = oj.value("height", o.height);
      cfg.obstacles.push_back(o);
    }
  }
  if (j.contains("camera")) apply_json(j.at("camera"), cfg.camera);
  if (j.contains("planner")) apply_json(j.at("planner"), cfg.planner);
  if (j.contains("link")) apply_json(j.at("link"), cfg.link);
  if (j.contains("vehicle")) apply_json(j.at("vehicle"), cfg.vehicle);
  if (j.contains("noise")) apply_json(j.at("noise"), cfg.noise);
  if (j.contains("drift")) apply_json(j.at("drift"), cfg.drift);
  if (j.contains("phases")) apply_json(j.at("phases"), cfg.phases);
  cfg.detector_threshold = j.value("detector_threshold", cfg.detector_threshold);
  cfg.zero_latency = j.value("zero_latency", cfg.zero_latency);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.repetitions = j.value("repetitions", cfg.repetitions);
  if (j.contains("k_vel_sweep")) cfg.k_vel_sweep = j.at("k_vel_sweep").get<std::vector<double>>();
  if (j.contains("sweep_classes")) {
    cfg.sweep_classes.clear();
    for (const json& cj : j.at("sweep_classes")) {
      cfg.sweep_classes.push_back(parse_obstacle_class(cj.get<std::string>()));
    }
  }
}

inline json to_json(const ScenarioConfig& cfg) {
  json j;
  j["waypoints"] = json::array();
  for (const Waypoint& w : cfg.waypoints) {
    j["waypoints"].push_back({{"x", w.x}, {"y", w.y}, {"capture_radius", w.capture_radius}});
  }
  j["obstacles"] = json::array();
  for (const ObstacleSpec& o : cfg.obstacles) {
    j["obstacles"].push_back({{"class", obstacle_class_name(o.cls)},
                              {"center_x", o.center_x},
                              {"center_y", o.center_y},
                              {"footprint_w", o.footprint_w},
                              {"footprint_d", o.footprint_d},
                              {"height", o.height}});
  }
  j["camera"] = to_json(cfg.camera);
  j["planner"] = to_json(cfg.planner);
  j["link"] = to_json(cfg.link);
  j["vehicle"] = to_json(cfg.vehicle);
  j["noise"] = to_json(cfg.noise);
  j["drift"] = to_json(cfg.drift);
  j["phases"] = to_json(cfg.phases);
  j["detector_threshold"] = cfg.detector_threshold;
  j["zero_latency"] = cfg.zero_latency;
  j["seed"] = cfg.seed;
  j["repetitions"] = cfg.repetitions;
  j["k_vel_sweep"] = cfg.k_vel_sweep;
  j["sweep_classes"] = json::array();
  for (const ObstacleClass c : cfg.sweep_classes) {
    j["sweep_classes"].push_back(obstacle_class_name(c));
  }
  return j;
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return j;
}

// Applies "dotted.path=value" overrides onto the raw document. Values parse
// as JSON when possible and fall back to plain strings.
inline void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("override must look like key.path=value, got: " + ov);
    }
    std::string pointer = "/" + ov.substr(0, eq);
    for (char& ch : pointer) {
      if (ch == '.') ch = '/';
    }
    const std::string raw = ov.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    doc[json::json_pointer(pointer)] = value;
  }
}

inline ScenarioConfig load_scenario(const std::optional<std::filesystem::path>& config_path,
                                    const std::vector<std::string>& overrides = {}) {
  json doc = json::object();
  if (config_path) doc = load_json_file(*config_path);
  apply_overrides(doc, overrides);
  ScenarioConfig cfg;
  apply_json(doc, cfg);
  return cfg;
}

// The calibration file carries named link presets ("raw", "jpeg"), the
// detector-regime noise used by the metrics demonstration, and the vehicle
// setting reproducing the reference completion-time band.
inline LinkConfig link_from_calibration(const json& calibration, const std::string& preset) {
  LinkConfig link = preset == "jpeg" ? LinkConfig::default_jpeg() : LinkConfig::default_raw();
  if (calibration.contains("link") && calibration.at("link").contains(preset)) {
    apply_json(calibration.at("link").at(preset), link);
  }
  return link;
}

inline DetectionNoise detector_regime_from_calibration(const json& calibration) {
  DetectionNoise noise;
  if (calibration.contains("detector_regime")) apply_json(calibration.at("detector_regime"), noise);
  return noise;
}

inline VehicleParams reference_band_vehicle_from_calibration(const json& calibration) {
  VehicleParams params;
  if (calibration.contains("reference_band_vehicle")) {
    apply_json(calibration.at("reference_band_vehicle"), params);
  }
  return params;
}

}  // namespace config

}  // namespace nanonav
