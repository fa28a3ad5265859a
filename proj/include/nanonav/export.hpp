#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanonav/metrics.hpp"
#include "nanonav/scenario.hpp"

namespace nanonav {

namespace detail {

// Fixed-precision float formatting keeps CSV output byte-stable.
inline std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

inline const char* event_name(StepEvent e) {
  switch (e) {
    case StepEvent::none: return "none";
    case StepEvent::waypoint_reached: return "waypoint_reached";
    case StepEvent::mission_complete: return "mission_complete";
  }
  return "none";
}

inline const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::command: return "command";
    case MessageKind::state_report: return "state_report";
    case MessageKind::task_event: return "task_event";
    case MessageKind::pose_telemetry: return "pose_telemetry";
    case MessageKind::detection_data: return "detection_data";
  }
  return "command";
}

}  // namespace detail

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const std::vector<TrajectorySample>& rows) {
  auto out = detail::open_out(path);
  out << "t_ms,true_x,true_y,true_yaw,est_x,est_y,est_yaw,v_cmd,yaw_rate_cmd,collision_flag\n";
  for (const TrajectorySample& s : rows) {
    out << detail::fmt(s.t_ms, 1) << ',' << detail::fmt(s.true_pose.x) << ','
        << detail::fmt(s.true_pose.y) << ',' << detail::fmt(s.true_pose.yaw) << ','
        << detail::fmt(s.est_pose.x) << ',' << detail::fmt(s.est_pose.y) << ','
        << detail::fmt(s.est_pose.yaw) << ',' << detail::fmt(s.v_cmd) << ','
        << detail::fmt(s.yaw_rate_cmd) << ',' << (s.collision ? 1 : 0) << '\n';
  }
}

inline void write_frames_csv(const std::filesystem::path& path,
                             const std::vector<FrameEvent>& frames) {
  auto out = detail::open_out(path);
  out << "frame_index,t_capture_start,t_encode_done,t_tx_done,t_arrival,"
         "t_inference_done,t_command_applied,n_packets\n";
  for (const FrameEvent& f : frames) {
    out << f.frame_index << ',' << detail::fmt(f.t_capture_start, 3) << ','
        << detail::fmt(f.t_encode_done, 3) << ',' << detail::fmt(f.t_tx_done, 3) << ','
        << detail::fmt(f.t_arrival, 3) << ',' << detail::fmt(f.t_inference_done, 3) << ','
        << detail::fmt(f.t_command_applied, 3) << ',' << f.n_packets << '\n';
  }
}

inline void write_commands_jsonl(const std::filesystem::path& path,
                                 const std::vector<CommandRecord>& records) {
  auto out = detail::open_out(path);
  for (const CommandRecord& r : records) {
    nlohmann::json j{{"tick", r.tick},   {"t_ms", r.t_ms},    {"v", r.v},
                     {"yaw_rate", r.yaw_rate}, {"risk", r.risk}, {"S", r.safety},
                     {"v_rep", r.v_rep}, {"psi_r", r.psi_r},
                     {"event", detail::event_name(r.event)}};
    out << j.dump() << '\n';
  }
}

inline void write_detections_jsonl(const std::filesystem::path& path,
                                   const std::vector<DetectionRecord>& records) {
  auto out = detail::open_out(path);
  for (const DetectionRecord& r : records) {
    nlohmann::json j;
    j["frame_index"] = r.frame_index;
    j["t_ms"] = r.t_ms;
    if (r.detection) {
      j["detection"] = {{"class", obstacle_class_name(r.detection->cls)},
                        {"score", r.detection->score},
                        {"xm", r.detection->box.xm},
                        {"ym", r.detection->box.ym},
                        {"xM", r.detection->box.xM},
                        {"yM", r.detection->box.yM}};
    } else {
      j["detection"] = nullptr;
    }
    if (r.ground_truth) {
      j["ground_truth"] = {{"xm", r.ground_truth->xm},
                           {"ym", r.ground_truth->ym},
                           {"xM", r.ground_truth->xM},
                           {"yM", r.ground_truth->yM}};
    } else {
      j["ground_truth"] = nullptr;
    }
    out << j.dump() << '\n';
  }
}

// Reads a detection log back into metrics-ready frame records.
inline std::vector<FrameRecord> read_detections_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open detection log: " + path.string());
  std::vector<FrameRecord> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    FrameRecord f;
    f.frame_index = j.value("frame_index", frames.size());
    if (j.contains("detection") && !j["detection"].is_null()) {
      const auto& d = j["detection"];
      BoundingBox box{d.at("xm").get<double>(), d.at("ym").get<double>(),
                      d.at("xM").get<double>(), d.at("yM").get<double>()};
      f.detections.emplace_back(box, d.at("score").get<double>());
    }
    if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
      const auto& g = j["ground_truth"];
      f.ground_truths.push_back({g.at("xm").get<double>(), g.at("ym").get<double>(),
                                 g.at("xM").get<double>(), g.at("yM").get<double>()});
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

inline void write_protocol_jsonl(const std::filesystem::path& path,
                                 const std::vector<ProtocolRecord>& records) {
  auto out = detail::open_out(path);
  const auto msg_json = [](const Message& m) {
    return nlohmann::json{{"kind", detail::kind_name(m.kind)}, {"code", m.code}};
  };
  for (const ProtocolRecord& r : records) {
    nlohmann::json j;
    j["t_ms"] = r.t_ms;
    j["side"] = r.side;
    j["state_before"] = sync_state_name(r.state_before);
    j["state_after"] = sync_state_name(r.state_after);
    j["msg_in"] = r.msg_in ? msg_json(*r.msg_in) : nlohmann::json(nullptr);
    nlohmann::json outs = nlohmann::json::array();
    for (const Message& m : r.msg_out) outs.push_back(msg_json(m));
    j["msg_out"] = outs;
    out << j.dump() << '\n';
  }
}

// Run report plus detection metrics when the log is long enough.
inline nlohmann::json report_json(const RunResult& run, std::size_t map_window = 10) {
  nlohmann::json j;
  j["completion_time_ms"] =
      run.report.completion_time_ms ? nlohmann::json(*run.report.completion_time_ms)
                                    : nlohmann::json(nullptr);
  j["path_length_m"] = run.report.path_length_m;
  j["success"] = run.report.success;
  j["collisions"] = run.report.collisions;
  j["k_vel"] = run.report.k_vel;
  j["obstacle_class"] = run.report.obstacle_class;
  j["seed"] = run.report.seed;
  const std::vector<FrameRecord> frames = to_frame_records(run.detections);
  if (frames.size() >= map_window) {
    j["ap50"] = ap_at_iou(frames, 0.5);
    j["coco_map"] = coco_map(frames);
    const WindowMapResult wm = window_map(frames, map_window);
    j["window_map"] = {{"mean", wm.mean}, {"series", wm.series}};
  }
  return j;
}

inline void write_report_json(const std::filesystem::path& path, const RunResult& run) {
  auto out = detail::open_out(path);
  out << report_json(run).dump(2) << '\n';
}

// Sweep summary table; means are empty when a cell had no successful run.
inline void write_summary_csv(const std::filesystem::path& path, const SweepResult& sweep) {
  auto out = detail::open_out(path);
  out << "k_vel,class,success_pct,mean_time_ms,mean_length_m,collisions\n";
  for (const SweepCell& c : sweep.cells) {
    out << detail::fmt_g(c.k_vel) << ',' << c.obstacle_class << ','
        << detail::fmt(c.success_pct, 1) << ','
        << (c.mean_time_ms ? detail::fmt(*c.mean_time_ms, 1) : "") << ','
        << (c.mean_length_m ? detail::fmt(*c.mean_length_m, 3) : "") << ','
        << c.collisions << '\n';
  }
}

// Top-view SVG: obstacle footprints, waypoints with their capture circles,
// and one estimated-pose polyline per run (vertex per trajectory row).
inline std::string render_paths_svg(const ScenarioConfig& cfg,
                                    const std::vector<const RunResult*>& runs) {
  double min_x = -0.5, max_x = 0.5, min_y = -0.5, max_y = 0.5;
  const auto grow = [&](double x, double y) {
    min_x = std::min(min_x, x - 0.5);
    max_x = std::max(max_x, x + 0.5);
    min_y = std::min(min_y, y - 0.5);
    max_y = std::max(max_y, y + 0.5);
  };
  for (const Waypoint& w : cfg.waypoints) grow(w.x, w.y);
  for (const ObstacleSpec& o : cfg.obstacles) grow(o.center_x, o.center_y);
  for (const RunResult* run : runs) {
    for (const TrajectorySample& s : run->trajectory) grow(s.est_pose.x, s.est_pose.y);
  }

  const double scale = 120.0;  // px per metre
  const auto sx = [&](double x) { return (x - min_x) * scale; };
  const auto sy = [&](double y) { return (max_y - y) * scale; };  // world y up, svg y down

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         detail::fmt((max_x - min_x) * scale, 0) + "\" height=\"" +
         detail::fmt((max_y - min_y) * scale, 0) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const ObstacleSpec& o : cfg.obstacles) {
    const Rect r = footprint(o);
    svg += "<rect x=\"" + detail::fmt(sx(r.min_x), 1) + "\" y=\"" + detail::fmt(sy(r.max_y), 1) +
           "\" width=\"" + detail::fmt((r.max_x - r.min_x) * scale, 1) + "\" height=\"" +
           detail::fmt((r.max_y - r.min_y) * scale, 1) +
           "\" fill=\"gold\" stroke=\"black\"/>\n";
  }
  for (const Waypoint& w : cfg.waypoints) {
    svg += "<circle cx=\"" + detail::fmt(sx(w.x), 1) + "\" cy=\"" + detail::fmt(sy(w.y), 1) +
           "\" r=\"" + detail::fmt(w.capture_radius * scale, 1) +
           "\" fill=\"none\" stroke=\"green\" stroke-dasharray=\"4 3\"/>\n";
    svg += "<circle cx=\"" + detail::fmt(sx(w.x), 1) + "\" cy=\"" + detail::fmt(sy(w.y), 1) +
           "\" r=\"3\" fill=\"green\"/>\n";
  }
  for (const RunResult* run : runs) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += run->report.success ? "steelblue" : "crimson";
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (const TrajectorySample& s : run->trajectory) {
      svg += detail::fmt(sx(s.est_pose.x), 1) + ',' + detail::fmt(sy(s.est_pose.y), 1) + ' ';
    }
    if (!run->trajectory.empty()) svg.pop_back();
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = detail::open_out(path);
  out << text;
}

}  // namespace nanonav
