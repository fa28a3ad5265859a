#pragma once

#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nanonav/camera.hpp"
#include "nanonav/detection.hpp"
#include "nanonav/geometry.hpp"
#include "nanonav/link.hpp"
#include "nanonav/metrics.hpp"
#include "nanonav/obstacles.hpp"
#include "nanonav/planner.hpp"
#include "nanonav/rng.hpp"
#include "nanonav/sync.hpp"
#include "nanonav/vehicle.hpp"

namespace nanonav {

// Mission phase timing around the navigation task itself.
struct PhaseConfig {
  double takeoff_s = 0.8;     // ascent duration before hovering is reported
  double landing_s = 0.55;     // descent duration in stopping
  double max_sim_s = 30.0;    // virtual-clock safety stop
  double recommand_ms = 100.0;  // master re-command period for lost exchanges
};

// Streaming preset for the closed loop: the planner consumes frames straight
// from the receive buffer, so only a small read delay separates transmit
// completion from inference, unlike the display-path characterization the
// stock presets carry in propagation_ms.
inline LinkConfig control_path_link(LinkConfig link = LinkConfig::default_raw()) {
  link.propagation_ms = DelayDistribution::constant(5.0);
  return link;
}

struct ScenarioConfig {
  std::vector<Waypoint> waypoints = {{0.0, 0.0, 0.10}, {4.0, 0.0, 0.10}};
  std::vector<ObstacleSpec> obstacles = {make_obstacle(ObstacleClass::Short, 2.0, 0.0)};
  CameraModel camera;
  PlannerConfig planner;
  LinkConfig link = control_path_link();
  VehicleParams vehicle;
  DetectionNoise noise = {3.0, 0.01, 0.005, 0.55, 0.95};
  DriftModel drift = {2e-4, 0.01};
  PhaseConfig phases;
  double detector_threshold = 0.5;
  bool zero_latency = false;  // ablation: sense at command time instead of capture time
  std::uint64_t seed = 1;
  int repetitions = 5;
  std::vector<double> k_vel_sweep = {0.5, 0.7, 1.0, 1.5, 2.0};
  std::vector<ObstacleClass> sweep_classes = {ObstacleClass::Short, ObstacleClass::Large};

  void validate() const {
    if (waypoints.size() < 2) throw std::invalid_argument("waypoints: need at least 2");
    for (const Waypoint& w : waypoints) {
      if (w.capture_radius <= 0.0) throw std::invalid_argument("waypoints: capture_radius must be > 0");
    }
    if (camera.width_px <= 0 || camera.height_px <= 0)
      throw std::invalid_argument("camera: resolution must be positive");
    if (camera.hfov_deg <= 0.0 || camera.hfov_deg >= 180.0)
      throw std::invalid_argument("camera: hfov_deg must be in (0, 180)");
    if (planner.risk_low_frac < 0.0 || planner.risk_low_frac >= planner.risk_high_frac ||
        planner.risk_high_frac > 1.0)
      throw std::invalid_argument("planner: need 0 <= risk_low_frac < risk_high_frac <= 1");
    if (planner.alpha < 0.0 || planner.alpha > 1.0 || planner.beta < 0.0 || planner.beta > 1.0)
      throw std::invalid_argument("planner: alpha and beta must be in [0, 1]");
    if (planner.v_max <= 0.0 || planner.yaw_rate_max <= 0.0 || planner.dt <= 0.0)
      throw std::invalid_argument("planner: v_max, yaw_rate_max and dt must be > 0");
    if (planner.image_width_px != camera.width_px)
      throw std::invalid_argument("planner: image_width_px must match camera.width_px");
    if (link.mtu == 0 || link.header_bytes >= link.mtu)
      throw std::invalid_argument("link: need 0 <= header_bytes < mtu and mtu > 0");
    if (vehicle.sim_dt <= 0.0 || vehicle.v_time_constant <= 0.0 ||
        vehicle.yaw_time_constant <= 0.0 || vehicle.drone_radius <= 0.0)
      throw std::invalid_argument("vehicle: all parameters must be > 0");
    if (noise.miss_rate < 0.0 || noise.miss_rate > 1.0 || noise.false_positive_rate < 0.0 ||
        noise.false_positive_rate > 1.0 || noise.edge_jitter_sigma < 0.0)
      throw std::invalid_argument("noise: rates must be in [0, 1] and sigma >= 0");
    if (drift.per_step_xy_sigma < 0.0 || drift.per_step_yaw_sigma < 0.0)
      throw std::invalid_argument("drift: sigmas must be >= 0");
    if (phases.max_sim_s <= 0.0 || phases.takeoff_s < 0.0 || phases.landing_s < 0.0 ||
        phases.recommand_ms <= 0.0)
      throw std::invalid_argument("phases: invalid timing");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (k_vel_sweep.empty()) throw std::invalid_argument("k_vel_sweep must not be empty");
  }
};

// One planner invocation, for the command log.
struct CommandRecord {
  std::size_t tick = 0;
  double t_ms = 0.0;
  double v = 0.0;
  double yaw_rate = 0.0;
  double risk = 0.0;
  double safety = 1.0;
  double v_rep = 0.0;
  double psi_r = 0.0;
  StepEvent event = StepEvent::none;
};

// One frame of the detector, true box and noisy output side by side.
struct DetectionRecord {
  std::size_t frame_index = 0;
  double t_ms = 0.0;
  std::optional<Detection> detection;
  std::optional<BoundingBox> ground_truth;
};

struct ProtocolRecord {
  double t_ms = 0.0;
  std::string side;  // "master" or "drone"
  SyncState state_before = SyncState::ground;
  SyncState state_after = SyncState::ground;
  std::optional<Message> msg_in;
  std::vector<Message> msg_out;
};

struct RunResult {
  RunReport report;
  RunEvents events;
  std::vector<TrajectorySample> trajectory;
  std::vector<CommandRecord> commands;
  std::vector<DetectionRecord> detections;
  std::vector<FrameEvent> frames;
  std::vector<ProtocolRecord> protocol;
  std::size_t telemetry_count = 0;  // pose reports sent at the 10 ms cadence
};

// Builds metrics-ready frame records from the detection log, collapsing all
// classes into the single generic one.
inline std::vector<FrameRecord> to_frame_records(const std::vector<DetectionRecord>& log) {
  std::vector<FrameRecord> out;
  out.reserve(log.size());
  for (const DetectionRecord& r : log) {
    FrameRecord f;
    f.frame_index = r.frame_index;
    if (r.detection) f.detections.emplace_back(r.detection->box, r.detection->score);
    if (r.ground_truth) f.ground_truths.push_back(*r.ground_truth);
    out.push_back(std::move(f));
  }
  return out;
}

namespace detail {

struct TimedMessage {
  double t_deliver = 0.0;
  Message msg;
};

struct PendingPlan {
  double t_deliver = 0.0;
  std::size_t frame_index = 0;
  std::optional<Detection> det;
};

}  // namespace detail

// Runs the closed loop on a virtual clock: frames stream through the link
// model, the synthetic detector observes the capture-time world, the planner
// consumes each frame's detection when its command-applied time arrives, the
// vehicle integrates at the telemetry tick, and the sync protocol drives the
// takeoff/task/landing phases. Fully deterministic for a (config, seed) pair.
inline RunResult run_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RunResult result;

  Rng link_rng(mix_seed(seed, 0x11));
  Rng noise_rng(mix_seed(seed, 0x22));
  Rng drift_rng(mix_seed(seed, 0x33));
  Rng radio_rng(mix_seed(seed, 0x44));

  const double horizon_ms = cfg.phases.max_sim_s * 1000.0;
  const std::vector<FrameEvent> frames = schedule_frames(cfg.link, horizon_ms, link_rng);

  // Vehicle starts on the first waypoint, facing the second.
  VehicleState vehicle;
  const double start_yaw = heading_offset(cfg.waypoints[1].x - cfg.waypoints[0].x,
                                          cfg.waypoints[1].y - cfg.waypoints[0].y);
  vehicle.true_pose = {cfg.waypoints[0].x, cfg.waypoints[0].y, start_yaw};
  vehicle.est_pose = vehicle.true_pose;

  PlannerState planner_state;
  Command active_cmd;
  bool mission_done = false;

  MasterSync master;
  DroneSync drone;
  std::deque<detail::TimedMessage> to_drone;
  std::deque<detail::TimedMessage> to_master;
  std::deque<detail::PendingPlan> plan_queue;

  std::vector<std::optional<Detection>> frame_det(frames.size());
  std::size_t next_capture = 0;
  std::size_t next_inference = 0;
  std::size_t frames_used = 0;

  std::optional<double> t_at_height;
  std::optional<double> t_landed;
  bool ascent_started = false;
  bool descent_started = false;
  double last_recommand = -1e18;

  const double tick_ms = cfg.vehicle.sim_dt * 1000.0;
  const auto radio_delay = [&]() { return cfg.link.command_uplink_ms.sample(radio_rng, 0); };

  const auto log_protocol = [&](double t, const char* side, SyncState before, SyncState after,
                                const std::optional<Message>& in, const std::vector<Message>& out) {
    if (!in && out.empty() && before == after) return;
    result.protocol.push_back({t, side, before, after, in, out});
  };

  const auto run_master = [&](double t, const std::optional<Message>& incoming) {
    const SyncState before = master.state();
    std::vector<Message> out = master.step(incoming);
    for (const Message& m : out) {
      if (m.kind == MessageKind::command) {
        to_drone.push_back({t + radio_delay(), m});
      } else if (m.kind == MessageKind::detection_data) {
        // Forwarded detection: the planner consumes it at the frame's
        // command-applied time, already scheduled by the link model.
      }
    }
    log_protocol(t, "master", before, master.state(), incoming, out);
    return out;
  };

  const auto run_drone = [&](double t, const std::optional<Message>& incoming,
                             FlightStatus flight) {
    const SyncState before = drone.state();
    std::vector<Message> out = drone.step(incoming, flight);
    for (const Message& m : out) to_master.push_back({t + radio_delay(), m});
    log_protocol(t, "drone", before, drone.state(), incoming, out);
  };

  const auto sense = [&](const Pose2D& true_pose) {
    std::optional<BoundingBox> primary_gt;
    std::vector<Detection> candidates;
    for (const ObstacleSpec& obstacle : cfg.obstacles) {
      const std::optional<BoundingBox> gt = project_obstacle(cfg.camera, true_pose, obstacle);
      if (!gt) continue;
      if (!primary_gt || gt->area() > primary_gt->area()) primary_gt = gt;
      Detection truth{obstacle.cls, 1.0, *gt};
      if (auto noisy = perturb_detection(truth, cfg.noise, cfg.camera, noise_rng)) {
        candidates.push_back(*noisy);
      }
    }
    if (candidates.empty()) {
      if (auto fp = perturb_detection(std::nullopt, cfg.noise, cfg.camera, noise_rng)) {
        candidates.push_back(*fp);
      }
    }
    return std::pair{primary_gt, select_detection(candidates, cfg.detector_threshold)};
  };

  const std::size_t max_ticks = static_cast<std::size_t>(horizon_ms / tick_ms) + 1;
  for (std::size_t tick = 0; tick <= max_ticks; ++tick) {
    const double t = static_cast<double>(tick) * tick_ms;

    // Flight phase progression.
    if (!ascent_started && drone.pending() == SyncState::hovering) {
      ascent_started = true;
      t_at_height = t + cfg.phases.takeoff_s * 1000.0;
    }
    if (!descent_started && drone.state() == SyncState::stopping) {
      descent_started = true;
      t_landed = t + cfg.phases.landing_s * 1000.0;
    }
    FlightStatus flight = FlightStatus::on_ground;
    if (t_landed && t >= *t_landed) {
      flight = FlightStatus::landed;
    } else if (t_at_height && t >= *t_at_height) {
      flight = drone.state() == SyncState::ready ? FlightStatus::task_running
                                                 : FlightStatus::at_height;
    }

    // Message delivery and machine stepping.
    while (!to_drone.empty() && to_drone.front().t_deliver <= t) {
      const Message msg = to_drone.front().msg;
      to_drone.pop_front();
      run_drone(t, msg, flight);
    }
    run_drone(t, std::nullopt, flight);  // progress pending transitions
    while (!to_master.empty() && to_master.front().t_deliver <= t) {
      const Message msg = to_master.front().msg;
      to_master.pop_front();
      run_master(t, msg);
    }
    if (t - last_recommand >= cfg.phases.recommand_ms) {
      last_recommand = t;
      run_master(t, std::nullopt);
    }

    if (!result.events.t_task_start_ms && drone.state() == SyncState::ready) {
      result.events.t_task_start_ms = t;
    }

    // Image captures observe the world of this tick.
    while (next_capture < frames.size() && frames[next_capture].t_capture_start <= t) {
      const auto [gt, det] = sense(vehicle.true_pose);
      frame_det[next_capture] = det;
      result.detections.push_back(
          {next_capture, frames[next_capture].t_capture_start, det, gt});
      ++next_capture;
    }

    // Inference completions feed the OCU, which forwards them while ready.
    while (next_inference < next_capture &&
           frames[next_inference].t_inference_done <= t) {
      const FrameEvent& ev = frames[next_inference];
      const std::vector<Message> out = run_master(t, make_detection_data(frame_det[next_inference]));
      for (const Message& m : out) {
        if (m.kind == MessageKind::detection_data) {
          plan_queue.push_back({ev.t_command_applied, ev.frame_index, frame_det[ev.frame_index]});
        }
      }
      ++next_inference;
    }

    // Planner invocations at each frame's command-applied time.
    while (!plan_queue.empty() && plan_queue.front().t_deliver <= t) {
      const detail::PendingPlan plan = plan_queue.front();
      plan_queue.pop_front();
      if (drone.state() != SyncState::ready || mission_done) continue;
      std::optional<Detection> det = plan.det;
      if (cfg.zero_latency) det = sense(vehicle.true_pose).second;
      const PlanningOutcome outcome =
          planning_step(planner_state, vehicle.est_pose,
                        std::span<const Waypoint>(cfg.waypoints), det, cfg.planner);
      planner_state = outcome.state;
      active_cmd = outcome.command;
      result.commands.push_back({tick, t, outcome.command.v, outcome.command.yaw_rate,
                                 outcome.risk, outcome.safety, outcome.v_rep, outcome.psi_r,
                                 outcome.event});
      if (outcome.event == StepEvent::waypoint_reached) {
        result.events.t_waypoint_ms.push_back(t);
        const auto idx = static_cast<std::uint16_t>(planner_state.target_index - 1);
        for (const Message& m : drone.report_task_event(false, idx)) {
          to_master.push_back({t + radio_delay(), m});
        }
      } else if (outcome.event == StepEvent::mission_complete) {
        result.events.t_mission_complete_ms = t;
        mission_done = true;
        active_cmd = {};
        const auto idx = static_cast<std::uint16_t>(planner_state.target_index - 1);
        for (const Message& m : drone.report_task_event(true, idx)) {
          to_master.push_back({t + radio_delay(), m});
        }
      }
    }

    // Vehicle integration while airborne; telemetry at every tick.
    const bool airborne = flight == FlightStatus::at_height || flight == FlightStatus::task_running;
    bool colliding = false;
    if (airborne) {
      const Command cmd = (drone.state() == SyncState::ready && !mission_done) ? active_cmd
                                                                               : Command{};
      vehicle = step_kinematics(vehicle, cmd, cfg.vehicle, cfg.drift, drift_rng);
      colliding = check_collision(vehicle.true_pose, cfg.vehicle.drone_radius,
                                  std::span<const ObstacleSpec>(cfg.obstacles));
      ++result.telemetry_count;
    }
    result.trajectory.push_back({t, vehicle.true_pose, vehicle.est_pose, active_cmd.v,
                                 active_cmd.yaw_rate, colliding});

    if (drone.state() == SyncState::ground && master.mission_done()) {
      frames_used = next_capture;
      break;
    }
    frames_used = next_capture;
  }

  result.frames.assign(frames.begin(), frames.begin() + static_cast<std::ptrdiff_t>(frames_used));
  result.report = run_summary(result.trajectory, result.events);
  result.report.k_vel = cfg.planner.k_vel;
  result.report.obstacle_class =
      cfg.obstacles.empty() ? "none" : obstacle_class_name(cfg.obstacles[0].cls);
  result.report.seed = seed;
  return result;
}

// One sweep cell: fixed (k_vel, obstacle class), aggregated over repetitions.
struct SweepCell {
  double k_vel = 0.0;
  std::string obstacle_class;
  double success_pct = 0.0;
  std::optional<double> mean_time_ms;    // over successful runs
  std::optional<double> mean_length_m;   // over successful runs
  std::uint32_t collisions = 0;          // total across repetitions
  std::vector<RunReport> runs;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::optional<double> best_k_vel;
};

// Stable per-run seed: mixes the base seed with the cell coordinates so cell
// results are independent of execution order.
inline std::uint64_t cell_seed(std::uint64_t base, double k_vel, ObstacleClass cls, int rep) {
  std::uint64_t s = mix_seed(base, std::bit_cast<std::uint64_t>(k_vel));
  s = mix_seed(s, static_cast<std::uint64_t>(cls));
  return mix_seed(s, static_cast<std::uint64_t>(rep));
}

using RunSink = std::function<void(const SweepCell&, int rep, const RunResult&)>;

// Cross product of k_vel values, obstacle classes and repetitions. Reports
// per-cell success percentage, mean completion time and path length over the
// successful runs, and the total collision count. The optional sink receives
// every finished run (the CLI uses it to write per-run logs).
inline SweepResult sweep(const ScenarioConfig& cfg, const RunSink& sink = {}) {
  cfg.validate();
  SweepResult result;
  for (const double kv : cfg.k_vel_sweep) {
    for (const ObstacleClass cls : cfg.sweep_classes) {
      SweepCell cell;
      cell.k_vel = kv;
      cell.obstacle_class = obstacle_class_name(cls);
      ScenarioConfig run_cfg = cfg;
      run_cfg.planner.k_vel = kv;
      for (ObstacleSpec& o : run_cfg.obstacles) {
        o = make_obstacle(cls, o.center_x, o.center_y);
      }
      double time_sum = 0.0;
      double length_sum = 0.0;
      std::size_t successes = 0;
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const RunResult run = run_scenario(run_cfg, cell_seed(cfg.seed, kv, cls, rep));
        cell.runs.push_back(run.report);
        cell.collisions += run.report.collisions;
        if (run.report.success) {
          ++successes;
          time_sum += *run.report.completion_time_ms;
          length_sum += run.report.path_length_m;
        }
        if (sink) sink(cell, rep, run);
      }
      cell.success_pct = 100.0 * static_cast<double>(successes) /
                         static_cast<double>(cfg.repetitions);
      if (successes > 0) {
        cell.mean_time_ms = time_sum / static_cast<double>(successes);
        cell.mean_length_m = length_sum / static_cast<double>(successes);
      }
      result.cells.push_back(std::move(cell));
    }
  }

  // Best k_vel over all classes: success first, then time, then length.
  struct Agg {
    double kv;
    double success = 0.0;
    double time = 0.0;
    double length = 0.0;
    int time_cells = 0;
  };
  std::vector<Agg> aggs;
  for (const double kv : cfg.k_vel_sweep) {
    Agg a{kv};
    for (const SweepCell& c : result.cells) {
      if (c.k_vel != kv) continue;
      a.success += c.success_pct;
      if (c.mean_time_ms) {
        a.time += *c.mean_time_ms;
        a.length += *c.mean_length_m;
        ++a.time_cells;
      }
    }
    if (a.time_cells > 0) {
      a.time /= a.time_cells;
      a.length /= a.time_cells;
    } else {
      a.time = std::numeric_limits<double>::infinity();
      a.length = a.time;
    }
    aggs.push_back(a);
  }
  if (!aggs.empty()) {
    const Agg* best = &aggs.front();
    for (const Agg& a : aggs) {
      const bool better = a.success > best->success ||
                          (a.success == best->success && a.time < best->time) ||
                          (a.success == best->success && a.time == best->time &&
                           a.length < best->length);
      if (better) best = &a;
    }
    result.best_k_vel = best->kv;
  }
  return result;
}

}  // namespace nanonav
