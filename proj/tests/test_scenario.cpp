#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nanonav/config_io.hpp"
#include "nanonav/export.hpp"
#include "nanonav/scenario.hpp"

using namespace nanonav;

namespace {

ScenarioConfig control_config() {
  ScenarioConfig cfg;
  cfg.obstacles.clear();
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("control run: no obstacle, straight dash succeeds") {
  const ScenarioConfig cfg = control_config();
  const RunResult run = run_scenario(cfg, 12);
  CHECK(run.report.success);
  REQUIRE(run.report.completion_time_ms.has_value());
  CHECK(run.report.path_length_m >= 4.0);
  CHECK(run.report.path_length_m <= 4.2);
  CHECK(run.report.collisions == 0);
  CHECK(run.telemetry_count > 0);
  // Commands respect the planner clamps throughout.
  for (const CommandRecord& c : run.commands) {
    CHECK(c.v >= 0.0);
    CHECK(c.v <= cfg.planner.v_max);
    CHECK(std::abs(c.yaw_rate) <= cfg.planner.yaw_rate_max);
  }
}

TEST_CASE("runs are deterministic for a fixed (config, seed)") {
  ScenarioConfig cfg;
  const RunResult a = run_scenario(cfg, 99);
  const RunResult b = run_scenario(cfg, 99);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].true_pose.x == b.trajectory[i].true_pose.x);
    CHECK(a.trajectory[i].true_pose.y == b.trajectory[i].true_pose.y);
    CHECK(a.trajectory[i].est_pose.yaw == b.trajectory[i].est_pose.yaw);
  }
  REQUIRE(a.commands.size() == b.commands.size());
  for (std::size_t i = 0; i < a.commands.size(); ++i) {
    CHECK(a.commands[i].v == b.commands[i].v);
    CHECK(a.commands[i].yaw_rate == b.commands[i].yaw_rate);
  }
  REQUIRE(a.detections.size() == b.detections.size());
}

TEST_CASE("planner inputs are sensed at capture time") {
  // With a fast-moving drone and the default ~0.3 s pipeline, capture-time
  // sensing and command-time sensing must diverge.
  ScenarioConfig latent;
  ScenarioConfig ablated;
  ablated.zero_latency = true;
  const RunResult a = run_scenario(latent, 5);
  const RunResult b = run_scenario(ablated, 5);
  bool differs = a.commands.size() != b.commands.size();
  for (std::size_t i = 0; !differs && i < a.commands.size(); ++i) {
    differs = a.commands[i].yaw_rate != b.commands[i].yaw_rate;
  }
  CHECK(differs);
}

TEST_CASE("protocol trace follows the state pipeline") {
  const RunResult run = run_scenario(ScenarioConfig{}, 3);
  // Drone-side transitions in order: ground->hovering->ready->stopping->ground.
  std::vector<SyncState> drone_states;
  for (const ProtocolRecord& r : run.protocol) {
    if (r.side == "drone" && r.state_before != r.state_after) {
      drone_states.push_back(r.state_after);
    }
  }
  REQUIRE(drone_states.size() == 4);
  CHECK(drone_states[0] == SyncState::hovering);
  CHECK(drone_states[1] == SyncState::ready);
  CHECK(drone_states[2] == SyncState::stopping);
  CHECK(drone_states[3] == SyncState::ground);
}

TEST_CASE("a single sweep cell equals repeated runs") {
  ScenarioConfig cfg;
  cfg.repetitions = 3;
  cfg.k_vel_sweep = {1.5};
  cfg.sweep_classes = {ObstacleClass::Short};
  const SweepResult sw = sweep(cfg);
  REQUIRE(sw.cells.size() == 1);
  const SweepCell& cell = sw.cells[0];
  REQUIRE(cell.runs.size() == 3);
  for (int rep = 0; rep < 3; ++rep) {
    ScenarioConfig run_cfg = cfg;
    run_cfg.planner.k_vel = 1.5;
    const RunResult run =
        run_scenario(run_cfg, cell_seed(cfg.seed, 1.5, ObstacleClass::Short, rep));
    CHECK(cell.runs[rep].path_length_m == run.report.path_length_m);
    CHECK(cell.runs[rep].success == run.report.success);
    CHECK(cell.runs[rep].collisions == run.report.collisions);
  }
}

TEST_CASE("sweep summary exports and determinism") {
  ScenarioConfig cfg = control_config();
  cfg.repetitions = 2;
  cfg.k_vel_sweep = {0.5, 1.5};
  cfg.noise = DetectionNoise{};
  const auto dir = std::filesystem::temp_directory_path() / "nanonav_test_sweep";
  std::filesystem::remove_all(dir);

  const SweepResult sw1 = sweep(cfg);
  write_summary_csv(dir / "a.csv", sw1);
  const SweepResult sw2 = sweep(cfg);
  write_summary_csv(dir / "b.csv", sw2);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  // Control condition: every cell succeeds.
  for (const SweepCell& c : sw1.cells) CHECK(c.success_pct == doctest::Approx(100.0));

  // Header-only table when there is nothing to report.
  write_summary_csv(dir / "empty.csv", SweepResult{});
  CHECK(slurp(dir / "empty.csv") ==
        "k_vel,class,success_pct,mean_time_ms,mean_length_m,collisions\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("run artifacts export and read back") {
  const auto dir = std::filesystem::temp_directory_path() / "nanonav_test_run";
  std::filesystem::remove_all(dir);
  ScenarioConfig cfg;
  const RunResult run = run_scenario(cfg, 21);

  write_trajectory_csv(dir / "trajectory.csv", run.trajectory);
  write_frames_csv(dir / "frames.csv", run.frames);
  write_commands_jsonl(dir / "commands.jsonl", run.commands);
  write_detections_jsonl(dir / "detections.jsonl", run.detections);
  write_protocol_jsonl(dir / "protocol.jsonl", run.protocol);
  write_report_json(dir / "report.json", run);

  // Detection log round-trips into the metrics input.
  const auto frames = read_detections_jsonl(dir / "detections.jsonl");
  REQUIRE(frames.size() == run.detections.size());
  const auto direct = to_frame_records(run.detections);
  CHECK(ap_at_iou(frames, 0.5) == doctest::Approx(ap_at_iou(direct, 0.5)).epsilon(1e-12));

  // Trajectory row count matches the SVG polyline vertex count.
  const std::string svg = render_paths_svg(cfg, {&run});
  const std::size_t points_pos = svg.find("points=\"");
  REQUIRE(points_pos != std::string::npos);
  const std::size_t points_end = svg.find('"', points_pos + 8);
  const std::string points = svg.substr(points_pos + 8, points_end - points_pos - 8);
  const std::size_t vertices = std::count(points.begin(), points.end(), ',');
  CHECK(vertices == run.trajectory.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario config json round-trip and overrides") {
  ScenarioConfig cfg;
  cfg.planner.k_vel = 0.7;
  cfg.noise.miss_rate = 0.2;
  cfg.link = LinkConfig::default_jpeg();
  const nlohmann::json j = config::to_json(cfg);

  ScenarioConfig back;
  config::apply_json(j, back);
  CHECK(back.planner.k_vel == doctest::Approx(0.7));
  CHECK(back.noise.miss_rate == doctest::Approx(0.2));
  CHECK(back.link.format == LinkConfig::Format::JPEG);
  CHECK(back.waypoints.size() == cfg.waypoints.size());
  CHECK(back.obstacles.size() == cfg.obstacles.size());

  nlohmann::json doc = nlohmann::json::object();
  config::apply_overrides(doc, {"planner.k_vel=2.0", "noise.miss_rate=0.5", "zero_latency=true"});
  ScenarioConfig over;
  config::apply_json(doc, over);
  CHECK(over.planner.k_vel == doctest::Approx(2.0));
  CHECK(over.noise.miss_rate == doctest::Approx(0.5));
  CHECK(over.zero_latency);

  CHECK_THROWS_AS(config::apply_overrides(doc, {"no_equals_sign"}), std::invalid_argument);
}

TEST_CASE("config validation reports the offending field") {
  ScenarioConfig cfg;
  cfg.waypoints.resize(1);
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("waypoints"), std::invalid_argument);

  cfg = ScenarioConfig{};
  cfg.planner.risk_low_frac = 0.9;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("risk_low_frac"), std::invalid_argument);

  cfg = ScenarioConfig{};
  cfg.link.header_bytes = 5000;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("link"), std::invalid_argument);
}
