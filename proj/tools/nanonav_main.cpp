#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nanonav/config_io.hpp"
#include "nanonav/export.hpp"
#include "nanonav/scenario.hpp"

namespace fs = std::filesystem;
using namespace nanonav;

namespace {

struct CommonOpts {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
};

ScenarioConfig load_config(const CommonOpts& opts) {
  std::optional<fs::path> path;
  if (opts.config_path) path = *opts.config_path;
  ScenarioConfig cfg = config::load_scenario(path, opts.overrides);
  cfg.seed = opts.seed;
  cfg.validate();
  return cfg;
}

void write_run_dir(const fs::path& dir, const ScenarioConfig& cfg, const RunResult& run) {
  write_trajectory_csv(dir / "trajectory.csv", run.trajectory);
  write_commands_jsonl(dir / "commands.jsonl", run.commands);
  write_frames_csv(dir / "frames.csv", run.frames);
  write_detections_jsonl(dir / "detections.jsonl", run.detections);
  write_protocol_jsonl(dir / "protocol.jsonl", run.protocol);
  write_report_json(dir / "report.json", run);
  write_text(dir / "scenario.json", config::to_json(cfg).dump(2) + "\n");
}

std::string cell_dir_name(const SweepCell& cell) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_k%g", cell.obstacle_class.c_str(), cell.k_vel);
  return buf;
}

int cmd_run(const CommonOpts& opts) {
  const ScenarioConfig cfg = load_config(opts);
  const RunResult run = run_scenario(cfg, cfg.seed);
  const fs::path dir(opts.out_dir);
  write_run_dir(dir, cfg, run);
  write_text(dir / "path.svg", render_paths_svg(cfg, {&run}));

  std::printf("run: %s  seed=%llu\n", run.report.success ? "success" : "failure",
              static_cast<unsigned long long>(cfg.seed));
  if (run.report.completion_time_ms) {
    std::printf("  completion_time_ms: %.1f\n", *run.report.completion_time_ms);
  }
  std::printf("  path_length_m: %.3f\n", run.report.path_length_m);
  std::printf("  collisions: %u\n", run.report.collisions);
  std::printf("  frames: %zu, commands: %zu\n", run.detections.size(), run.commands.size());
  std::printf("  outputs in %s\n", dir.string().c_str());
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  const ScenarioConfig cfg = load_config(opts);
  const fs::path out(opts.out_dir);

  // Keep trimmed copies of the runs so the sweep plot can show the best
  // cell's paths once the ranking is known.
  struct PlotEntry {
    double k_vel;
    RunResult run;
  };
  std::vector<PlotEntry> plots;
  const RunSink sink = [&](const SweepCell& cell, int rep, const RunResult& run) {
    char rep_name[32];
    std::snprintf(rep_name, sizeof(rep_name), "rep%02d", rep);
    const fs::path dir = out / "runs" / cell_dir_name(cell) / rep_name;
    ScenarioConfig run_cfg = cfg;
    run_cfg.planner.k_vel = cell.k_vel;
    for (ObstacleSpec& o : run_cfg.obstacles) {
      o = make_obstacle(parse_obstacle_class(cell.obstacle_class), o.center_x, o.center_y);
    }
    write_run_dir(dir, run_cfg, run);
    PlotEntry entry{cell.k_vel, {}};
    entry.run.report = run.report;
    entry.run.trajectory = run.trajectory;
    plots.push_back(std::move(entry));
  };

  const SweepResult result = sweep(cfg, sink);
  write_summary_csv(out / "sweep" / "summary.csv", result);

  if (result.best_k_vel) {
    std::vector<const RunResult*> best_runs;
    for (const PlotEntry& entry : plots) {
      if (entry.k_vel == *result.best_k_vel && entry.run.report.success) {
        best_runs.push_back(&entry.run);
      }
    }
    ScenarioConfig plot_cfg = cfg;
    plot_cfg.planner.k_vel = *result.best_k_vel;
    write_text(out / "sweep" / "paths.svg", render_paths_svg(plot_cfg, best_runs));
  }

  std::printf("%-6s %-8s %-12s %-14s %-14s %s\n", "k_vel", "class", "success_pct",
              "mean_time_ms", "mean_length_m", "collisions");
  for (const SweepCell& c : result.cells) {
    std::printf("%-6g %-8s %-12.1f %-14s %-14s %u\n", c.k_vel, c.obstacle_class.c_str(),
                c.success_pct,
                c.mean_time_ms ? detail::fmt(*c.mean_time_ms, 1).c_str() : "-",
                c.mean_length_m ? detail::fmt(*c.mean_length_m, 3).c_str() : "-",
                c.collisions);
  }
  if (result.best_k_vel) std::printf("best k_vel: %g\n", *result.best_k_vel);
  std::printf("outputs in %s\n", out.string().c_str());
  return 0;
}

int cmd_eval(const std::string& log_path, std::size_t window, std::size_t stride,
             const std::optional<std::string>& out_path) {
  const std::vector<FrameRecord> frames = read_detections_jsonl(log_path);
  if (frames.empty()) {
    std::fprintf(stderr, "no frames in %s\n", log_path.c_str());
    return 1;
  }
  nlohmann::json j;
  j["frames"] = frames.size();
  j["ap50"] = ap_at_iou(frames, 0.5);
  j["coco_map"] = coco_map(frames);
  if (frames.size() >= window) {
    const WindowMapResult wm = window_map(frames, window, stride);
    j["window_map"] = {{"window", window}, {"stride", stride}, {"mean", wm.mean},
                       {"series", wm.series}};
  }
  if (out_path) {
    write_text(*out_path, j.dump(2) + "\n");
  }
  std::printf("frames: %zu\n", frames.size());
  std::printf("ap50: %.2f\n", j["ap50"].get<double>());
  std::printf("coco_map: %.2f\n", j["coco_map"].get<double>());
  if (j.contains("window_map")) {
    std::printf("window_map mean: %.2f\n", j["window_map"]["mean"].get<double>());
  }
  return 0;
}

int cmd_plot(const std::string& run_dir, const std::string& out_path) {
  const fs::path dir(run_dir);
  const nlohmann::json scenario_json = config::load_json_file(dir / "scenario.json");
  ScenarioConfig cfg;
  config::apply_json(scenario_json, cfg);

  // Rebuild a minimal trajectory view from the CSV.
  std::ifstream in(dir / "trajectory.csv");
  if (!in) {
    std::fprintf(stderr, "cannot open %s\n", (dir / "trajectory.csv").string().c_str());
    return 1;
  }
  RunResult run;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    TrajectorySample s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &s.t_ms, &s.true_pose.x,
                    &s.true_pose.y, &s.true_pose.yaw, &s.est_pose.x, &s.est_pose.y,
                    &s.est_pose.yaw) == 7) {
      run.trajectory.push_back(s);
    }
  }
  run.report.success = true;
  write_text(out_path, render_paths_svg(cfg, {&run}));
  std::printf("wrote %s (%zu trajectory points)\n", out_path.c_str(), run.trajectory.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nanonav: split-computing nano-drone navigation simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts;
  std::string eval_log, plot_run, plot_out = "path.svg";
  std::size_t eval_window = 10;
  std::size_t eval_stride = 1;
  std::optional<std::string> eval_out;

  CLI::App* run = app.add_subcommand("run", "simulate one scenario and write its logs");
  run->add_option("--config", run_opts.config_path, "scenario JSON file");
  run->add_option("--set", run_opts.overrides, "override, e.g. planner.k_vel=2.0");
  run->add_option("--seed", run_opts.seed, "base random seed")->required();
  run->add_option("--out", run_opts.out_dir, "output directory")->default_val("out/run");

  CLI::App* sw = app.add_subcommand("sweep", "k_vel x obstacle-class parameter sweep");
  sw->add_option("--config", sweep_opts.config_path, "scenario JSON file");
  sw->add_option("--set", sweep_opts.overrides, "override, e.g. repetitions=20");
  sw->add_option("--seed", sweep_opts.seed, "base random seed")->required();
  sw->add_option("--out", sweep_opts.out_dir, "output directory")->default_val("out/sweep");

  CLI::App* ev = app.add_subcommand("eval-detections", "score a detection log");
  ev->add_option("--log", eval_log, "detections.jsonl path")->required();
  ev->add_option("--window", eval_window, "window-mAP width")->default_val(10);
  ev->add_option("--stride", eval_stride, "window-mAP stride")->default_val(1);
  ev->add_option("--out", eval_out, "write the metrics report JSON here");

  CLI::App* pl = app.add_subcommand("plot", "render a run directory as SVG");
  pl->add_option("--run", plot_run, "run directory (with trajectory.csv + scenario.json)")
      ->required();
  pl->add_option("--out", plot_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sw->parsed()) return cmd_sweep(sweep_opts);
    if (ev->parsed()) return cmd_eval(eval_log, eval_window, eval_stride, eval_out);
    if (pl->parsed()) return cmd_plot(plot_run, plot_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
