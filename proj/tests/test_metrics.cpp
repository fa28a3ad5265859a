#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ap_oracle.hpp"
#include "nanonav/metrics.hpp"
#include "nanonav/rng.hpp"

using namespace nanonav;
namespace oracle = ap_oracle;

namespace {

BoundingBox box(double xm, double ym, double xM, double yM) { return {xm, ym, xM, yM}; }

std::vector<FrameRecord> random_log(Rng& rng, std::size_t n_frames) {
  std::vector<FrameRecord> frames(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    frames[i].frame_index = i;
    const auto n_gt = rng.uniform_int(3);
    for (std::uint64_t g = 0; g < n_gt; ++g) {
      const double x = rng.uniform(0, 260);
      const double y = rng.uniform(0, 180);
      frames[i].ground_truths.push_back(box(x, y, x + rng.uniform(20, 60), y + rng.uniform(20, 60)));
    }
    const auto n_det = rng.uniform_int(4);
    for (std::uint64_t d = 0; d < n_det; ++d) {
      BoundingBox b;
      if (!frames[i].ground_truths.empty() && rng.bernoulli(0.7)) {
        // Jittered copy of a ground truth so matches actually occur.
        b = frames[i].ground_truths[rng.uniform_int(frames[i].ground_truths.size())];
        b.xm += rng.uniform(-10, 10);
        b.ym += rng.uniform(-10, 10);
        b.xM += rng.uniform(-10, 10);
        b.yM += rng.uniform(-10, 10);
        if (b.xm > b.xM) std::swap(b.xm, b.xM);
        if (b.ym > b.yM) std::swap(b.ym, b.yM);
      } else {
        const double x = rng.uniform(0, 260);
        const double y = rng.uniform(0, 180);
        b = box(x, y, x + rng.uniform(10, 60), y + rng.uniform(10, 60));
      }
      frames[i].detections.emplace_back(b, rng.uniform01());
    }
  }
  return frames;
}

std::vector<FrameRecord> perfect_log(std::size_t n) {
  std::vector<FrameRecord> frames(n);
  for (std::size_t i = 0; i < n; ++i) {
    frames[i].frame_index = i;
    const BoundingBox b = box(50, 40, 150, 140);
    frames[i].ground_truths.push_back(b);
    frames[i].detections.emplace_back(b, 0.9);
  }
  return frames;
}

}  // namespace

TEST_CASE("iou examples") {
  CHECK(iou(box(0, 0, 10, 10), box(0, 0, 10, 10)) == doctest::Approx(1.0));
  CHECK(iou(box(0, 0, 10, 10), box(20, 20, 30, 30)) == doctest::Approx(0.0));
  CHECK(iou(box(0, 0, 10, 10), box(5, 0, 15, 10)) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(box(5, 5, 5, 5), box(5, 5, 5, 5)) == doctest::Approx(0.0));  // both degenerate
}

TEST_CASE("iou is symmetric and 1 on self") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0, 200), y = rng.uniform(0, 200);
    const BoundingBox a = box(x, y, x + rng.uniform(1, 60), y + rng.uniform(1, 60));
    const double u = rng.uniform(0, 200), v = rng.uniform(0, 200);
    const BoundingBox b = box(u, v, u + rng.uniform(1, 60), v + rng.uniform(1, 60));
    CHECK(iou(a, b) == doctest::Approx(iou(b, a)));
    CHECK(iou(a, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("perfect and empty logs bound the AP scale") {
  const auto perfect = perfect_log(20);
  CHECK(ap_at_iou(perfect, 0.5) == doctest::Approx(100.0));
  CHECK(coco_map(perfect) == doctest::Approx(100.0));

  std::vector<FrameRecord> empty_dets(10);
  for (std::size_t i = 0; i < empty_dets.size(); ++i) {
    empty_dets[i].frame_index = i;
    empty_dets[i].ground_truths.push_back(box(10, 10, 60, 60));
  }
  CHECK(ap_at_iou(empty_dets, 0.5) == doctest::Approx(0.0));
  CHECK(coco_map(empty_dets) == doctest::Approx(0.0));
}

TEST_CASE("ap_at_iou matches the brute-force PR oracle on random logs") {
  Rng rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const auto frames = random_log(rng, 10);
    for (const double thr : {0.3, 0.5, 0.75, 0.9}) {
      CHECK(ap_at_iou(frames, thr) ==
            doctest::Approx(oracle::average_precision(frames, thr)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ap_at_iou is non-increasing in the IoU threshold") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto frames = random_log(rng, 12);
    double prev = 1e9;
    for (double thr = 0.3; thr <= 0.95; thr += 0.05) {
      const double v = ap_at_iou(frames, thr);
      CHECK(v <= prev + 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("coco_map lies between the per-threshold extremes") {
  Rng rng(88);
  const auto frames = random_log(rng, 15);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 10; ++i) {
    const double v = ap_at_iou(frames, 0.5 + 0.05 * i);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double m = coco_map(frames);
  CHECK(m >= lo - 1e-9);
  CHECK(m <= hi + 1e-9);
}

TEST_CASE("window map on perfect and alternating logs") {
  const auto perfect = perfect_log(20);
  const WindowMapResult wm = window_map(perfect, 10);
  CHECK(wm.series.size() == 11);
  for (const double v : wm.series) CHECK(v == doctest::Approx(100.0));
  CHECK(wm.mean == doctest::Approx(100.0));

  // Alternating hit/miss: every 10-frame window holds the same 5-of-10 picture.
  std::vector<FrameRecord> alternating(20);
  for (std::size_t i = 0; i < alternating.size(); ++i) {
    alternating[i].frame_index = i;
    const BoundingBox b = box(40, 40, 120, 120);
    alternating[i].ground_truths.push_back(b);
    if (i % 2 == 0) alternating[i].detections.emplace_back(b, 0.8);
  }
  const WindowMapResult alt = window_map(alternating, 10);
  REQUIRE(!alt.series.empty());
  const double expect = oracle::average_precision(
      {alternating.begin(), alternating.begin() + 10}, 0.5);
  for (const double v : alt.series) CHECK(v == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("window map mean equals the series mean and validates inputs") {
  Rng rng(5150);
  const auto frames = random_log(rng, 25);
  const WindowMapResult wm = window_map(frames, 10);
  double sum = 0.0;
  for (const double v : wm.series) sum += v;
  CHECK(wm.mean == doctest::Approx(sum / wm.series.size()));
  CHECK(wm.series.size() == 16);

  CHECK_THROWS_AS(window_map(std::vector<FrameRecord>(5), 10), std::invalid_argument);
  CHECK_THROWS_AS(window_map(frames, 0), std::invalid_argument);
}

TEST_CASE("run_summary of a straight constant-speed run") {
  std::vector<TrajectorySample> traj;
  for (int i = 0; i <= 400; ++i) {
    TrajectorySample s;
    s.t_ms = i * 10.0;
    s.true_pose = {i * 0.01, 0.0, 0.0};  // 1 m/s sampled at 10 ms
    s.est_pose = s.true_pose;
    traj.push_back(s);
  }
  RunEvents events;
  events.t_task_start_ms = 0.0;
  events.t_mission_complete_ms = 4000.0;
  const RunReport report = run_summary(traj, events);
  CHECK(report.path_length_m == doctest::Approx(4.0).epsilon(1e-9));
  REQUIRE(report.completion_time_ms.has_value());
  CHECK(*report.completion_time_ms == doctest::Approx(4000.0));
  CHECK(report.success);
  CHECK(report.collisions == 0);
}

TEST_CASE("run_summary debounces contiguous collisions and flags aborts") {
  std::vector<TrajectorySample> traj;
  for (int i = 0; i < 100; ++i) {
    TrajectorySample s;
    s.t_ms = i * 10.0;
    s.true_pose = {i * 0.01, 0.0, 0.0};
    s.est_pose = s.true_pose;
    s.collision = (i >= 20 && i < 35) || (i >= 60 && i < 62);
    traj.push_back(s);
  }
  RunEvents events;
  events.t_task_start_ms = 0.0;
  events.t_mission_complete_ms = 990.0;
  RunReport report = run_summary(traj, events);
  CHECK(report.collisions == 2);
  CHECK(!report.success);  // finished but collided

  // No mission-complete event: unsuccessful, no completion time.
  RunEvents aborted;
  aborted.t_task_start_ms = 0.0;
  report = run_summary(traj, aborted);
  CHECK(!report.completion_time_ms.has_value());
  CHECK(!report.success);
}
