#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanonav/camera.hpp"
#include "nanonav/geometry.hpp"
#include "nanonav/obstacles.hpp"

namespace nanonav {

// One frame of the detection log, class labels already collapsed into the
// single generic obstacle class.
struct FrameRecord {
  std::size_t frame_index = 0;
  std::vector<std::pair<BoundingBox, double>> detections;  // (box, score)
  std::vector<BoundingBox> ground_truths;
};

// Intersection over union of two boxes; 0 when disjoint or when both are
// degenerate (zero area).
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.xM, b.xM) - std::max(a.xm, b.xm));
  const double iy = std::max(0.0, std::min(a.yM, b.yM) - std::max(a.ym, b.ym));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

namespace detail {

struct RankedDetection {
  double score = 0.0;
  std::size_t order = 0;  // global insertion order, tie-break for equal scores
  bool true_positive = false;
};

// Greedy per-frame matching: detections in descending score order claim the
// unmatched ground truth with the highest IoU; the claim counts only when
// that IoU reaches the threshold.
inline void match_frame(const FrameRecord& frame, double threshold,
                        std::vector<RankedDetection>& ranked, std::size_t& order) {
  std::vector<std::size_t> det_idx(frame.detections.size());
  for (std::size_t i = 0; i < det_idx.size(); ++i) det_idx[i] = i;
  std::stable_sort(det_idx.begin(), det_idx.end(), [&](std::size_t a, std::size_t b) {
    return frame.detections[a].second > frame.detections[b].second;
  });
  std::vector<bool> gt_used(frame.ground_truths.size(), false);
  for (const std::size_t di : det_idx) {
    const auto& [box, score] = frame.detections[di];
    double best_iou = 0.0;
    std::size_t best_gt = frame.ground_truths.size();
    for (std::size_t gi = 0; gi < frame.ground_truths.size(); ++gi) {
      if (gt_used[gi]) continue;
      const double v = iou(box, frame.ground_truths[gi]);
      if (v > best_iou) {
        best_iou = v;
        best_gt = gi;
      }
    }
    RankedDetection rd;
    rd.score = score;
    rd.order = order++;
    if (best_gt < frame.ground_truths.size() && best_iou >= threshold) {
      gt_used[best_gt] = true;
      rd.true_positive = true;
    }
    ranked.push_back(rd);
  }
}

}  // namespace detail

// Single-class average precision at one IoU threshold, scaled to [0, 100].
// Detections are ranked globally by score and the precision-recall curve is
// summarized with the 101-point COCO interpolation. A log with no ground
// truth scores 100 when it also has no detections, 0 otherwise.
inline double ap_at_iou(std::span<const FrameRecord> frames, double threshold) {
  std::vector<detail::RankedDetection> ranked;
  std::size_t total_gt = 0;
  std::size_t order = 0;
  for (const FrameRecord& f : frames) {
    total_gt += f.ground_truths.size();
    detail::match_frame(f, threshold, ranked, order);
  }
  if (total_gt == 0) return ranked.empty() ? 100.0 : 0.0;
  if (ranked.empty()) return 0.0;

  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const detail::RankedDetection& a, const detail::RankedDetection& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.order < b.order;
                   });
  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].true_positive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  // Monotone envelope from the right, then sample 101 recall points.
  for (std::size_t i = precision.size() - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int j = 0; j <= 100; ++j) {
    const double r = j / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return 100.0 * sum / 101.0;
}

// Mean AP over IoU thresholds 0.50:0.05:0.95.
inline double coco_map(std::span<const FrameRecord> frames) {
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) sum += ap_at_iou(frames, 0.5 + 0.05 * i);
  return sum / 10.0;
}

struct WindowMapResult {
  std::vector<double> series;  // one AP@0.5 per window
  double mean = 0.0;
};

// Moving average of AP at IoU=0.5 over windows of consecutive frames.
// Rewards detectors whose errors are transient rather than sustained.
inline WindowMapResult window_map(std::span<const FrameRecord> frames, std::size_t window = 10,
                                  std::size_t stride = 1) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (frames.size() < window) {
    throw std::invalid_argument("window_map needs at least " + std::to_string(window) +
                                " frames, got " + std::to_string(frames.size()));
  }
  WindowMapResult out;
  for (std::size_t start = 0; start + window <= frames.size(); start += stride) {
    out.series.push_back(ap_at_iou(frames.subspan(start, window), 0.5));
  }
  double sum = 0.0;
  for (const double v : out.series) sum += v;
  out.mean = sum / static_cast<double>(out.series.size());
  return out;
}

// Navigation-quality summary of one run.
struct RunReport {
  std::optional<double> completion_time_ms;  // absent when the run did not finish
  double path_length_m = 0.0;
  bool success = false;
  std::uint32_t collisions = 0;
  double k_vel = 0.0;
  std::string obstacle_class;
  std::uint64_t seed = 0;
};

struct TrajectorySample {
  double t_ms = 0.0;
  Pose2D true_pose;
  Pose2D est_pose;
  double v_cmd = 0.0;
  double yaw_rate_cmd = 0.0;
  bool collision = false;
};

struct RunEvents {
  std::optional<double> t_task_start_ms;
  std::vector<double> t_waypoint_ms;
  std::optional<double> t_mission_complete_ms;
};

// Aggregates a trajectory into the run metrics. Path length and collisions
// are measured from the task start to the end of the log, so the stopping
// coast into the capture disc counts as flown path; completion time is the
// mission-complete timestamp relative to the task start. Contiguous colliding
// intervals count as one collision.
inline RunReport run_summary(std::span<const TrajectorySample> trajectory,
                             const RunEvents& events) {
  if (trajectory.empty()) throw std::invalid_argument("run_summary needs a non-empty trajectory");
  RunReport report;
  const double t_begin = events.t_task_start_ms.value_or(trajectory.front().t_ms);

  bool in_collision = false;
  const TrajectorySample* prev = nullptr;
  for (const TrajectorySample& s : trajectory) {
    if (s.t_ms < t_begin) continue;
    if (prev != nullptr) {
      report.path_length_m += std::hypot(s.true_pose.x - prev->true_pose.x,
                                         s.true_pose.y - prev->true_pose.y);
    }
    prev = &s;
    if (s.collision && !in_collision) ++report.collisions;
    in_collision = s.collision;
  }
  if (events.t_mission_complete_ms) {
    report.completion_time_ms = *events.t_mission_complete_ms - t_begin;
    report.success = report.collisions == 0;
  }
  return report;
}

}  // namespace nanonav
