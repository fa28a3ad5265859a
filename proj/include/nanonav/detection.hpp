#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "nanonav/camera.hpp"
#include "nanonav/obstacles.hpp"
#include "nanonav/rng.hpp"

namespace nanonav {

// One obstacle hypothesis as emitted by the detector.
struct Detection {
  ObstacleClass cls = ObstacleClass::Cube;
  double score = 0.0;  // confidence in [0, 1]
  BoundingBox box;
};

// Keeps the highest-confidence candidate whose score exceeds the threshold.
// Strictly-greater comparison, so the first of equal scores wins; empty when
// nothing qualifies.
inline std::optional<Detection> select_detection(const std::vector<Detection>& raw,
                                                 double threshold) {
  std::optional<Detection> best;
  double max_score = threshold;
  for (const Detection& d : raw) {
    if (d.score > max_score && d.score <= 1.0) {
      max_score = d.score;
      best = d;
    }
  }
  return best;
}

// Imperfection model standing in for the offloaded detector: dropped frames,
// edge jitter, spurious boxes, and a resampled confidence score.
// An all-zero instance is the identity (the input score passes through when
// score_low == score_high == 0).
struct DetectionNoise {
  double edge_jitter_sigma = 0.0;    // px, zero-mean Gaussian per box edge
  double miss_rate = 0.0;            // probability of dropping a true detection
  double false_positive_rate = 0.0;  // probability of a spurious box on empty frames
  double score_low = 0.0;
  double score_high = 0.0;
};

namespace detail {

inline double sample_score(const DetectionNoise& noise, double original, Rng& rng) {
  if (noise.score_high <= 0.0 && noise.score_low <= 0.0) return original;
  return rng.uniform(noise.score_low, noise.score_high);
}

}  // namespace detail

// Applies the noise model to one frame's true detection. Deterministic for a
// given generator state; draw order is fixed (miss, 4 edge jitters, score /
// false positive, 4 corners, class, score).
inline std::optional<Detection> perturb_detection(const std::optional<Detection>& det,
                                                  const DetectionNoise& noise,
                                                  const CameraModel& cam, Rng& rng) {
  if (det.has_value()) {
    if (noise.miss_rate > 0.0 && rng.bernoulli(noise.miss_rate)) return std::nullopt;
    Detection out = *det;
    if (noise.edge_jitter_sigma > 0.0) {
      out.box.xm += rng.gaussian(0.0, noise.edge_jitter_sigma);
      out.box.ym += rng.gaussian(0.0, noise.edge_jitter_sigma);
      out.box.xM += rng.gaussian(0.0, noise.edge_jitter_sigma);
      out.box.yM += rng.gaussian(0.0, noise.edge_jitter_sigma);
      if (out.box.xm > out.box.xM) std::swap(out.box.xm, out.box.xM);
      if (out.box.ym > out.box.yM) std::swap(out.box.ym, out.box.yM);
      out.box.xm = std::clamp(out.box.xm, 0.0, cam.width_px);
      out.box.xM = std::clamp(out.box.xM, 0.0, cam.width_px);
      out.box.ym = std::clamp(out.box.ym, 0.0, cam.height_px);
      out.box.yM = std::clamp(out.box.yM, 0.0, cam.height_px);
    }
    out.score = detail::sample_score(noise, out.score, rng);
    return out;
  }

  if (noise.false_positive_rate > 0.0 && rng.bernoulli(noise.false_positive_rate)) {
    Detection fp;
    double x1 = rng.uniform(0.0, cam.width_px);
    double x2 = rng.uniform(0.0, cam.width_px);
    double y1 = rng.uniform(0.0, cam.height_px);
    double y2 = rng.uniform(0.0, cam.height_px);
    fp.box.xm = std::min(x1, x2);
    fp.box.xM = std::max(x1, x2);
    fp.box.ym = std::min(y1, y2);
    fp.box.yM = std::max(y1, y2);
    fp.cls = static_cast<ObstacleClass>(rng.uniform_int(4));
    fp.score = detail::sample_score(noise, 0.0, rng);
    return fp;
  }
  return std::nullopt;
}

}  // namespace nanonav
