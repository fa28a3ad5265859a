#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nanonav/rng.hpp"

namespace nanonav {

// One delay stage of the streaming pipeline. Samples are in milliseconds and
// clamped to >= 0; empirical traces replay cyclically by frame index.
struct DelayDistribution {
  enum class Kind { Constant, Gaussian, Lognormal, Empirical };

  Kind kind = Kind::Constant;
  double mean = 0.0;   // constant value, gaussian mean, or lognormal log-mean
  double sigma = 0.0;  // gaussian/lognormal spread
  std::vector<double> trace;

  static DelayDistribution constant(double ms) { return {Kind::Constant, ms, 0.0, {}}; }
  static DelayDistribution gaussian(double mu, double sd) { return {Kind::Gaussian, mu, sd, {}}; }
  static DelayDistribution lognormal(double mu_log, double sd_log) {
    return {Kind::Lognormal, mu_log, sd_log, {}};
  }
  static DelayDistribution empirical(std::vector<double> samples) {
    return {Kind::Empirical, 0.0, 0.0, std::move(samples)};
  }

  double sample(Rng& rng, std::size_t frame_index) const {
    double v = 0.0;
    switch (kind) {
      case Kind::Constant: v = mean; break;
      case Kind::Gaussian: v = rng.gaussian(mean, sigma); break;
      case Kind::Lognormal: v = rng.lognormal(mean, sigma); break;
      case Kind::Empirical:
        if (trace.empty()) throw std::invalid_argument("empirical delay trace is empty");
        v = trace[frame_index % trace.size()];
        break;
    }
    return v < 0.0 ? 0.0 : v;
  }
};

// Split-computing pipeline parameters. Stage distributions default to the
// shipped calibration (see config/calibration.json, mirrored by the
// default_raw/default_jpeg factories).
struct LinkConfig {
  enum class Format { RAW, JPEG };

  Format format = Format::RAW;
  std::uint64_t raw_bytes = 76800;  // 320*240*1
  std::uint64_t jpeg_bytes_mean = 6000;
  std::uint64_t mtu = 1022;
  std::uint64_t header_bytes = 0;  // per-packet protocol overhead eating into the MTU
  bool sequential_capture = true;  // next capture waits for the previous transmit

  DelayDistribution capture_ms = DelayDistribution::constant(0.0);
  DelayDistribution encode_ms = DelayDistribution::constant(0.0);
  DelayDistribution transmit_ms = DelayDistribution::constant(0.0);
  // Propagation and host-side reading between transmit completion and the
  // frame being available for inference; it does not gate the capture loop,
  // so it adds latency without costing throughput.
  DelayDistribution propagation_ms = DelayDistribution::constant(0.0);
  DelayDistribution inference_ms = DelayDistribution::gaussian(51.0, 5.0);
  DelayDistribution planning_ms = DelayDistribution::constant(0.5);
  DelayDistribution command_uplink_ms = DelayDistribution::constant(2.0);

  std::uint64_t frame_bytes() const {
    return format == Format::RAW ? raw_bytes : jpeg_bytes_mean;
  }

  static LinkConfig default_raw() {
    LinkConfig cfg;
    cfg.format = Format::RAW;
    cfg.capture_ms = DelayDistribution::gaussian(9.0, 1.0);
    cfg.encode_ms = DelayDistribution::constant(1.0);
    cfg.transmit_ms = DelayDistribution::gaussian(113.0, 10.0);
    cfg.propagation_ms = DelayDistribution::gaussian(203.0, 47.0);
    return cfg;
  }

  static LinkConfig default_jpeg() {
    LinkConfig cfg;
    cfg.format = Format::JPEG;
    cfg.capture_ms = DelayDistribution::gaussian(9.0, 1.0);
    cfg.encode_ms = DelayDistribution::gaussian(27.0, 3.0);
    cfg.transmit_ms = DelayDistribution::gaussian(83.0, 12.0);
    cfg.propagation_ms = DelayDistribution::gaussian(104.0, 52.0);
    return cfg;
  }
};

// Timestamps of one image through the pipeline, on the shared virtual clock.
struct FrameEvent {
  std::size_t frame_index = 0;
  double t_capture_start = 0.0;
  double t_encode_done = 0.0;
  double t_tx_done = 0.0;
  double t_arrival = 0.0;
  double t_inference_done = 0.0;
  double t_command_applied = 0.0;
  std::uint64_t n_packets = 0;
};

// Packets needed for a payload; each packet carries (mtu - header) payload
// bytes. Ceil division; zero payload needs zero packets.
inline std::uint64_t packet_count(std::uint64_t payload_bytes, std::uint64_t mtu,
                                  std::uint64_t header_bytes = 0) {
  if (mtu == 0) throw std::invalid_argument("mtu must be > 0");
  if (header_bytes >= mtu) throw std::invalid_argument("header_bytes must be < mtu");
  const std::uint64_t per_packet = mtu - header_bytes;
  return (payload_bytes + per_packet - 1) / per_packet;
}

// Generates the frame timeline until the horizon. Capture/encode/transmit run
// on the drone; inference is serialized on the edge host, so frames arriving
// faster than they are processed queue up. Deterministic per (config, seed).
inline std::vector<FrameEvent> schedule_frames(const LinkConfig& cfg, double horizon_ms,
                                               Rng& rng) {
  if (horizon_ms <= 0.0) throw std::invalid_argument("horizon_ms must be > 0");
  std::vector<FrameEvent> events;
  const std::uint64_t packets = packet_count(cfg.frame_bytes(), cfg.mtu, cfg.header_bytes);

  double next_capture = 0.0;
  double prev_capture_done = 0.0;
  double prev_encode_done = 0.0;
  double prev_tx_done = 0.0;
  double prev_inference_done = 0.0;
  for (std::size_t k = 0; next_capture < horizon_ms; ++k) {
    FrameEvent ev;
    ev.frame_index = k;
    ev.n_packets = packets;
    ev.t_capture_start = next_capture;
    const double capture_done = ev.t_capture_start + cfg.capture_ms.sample(rng, k);
    const double encode_start =
        cfg.sequential_capture ? capture_done : std::max(capture_done, prev_encode_done);
    ev.t_encode_done = encode_start + cfg.encode_ms.sample(rng, k);
    const double tx_start =
        cfg.sequential_capture ? ev.t_encode_done : std::max(ev.t_encode_done, prev_tx_done);
    ev.t_tx_done = tx_start + cfg.transmit_ms.sample(rng, k);
    ev.t_arrival = ev.t_tx_done + cfg.propagation_ms.sample(rng, k);
    const double inference_start = std::max(ev.t_arrival, prev_inference_done);
    ev.t_inference_done = inference_start + cfg.inference_ms.sample(rng, k);
    ev.t_command_applied =
        ev.t_inference_done + cfg.planning_ms.sample(rng, k) + cfg.command_uplink_ms.sample(rng, k);
    events.push_back(ev);

    prev_capture_done = capture_done;
    prev_encode_done = ev.t_encode_done;
    prev_tx_done = ev.t_tx_done;
    prev_inference_done = ev.t_inference_done;
    next_capture = cfg.sequential_capture ? ev.t_tx_done : prev_capture_done;
    // A degenerate zero-delay pipeline would capture forever at t = 0.
    if (next_capture <= ev.t_capture_start) break;
  }
  return events;
}

inline double end_to_end_latency(const FrameEvent& ev) {
  return ev.t_command_applied - ev.t_capture_start;
}

}  // namespace nanonav
