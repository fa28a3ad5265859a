#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanonav/detection.hpp"
#include "nanonav/geometry.hpp"

namespace nanonav {

// Shared state set, number-encoded on the wire in pipeline order.
// Transitions only run along ground -> hovering -> ready -> stopping -> ground.
enum class SyncState : std::uint8_t { ground = 0, hovering = 1, ready = 2, stopping = 3 };

inline const char* sync_state_name(SyncState s) {
  switch (s) {
    case SyncState::ground: return "ground";
    case SyncState::hovering: return "hovering";
    case SyncState::ready: return "ready";
    case SyncState::stopping: return "stopping";
  }
  return "ground";
}

// Successor in the linear state flow.
inline SyncState next_state(SyncState s) {
  return static_cast<SyncState>((static_cast<std::uint8_t>(s) + 1) % 4);
}

enum class MessageKind : std::uint8_t {
  command = 0,        // code = target state
  state_report = 1,   // code = reported state
  task_event = 2,     // code 0 = intermediate waypoint, 1 = final waypoint
  pose_telemetry = 3, // payload = x, y, yaw as 3 LE doubles
  detection_data = 4, // code 0 = empty frame, 1 = payload carries a detection
};

struct Message {
  MessageKind kind = MessageKind::command;
  std::uint8_t code = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const Message&) const = default;
};

struct DecodeError : std::runtime_error {
  explicit DecodeError(std::size_t offset_, const std::string& what_)
      : std::runtime_error("decode error at offset " + std::to_string(offset_) + ": " + what_),
        offset(offset_) {}
  std::size_t offset;
};

// Wire layout: kind (1 byte), code (1 byte), payload length (2 bytes LE),
// payload. decode(encode(m)) == m for every valid message.
inline std::vector<std::uint8_t> encode_message(const Message& m) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + m.payload.size());
  out.push_back(static_cast<std::uint8_t>(m.kind));
  out.push_back(m.code);
  out.push_back(static_cast<std::uint8_t>(m.payload.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>((m.payload.size() >> 8) & 0xff));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

inline Message decode_message(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw DecodeError(bytes.size(), "truncated header, need 4 bytes");
  if (bytes[0] > static_cast<std::uint8_t>(MessageKind::detection_data)) {
    throw DecodeError(0, "unknown message kind " + std::to_string(bytes[0]));
  }
  Message m;
  m.kind = static_cast<MessageKind>(bytes[0]);
  m.code = bytes[1];
  const std::size_t length = bytes[2] | (static_cast<std::size_t>(bytes[3]) << 8);
  if (bytes.size() < 4 + length) {
    throw DecodeError(bytes.size(), "truncated payload, need " + std::to_string(4 + length) +
                                        " bytes");
  }
  m.payload.assign(bytes.begin() + 4, bytes.begin() + 4 + length);
  return m;
}

namespace detail {

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

inline double get_f64(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline Message make_command(SyncState target) {
  return {MessageKind::command, static_cast<std::uint8_t>(target), {}};
}

inline Message make_state_report(SyncState state) {
  return {MessageKind::state_report, static_cast<std::uint8_t>(state), {}};
}

inline Message make_task_event(bool final_waypoint, std::uint16_t waypoint_index) {
  Message m{MessageKind::task_event, static_cast<std::uint8_t>(final_waypoint ? 1 : 0), {}};
  m.payload.push_back(static_cast<std::uint8_t>(waypoint_index & 0xff));
  m.payload.push_back(static_cast<std::uint8_t>((waypoint_index >> 8) & 0xff));
  return m;
}

inline Message make_pose_telemetry(const Pose2D& pose) {
  Message m{MessageKind::pose_telemetry, 0, {}};
  detail::put_f64(m.payload, pose.x);
  detail::put_f64(m.payload, pose.y);
  detail::put_f64(m.payload, pose.yaw);
  return m;
}

inline Message make_detection_data(const std::optional<Detection>& det) {
  Message m{MessageKind::detection_data, static_cast<std::uint8_t>(det ? 1 : 0), {}};
  if (det) {
    m.payload.push_back(static_cast<std::uint8_t>(det->cls));
    detail::put_f64(m.payload, det->score);
    detail::put_f64(m.payload, det->box.xm);
    detail::put_f64(m.payload, det->box.ym);
    detail::put_f64(m.payload, det->box.xM);
    detail::put_f64(m.payload, det->box.yM);
  }
  return m;
}

inline std::optional<Detection> parse_detection_data(const Message& m) {
  if (m.kind != MessageKind::detection_data || m.code == 0) return std::nullopt;
  if (m.payload.size() < 41) throw DecodeError(m.payload.size(), "short detection payload");
  Detection d;
  d.cls = static_cast<ObstacleClass>(m.payload[0]);
  d.score = detail::get_f64(m.payload, 1);
  d.box.xm = detail::get_f64(m.payload, 9);
  d.box.ym = detail::get_f64(m.payload, 17);
  d.box.xM = detail::get_f64(m.payload, 25);
  d.box.yM = detail::get_f64(m.payload, 33);
  return d;
}

// Master side (the OCU). Commands each transition, advances its own state
// only on the matching report, and forwards detection data while the task
// runs. Unexpected reports are ignored; the next step re-commands, which is
// safe because commands are idempotent on the drone side.
class MasterSync {
 public:
  SyncState state() const { return state_; }
  bool mission_done() const { return mission_done_; }
  bool stop_pending() const { return stop_pending_; }

  std::vector<Message> step(const std::optional<Message>& incoming) {
    std::vector<Message> out;
    if (incoming) handle(*incoming, out);
    switch (state_) {
      case SyncState::ground:
        if (!mission_done_) out.push_back(make_command(SyncState::hovering));
        break;
      case SyncState::hovering:
        out.push_back(make_command(SyncState::ready));
        break;
      case SyncState::ready:
        if (stop_pending_) out.push_back(make_command(SyncState::stopping));
        break;
      case SyncState::stopping:
        break;  // the drone reports ground on its own once landed
    }
    return out;
  }

 private:
  void handle(const Message& msg, std::vector<Message>& out) {
    switch (msg.kind) {
      case MessageKind::state_report: {
        const auto reported = static_cast<SyncState>(msg.code);
        if (reported == next_state(state_)) {
          state_ = reported;
          if (state_ == SyncState::ground) mission_done_ = true;
        }
        break;  // any other report is stale or unexpected; re-command next step
      }
      case MessageKind::task_event:
        if (msg.code == 1) stop_pending_ = true;
        break;
      case MessageKind::detection_data:
        if (state_ == SyncState::ready) out.push_back(msg);
        break;
      case MessageKind::pose_telemetry:
      case MessageKind::command:
        break;  // logged upstream, nothing to do
    }
  }

  SyncState state_ = SyncState::ground;
  bool stop_pending_ = false;
  bool mission_done_ = false;
};

enum class FlightStatus : std::uint8_t { on_ground, at_height, task_running, landed };

// Drone side. Obeys only commands for the adjacent next state, and only once
// the flight condition permits: hovering is acknowledged at nominal height,
// ground once landed. Every state change emits a report; non-adjacent
// commands are rejected by re-reporting the current state.
class DroneSync {
 public:
  SyncState state() const { return state_; }
  std::optional<SyncState> pending() const { return pending_; }

  std::vector<Message> step(const std::optional<Message>& incoming, FlightStatus flight) {
    std::vector<Message> out;
    if (incoming && incoming->kind == MessageKind::command) {
      const auto target = static_cast<SyncState>(incoming->code);
      if (target == next_state(state_)) {
        if (pending_ != target) pending_ = target;
      } else if (target != state_ && pending_ != target) {
        out.push_back(make_state_report(state_));  // reject non-adjacent command
      }
    }
    // Pending transitions complete when the airframe catches up.
    if (pending_) {
      const bool airborne = flight == FlightStatus::at_height || flight == FlightStatus::task_running;
      const bool can_enter = (*pending_ == SyncState::hovering && airborne) ||
                             (*pending_ == SyncState::ready && airborne) ||
                             (*pending_ == SyncState::stopping);
      if (can_enter) {
        state_ = *pending_;
        pending_.reset();
        out.push_back(make_state_report(state_));
      }
    }
    if (state_ == SyncState::stopping && flight == FlightStatus::landed) {
      state_ = SyncState::ground;
      out.push_back(make_state_report(state_));
    }
    return out;
  }

  // Waypoint progress while the task runs, reported to the OCU.
  std::vector<Message> report_task_event(bool final_waypoint, std::uint16_t waypoint_index) {
    if (state_ != SyncState::ready) return {};
    return {make_task_event(final_waypoint, waypoint_index)};
  }

 private:
  SyncState state_ = SyncState::ground;
  std::optional<SyncState> pending_;
};

}  // namespace nanonav
