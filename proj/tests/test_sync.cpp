#include <doctest.h>

#include <optional>
#include <vector>

#include "nanonav/rng.hpp"
#include "nanonav/sync.hpp"

using namespace nanonav;

TEST_CASE("state_report(ready) encodes to the fixed wire bytes") {
  const auto bytes = encode_message(make_state_report(SyncState::ready));
  REQUIRE(bytes.size() == 4);
  CHECK(bytes[0] == 0x01);
  CHECK(bytes[1] == 0x02);
  CHECK(bytes[2] == 0x00);
  CHECK(bytes[3] == 0x00);
}

TEST_CASE("codec round-trips fuzzed messages") {
  Rng rng(55);
  for (int i = 0; i < 300; ++i) {
    Message m;
    m.kind = static_cast<MessageKind>(rng.uniform_int(5));
    m.code = static_cast<std::uint8_t>(rng.uniform_int(256));
    const std::size_t len = rng.uniform_int(64);
    for (std::size_t b = 0; b < len; ++b) {
      m.payload.push_back(static_cast<std::uint8_t>(rng.uniform_int(256)));
    }
    CHECK(decode_message(encode_message(m)) == m);
  }
}

TEST_CASE("decode errors name the failing offset") {
  const std::vector<std::uint8_t> short_buf{0x01, 0x02, 0x00};
  CHECK_THROWS_WITH_AS(decode_message(short_buf), doctest::Contains("offset 3"), DecodeError);

  const std::vector<std::uint8_t> bad_kind{0x09, 0x00, 0x00, 0x00};
  CHECK_THROWS_WITH_AS(decode_message(bad_kind), doctest::Contains("offset 0"), DecodeError);

  // Header promises 8 payload bytes but only 2 follow.
  const std::vector<std::uint8_t> truncated{0x02, 0x01, 0x08, 0x00, 0xaa, 0xbb};
  CHECK_THROWS_AS(decode_message(truncated), DecodeError);
}

TEST_CASE("detection payload round-trips through the wire format") {
  Detection d{ObstacleClass::Large, 0.875, {12.5, 30.25, 200.0, 181.75}};
  const Message m = make_detection_data(d);
  const Message back = decode_message(encode_message(m));
  const auto parsed = parse_detection_data(back);
  REQUIRE(parsed.has_value());
  CHECK(parsed->cls == ObstacleClass::Large);
  CHECK(parsed->score == 0.875);
  CHECK(parsed->box.xm == 12.5);
  CHECK(parsed->box.yM == 181.75);

  CHECK(!parse_detection_data(make_detection_data(std::nullopt)).has_value());
}

TEST_CASE("pose telemetry encodes 24 payload bytes") {
  const Message m = make_pose_telemetry({1.5, -2.25, 90.0});
  CHECK(m.payload.size() == 24);
  CHECK(decode_message(encode_message(m)) == m);
}

TEST_CASE("happy-path synchronization reaches ready in four messages") {
  MasterSync master;
  DroneSync drone;

  // Master starts on the ground and commands takeoff.
  auto out = master.step(std::nullopt);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == MessageKind::command);
  CHECK(out[0].code == static_cast<std::uint8_t>(SyncState::hovering));

  // Drone accepts but does not report until at nominal height.
  auto drone_out = drone.step(out[0], FlightStatus::on_ground);
  CHECK(drone_out.empty());
  CHECK(drone.state() == SyncState::ground);
  CHECK(drone.pending() == SyncState::hovering);

  drone_out = drone.step(std::nullopt, FlightStatus::at_height);
  REQUIRE(drone_out.size() == 1);
  CHECK(drone_out[0].kind == MessageKind::state_report);
  CHECK(drone_out[0].code == static_cast<std::uint8_t>(SyncState::hovering));

  // Master advances and immediately commands ready.
  out = master.step(drone_out[0]);
  CHECK(master.state() == SyncState::hovering);
  REQUIRE(out.size() == 1);
  CHECK(out[0].code == static_cast<std::uint8_t>(SyncState::ready));

  drone_out = drone.step(out[0], FlightStatus::at_height);
  REQUIRE(drone_out.size() == 1);
  CHECK(drone.state() == SyncState::ready);

  out = master.step(drone_out[0]);
  CHECK(master.state() == SyncState::ready);
  CHECK(out.empty());  // goal state, no further command until the task ends
}

TEST_CASE("task completion drives stopping and landing") {
  MasterSync master;
  DroneSync drone;
  // Fast-forward both sides to ready.
  drone.step(master.step(std::nullopt)[0], FlightStatus::on_ground);
  auto rep = drone.step(std::nullopt, FlightStatus::at_height);
  auto cmd = master.step(rep[0]);
  rep = drone.step(cmd[0], FlightStatus::at_height);
  master.step(rep[0]);
  REQUIRE(master.state() == SyncState::ready);
  REQUIRE(drone.state() == SyncState::ready);

  // Final waypoint reached: the drone reports, the master commands stop.
  const auto events = drone.report_task_event(true, 1);
  REQUIRE(events.size() == 1);
  auto out = master.step(events[0]);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == MessageKind::command);
  CHECK(out[0].code == static_cast<std::uint8_t>(SyncState::stopping));

  // Drone lands: stopping is entered immediately, ground once landed.
  auto drone_out = drone.step(out[0], FlightStatus::task_running);
  REQUIRE(drone_out.size() == 1);
  CHECK(drone.state() == SyncState::stopping);
  master.step(drone_out[0]);
  CHECK(master.state() == SyncState::stopping);

  drone_out = drone.step(std::nullopt, FlightStatus::landed);
  REQUIRE(drone_out.size() == 1);
  CHECK(drone.state() == SyncState::ground);
  master.step(drone_out[0]);
  CHECK(master.state() == SyncState::ground);
  CHECK(master.mission_done());
  // Mission over: the master must not command another takeoff.
  CHECK(master.step(std::nullopt).empty());
}

TEST_CASE("non-adjacent commands are rejected with a re-report") {
  DroneSync drone;
  // Reach hovering first.
  drone.step(make_command(SyncState::hovering), FlightStatus::on_ground);
  drone.step(std::nullopt, FlightStatus::at_height);
  REQUIRE(drone.state() == SyncState::hovering);

  const auto out = drone.step(make_command(SyncState::stopping), FlightStatus::at_height);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == MessageKind::state_report);
  CHECK(out[0].code == static_cast<std::uint8_t>(SyncState::hovering));
  CHECK(drone.state() == SyncState::hovering);
}

TEST_CASE("duplicate commands are idempotent") {
  DroneSync drone;
  drone.step(make_command(SyncState::hovering), FlightStatus::on_ground);
  const auto out = drone.step(make_command(SyncState::hovering), FlightStatus::on_ground);
  CHECK(out.empty());
  CHECK(drone.pending() == SyncState::hovering);
}

TEST_CASE("master ignores unexpected state reports") {
  MasterSync master;
  master.step(std::nullopt);  // commands hovering
  const auto out = master.step(make_state_report(SyncState::stopping));
  CHECK(master.state() == SyncState::ground);
  REQUIRE(out.size() == 1);  // re-commands hovering
  CHECK(out[0].code == static_cast<std::uint8_t>(SyncState::hovering));
}

TEST_CASE("detection data is forwarded only in ready") {
  MasterSync master;
  const Message det = make_detection_data(std::nullopt);
  auto out = master.step(det);
  for (const Message& m : out) CHECK(m.kind != MessageKind::detection_data);

  // Bring the master to ready.
  master.step(make_state_report(SyncState::hovering));
  master.step(make_state_report(SyncState::ready));
  REQUIRE(master.state() == SyncState::ready);
  out = master.step(det);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == MessageKind::detection_data);
}
