// Copyright 2026 The autopark authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <random>

#include "autopark/devices.hpp"

using namespace autopark;
using namespace std::chrono_literals;

namespace {

ErrorCode code_of(auto&& f)
{
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

void power(DeviceFleet& fleet, const ActionRequest& r, SimTime now)
{
  for (const auto& m : fleet.motors_needed(r)) fleet.relays().request_power(m, now);
}

}  // namespace

TEST_CASE("step counts are exact multiples of the step angle")
{
  CHECK(steps_for_angle(90.0, 1.8) == 50);
  CHECK(steps_for_angle(90.0, 7.5) == 12);
  CHECK(steps_for_angle(360.0, 1.8) == 200);
  CHECK(steps_for_angle(0.0, 1.8) == 0);
  CHECK(code_of([] { (void)steps_for_angle(60.0, 1.8); }) == ErrorCode::non_integral_steps);
  CHECK(code_of([] { (void)steps_for_angle(10.0, 7.5); }) == ErrorCode::non_integral_steps);
}

TEST_CASE("move duration is steps over step rate")
{
  CHECK(move_duration(200, 100.0) == 2000ms);
  CHECK(move_duration(12, 6.0) == 2000ms);
  CHECK(move_duration(0, 6.0) == 0ms);
}

TEST_CASE("length sensors trip where the footprint covers them")
{
  CHECK(read_length_sensors(3000, 5000) == LengthSensorReading{ true, true, false });
  CHECK(read_length_sensors(2500, 5000) == LengthSensorReading{ true, false, false });
  CHECK(read_length_sensors(5000, 5000) == LengthSensorReading{ true, true, false });
  CHECK(read_length_sensors(5001, 5000).all_tripped());
  for (std::int64_t len = 1; len <= 10000; ++len) {
    REQUIRE(read_length_sensors(len, 5000).all_tripped() == (len > 5000));
  }
}

TEST_CASE("belt layout and names")
{
  const auto belts = belt_layout(6);
  CHECK(belts.size() == 9);
  CHECK(BeltId::slot(4).to_string() == "slot4");
  CHECK(BeltId::parse("slot4") == BeltId::slot(4));
  CHECK(BeltId::parse("exit") == BeltId::exit());
  CHECK_FALSE(BeltId::parse("slotx").has_value());
  CHECK_FALSE(BeltId::parse("roof").has_value());
}

TEST_CASE("relay bank enforces the budget")
{
  RelayBank bank(2);
  bank.request_power(MotorId::elevator(), 0ms);
  CHECK(code_of([&] { bank.request_power(MotorId::elevator(), 0ms); }) == ErrorCode::motor_already_powered);
  bank.request_power(MotorId::rotor(0), 0ms);
  CHECK(bank.free_slots() == 0);
  CHECK(code_of([&] { bank.request_power(MotorId::rotor(1), 0ms); }) == ErrorCode::power_budget_exceeded);
  bank.release(MotorId::elevator(), 1ms);
  CHECK(bank.powered_count() == 1);
  CHECK(bank.max_concurrent() == 2);
  CHECK(bank.ledger().size() == 3);
}

TEST_CASE("elevator travels 8 s per floor")
{
  DeviceFleet fleet(GarageConfig{});
  const ActionRequest up = ElevateRequest{ 2 };
  CHECK(code_of([&] { (void)fleet.start(up, 0ms); }) == ErrorCode::power_not_granted);
  power(fleet, up, 0ms);
  const auto a = fleet.start(up, 0ms);
  CHECK(a.done_at == 16s);
  CHECK(code_of([&] { (void)fleet.start(RotateRequest{ 1 }, 0ms); }) == ErrorCode::platform_busy);
  fleet.complete(a.id, 16s);
  CHECK(fleet.platform().floor == 2);
  CHECK(fleet.relays().powered_count() == 0);
  CHECK(code_of([&] { (void)fleet.complete(a.id, 16s); }) == ErrorCode::unknown_action);
}

TEST_CASE("rotation takes the short way, ties clockwise")
{
  DeviceFleet fleet(GarageConfig{});
  const ActionRequest half = RotateRequest{ 3 };
  CHECK(fleet.motors_needed(half).size() == 2);
  power(fleet, half, 0ms);
  auto a = fleet.start(half, 0ms);
  CHECK(a.direction == RotationDirection::clockwise);
  CHECK(a.steps == 100);  // 180 degrees at 1.8 per step
  CHECK(a.done_at == 9s);
  fleet.complete(a.id, 9s);
  CHECK(fleet.platform().angle_deg(6) == doctest::Approx(180.0));

  const ActionRequest back = RotateRequest{ 2 };
  power(fleet, back, 9s);
  a = fleet.start(back, 9s);
  CHECK(a.direction == RotationDirection::counter_clockwise);
  CHECK(a.done_at == 12s);
  // rotor positions are rounded to whole steps: 100 -> 67
  CHECK(a.steps == 33);
  fleet.complete(a.id, 12s);
  CHECK(fleet.motors_needed(RotateRequest{ 2 }).empty());
}

TEST_CASE("gates run off the relay bank")
{
  DeviceFleet fleet(GarageConfig{});
  const ActionRequest open = GateRequest{ GateWhich::entrance, GateCommand::open };
  CHECK(fleet.motors_needed(open).empty());
  const auto a = fleet.start(open, 0ms);
  CHECK(a.steps == 12);
  CHECK(a.done_at == 2s);
  CHECK(code_of([&] { (void)fleet.start(open, 0ms); }) == ErrorCode::gate_busy);
  fleet.complete(a.id, 2s);
  CHECK(fleet.gate(GateWhich::entrance).angle_deg == 90.0);
}

TEST_CASE("belts carry vehicles through the transfer chain")
{
  DeviceFleet fleet(GarageConfig{});
  const ActionRequest in = ConveyRequest{ BeltId::entrance(), "CAR-1" };
  power(fleet, in, 0ms);
  auto a = fleet.start(in, 0ms);
  CHECK(a.done_at == 10s);
  CHECK(code_of([&] { (void)fleet.start(in, 0ms); }) == ErrorCode::belt_busy);
  fleet.complete(a.id, 10s);
  CHECK(fleet.belt(BeltId::entrance()).load == "CAR-1");

  const ActionRequest load = TransferRequest{ TransferKind::load_platform };
  CHECK(fleet.motors_needed(load) ==
        std::vector<MotorId>{ MotorId::for_belt(BeltId::entrance()), MotorId::for_belt(BeltId::platform()) });
  power(fleet, load, 10s);
  a = fleet.start(load, 10s);
  CHECK(a.done_at == 15s);
  fleet.complete(a.id, 15s);
  CHECK_FALSE(fleet.belt(BeltId::entrance()).load.has_value());
  CHECK(fleet.belt(BeltId::platform()).load == "CAR-1");

  const ActionRequest stow = TransferRequest{ TransferKind::to_slot };
  power(fleet, stow, 15s);
  a = fleet.start(stow, 15s);
  fleet.complete(a.id, 20s);
  CHECK(fleet.bays().at({ 0, 0 }) == "CAR-1");
  const auto where = fleet.vehicle_locations();
  REQUIRE(where.size() == 1);
  CHECK(where.front().first == "CAR-1");
}

TEST_CASE("faulted belts refuse work until cleared")
{
  DeviceFleet fleet(GarageConfig{});
  fleet.set_belt_fault(BeltId::exit());
  CHECK(fleet.any_fault());
  const ActionRequest out = ConveyRequest{ BeltId::exit(), "CAR-1" };
  power(fleet, out, 0ms);
  CHECK(code_of([&] { (void)fleet.start(out, 0ms); }) == ErrorCode::belt_faulted);
  fleet.clear_faults();
  CHECK_NOTHROW((void)fleet.start(out, 0ms));
}

TEST_CASE("random action sequences never exceed the relay budget")
{
  std::mt19937_64 rng(11);
  DeviceFleet fleet(GarageConfig{});
  SimTime now{ 0 };
  std::size_t peak = 0;
  for (int i = 0; i < 3000; ++i) {
    now += SimTime{ 100 };
    // finish something sometimes
    if (!fleet.in_flight().empty() && rng() % 2 == 0) {
      fleet.complete(fleet.in_flight().begin()->first, now);
    }
    ActionRequest r;
    switch (rng() % 3) {
      case 0: r = ElevateRequest{ static_cast<int>(rng() % 3) }; break;
      case 1: r = RotateRequest{ static_cast<int>(rng() % 6) }; break;
      default: r = ConveyRequest{ BeltId::slot(static_cast<int>(rng() % 6)), "" }; break;
    }
    const auto need = fleet.motors_needed(r);
    if (need.size() > fleet.relays().free_slots()) {
      continue;
    }
    try {
      power(fleet, r, now);
    } catch (const Error&) {
      continue;  // motor already running
    }
    try {
      (void)fleet.start(r, now);
    } catch (const Error&) {
      for (const auto& m : need) fleet.relays().release(m, now);
    }
    peak = std::max(peak, fleet.relays().powered_count());
    REQUIRE(fleet.relays().powered_count() <= 2);
  }
  CHECK(peak == 2);
  CHECK(fleet.relays().max_concurrent() <= 2);
}
