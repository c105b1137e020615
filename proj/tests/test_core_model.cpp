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

#include "autopark/core_model.hpp"

using namespace autopark;
using namespace std::chrono_literals;

TEST_CASE("seconds convert to whole milliseconds")
{
  CHECK(from_seconds(1.5) == 1500ms);
  CHECK(from_seconds(0.0004) == 0ms);
  CHECK(from_seconds(0.0005) == 1ms);
  CHECK(to_seconds(2500ms) == doctest::Approx(2.5));
}

TEST_CASE("clock format is HH:MM:SS without wrapping")
{
  CHECK(format_clock(0ms) == "00:00:00");
  CHECK(format_clock(3661000ms) == "01:01:01");
  CHECK(format_clock(90000000ms) == "25:00:00");
  CHECK(format_clock(59999ms) == "00:00:59");
}

TEST_CASE("money renders two decimals, half away from zero")
{
  CHECK(Money::from_units(3).to_string() == "3.00");
  CHECK(Money{ 5000 }.to_string() == "0.01");
  CHECK(Money{ 4999 }.to_string() == "0.00");
  CHECK(Money{ -5000 }.to_string() == "-0.01");
  CHECK(Money::from_units(0.05).micros == 50000);
}

TEST_CASE("billing charges every started minute")
{
  CHECK(billed_minutes(0ms, 3600s) == 60);
  CHECK(billed_minutes(0ms, 61s) == 2);
  CHECK(billed_minutes(0ms, 60s) == 1);
  CHECK(billed_minutes(0ms, 1ms) == 1);
  CHECK(billed_minutes(5s, 5s) == 0);
  CHECK(compute_bill(0ms, 3600s, Money::from_units(0.05)).to_string() == "3.00");
  CHECK(compute_bill(0ms, 61s, Money::from_units(1)).to_string() == "2.00");

  try {
    (void)billed_minutes(10s, 9s);
    FAIL("expected NegativeDuration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::negative_duration);
  }
}

TEST_CASE("billed minutes match a counting oracle")
{
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> dist(0, 10'000'000);
  for (int i = 0; i < 2000; ++i) {
    const auto entry = dist(rng);
    const auto exit = entry + dist(rng);
    // smallest m with m minutes >= duration
    std::int64_t m = 0;
    while (m * 60000 < exit - entry) ++m;
    REQUIRE(billed_minutes(SimTime{ entry }, SimTime{ exit }) == m);
  }
}

TEST_CASE("ticket phases advance one step at a time")
{
  ParkingTicket t;
  t.advance_to(TicketPhase::parking);
  t.advance_to(TicketPhase::parked);
  CHECK_THROWS_AS(t.advance_to(TicketPhase::closed), Error);
  CHECK_THROWS_AS(t.advance_to(TicketPhase::parking), Error);
  t.advance_to(TicketPhase::retrieving);
  t.advance_to(TicketPhase::awaiting_payment);
  t.advance_to(TicketPhase::closed);
  CHECK(t.phase == TicketPhase::closed);
}

TEST_CASE("garage config validation")
{
  CHECK_NOTHROW(validate(GarageConfig{}));

  auto bad = [](auto mutate) {
    GarageConfig c;
    mutate(c);
    try {
      validate(c);
    } catch (const Error& e) {
      return e.code() == ErrorCode::invalid_config;
    }
    return false;
  };
  CHECK(bad([](GarageConfig& c) { c.floors = 0; }));
  CHECK(bad([](GarageConfig& c) { c.slots_per_floor = 0; }));
  CHECK(bad([](GarageConfig& c) { c.max_vehicle_length_mm = 0; }));
  CHECK(bad([](GarageConfig& c) { c.billing_rate_per_minute = -1; }));
  CHECK(bad([](GarageConfig& c) { c.kinematics.belt_transit_s = 0; }));
  CHECK(bad([](GarageConfig& c) { c.kinematics.step_angle_gate_deg = 7.0; }));
  CHECK(bad([](GarageConfig& c) { c.kinematics.step_angle_main_deg = 1.7; }));
}

TEST_CASE("vehicle validation")
{
  CHECK(is_valid_phone("+97455501234"));
  CHECK(is_valid_phone("5550"));
  CHECK_FALSE(is_valid_phone("+"));
  CHECK_FALSE(is_valid_phone(""));
  CHECK_FALSE(is_valid_phone("555-0100"));
  CHECK_NOTHROW(validate(Vehicle{ "CAR-1", 4000, "+1555" }));
  CHECK_THROWS_AS(validate(Vehicle{ "", 4000, "+1555" }), Error);
  CHECK_THROWS_AS(validate(Vehicle{ "CAR-1", 0, "+1555" }), Error);
  CHECK_THROWS_AS(validate(Vehicle{ "CAR-1", 4000, "call me" }), Error);
}

TEST_CASE("grid is row-major and bounds-checked")
{
  Grid<int> g(3, 6, 0);
  CHECK(g.size() == 18);
  CHECK(g.address(0) == SlotAddress{ 0, 0 });
  CHECK(g.address(7) == SlotAddress{ 1, 1 });
  CHECK(g.address(17) == SlotAddress{ 2, 5 });
  CHECK_FALSE(g.contains({ 3, 0 }));
  CHECK_THROWS_AS(g.at({ 0, 6 }), Error);
}

TEST_CASE("new garage is empty")
{
  const auto g = new_garage(GarageConfig{});
  const auto occ = occupancy_count(g);
  CHECK(occ.vacant == 18);
  CHECK(occ.occupied == 0);
  CHECK(occ.reserved == 0);
  CHECK(g.next_ticket == 1);
  for (const auto& cell : g.timers) CHECK_FALSE(cell.has_value());
}
