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
#include <regex>
#include <sstream>

#include "autopark/controller.hpp"
#include "autopark/simulation.hpp"

using namespace autopark;
using namespace std::chrono_literals;

namespace {

std::vector<std::string> lines_with(const std::string& trace, const std::string& prefix)
{
  std::vector<std::string> out;
  std::istringstream in(trace);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) out.push_back(line);
  }
  return out;
}

Vehicle car(int i, std::int64_t len = 4200)
{
  return Vehicle{ "CAR-" + std::to_string(i), len, "+1555000" + std::to_string(i) };
}

// independent first-free scan
std::optional<SlotAddress> brute_first_free(const SlotMatrix& m)
{
  for (int f = 0; f < m.floors(); ++f) {
    for (int s = 0; s < m.slots_per_floor(); ++s) {
      if (m.at({ f, s }).status == SlotStatus::vacant) return SlotAddress{ f, s };
    }
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("allocation matches a brute-force scan")
{
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const int floors = 1 + static_cast<int>(rng() % 5);
    const int slots = 1 + static_cast<int>(rng() % 10);
    SlotMatrix m(floors, slots);
    const double density = static_cast<double>(rng() % 101) / 100.0;
    for (auto& cell : m) {
      if (std::uniform_real_distribution<double>(0, 1)(rng) < density) {
        cell = rng() % 2 ? SlotState::occupied(TicketId{ 99 }) : SlotState::reserved(TicketId{ 98 });
      }
    }
    const auto expected = brute_first_free(m);
    auto copy = m;
    const auto got = allocate_slot(copy, TicketId{ 7 });
    REQUIRE(got == expected);
    if (got) CHECK(copy.at(*got) == SlotState::reserved(TicketId{ 7 }));
  }
}

TEST_CASE("parking into the first bay follows the hand-built timeline")
{
  Simulation sim(SimulationConfig{});
  sim.push(0ms, ArrivalEvent{ car(1) });
  sim.run_to_completion();

  // gate 2 s, belt 10 s, gate 2 s, zero moves, load 5 s, zero moves, transfer 5 s
  const std::vector<std::pair<std::string, std::string>> expected = {
    { "0", "OpenGate" },      { "2000", "Convey" },  { "12000", "CloseGate" },      { "14000", "Elevate" },
    { "14000", "Rotate" },    { "14000", "LoadPlatform" }, { "19000", "Elevate" }, { "19000", "Rotate" },
    { "19000", "TransferToSlot" },
  };
  const auto acts = lines_with(sim.trace(), "act ");
  REQUIRE(acts.size() == expected.size());
  const std::regex re(R"(act t=(\d+) ticket=1 step=(\w+) .*)");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    std::smatch m;
    REQUIRE(std::regex_match(acts[i], m, re));
    CHECK(m[1] == expected[i].first);
    CHECK(m[2] == expected[i].second);
  }
  const auto& rec = sim.controller().records().at(TicketId{ 1 });
  CHECK(rec.park_complete == 24s);
  CHECK(sim.controller().garage().slots.at({ 0, 0 }) == SlotState::occupied(TicketId{ 1 }));
  CHECK(sim.controller().garage().timers.at({ 0, 0 }) == 0ms);
  CHECK(sim.controller().fleet().bays().at({ 0, 0 }) == "CAR-1");
  CHECK(sim.violations().empty());
}

TEST_CASE("farthest bay parks in 49 s and the platform homes afterwards")
{
  SimulationConfig config;
  Simulation sim(config);
  for (int i = 0; i < 16; ++i) {
    sim.push(SimTime{ i * 120000 }, ArrivalEvent{ car(i + 1) });
  }
  sim.run_to_completion();
  const auto& t16 = sim.controller().garage().tickets.at(TicketId{ 16 });
  CHECK(t16.slot == SlotAddress{ 2, 3 });
  const auto& rec = sim.controller().records().at(TicketId{ 16 });
  // 2 + 10 + 2 + 5 + 2*8 + 3*3 + 5
  CHECK(*rec.park_complete - rec.entry == 49s);
  CHECK(sim.controller().fleet().platform().floor == 0);
  CHECK(sim.controller().fleet().platform().slot_index == 0);
  CHECK(sim.violations().empty());
}

TEST_CASE("retrieval stops the timer at the message time and bills")
{
  Simulation sim(SimulationConfig{});
  sim.push(0ms, ArrivalEvent{ car(1) });
  sim.push(3600s, InboundSmsEvent{ car(1).phone, "retrieve" });
  sim.run_until(3700s);
  const auto& t = sim.controller().garage().tickets.at(TicketId{ 1 });
  CHECK(t.exit_time == 3600s);
  CHECK(t.phase == TicketPhase::awaiting_payment);
  REQUIRE(t.amount_due.has_value());
  CHECK(t.amount_due->to_string() == "3.00");
  const auto& rec = sim.controller().records().at(TicketId{ 1 });
  // poll at 3602, then 5 transfer + 5 unload + 10 exit belt from bay (0,0)
  CHECK(rec.exit_ready == 3622s);
  CHECK(rec.delivered_vehicle == "CAR-1");
  CHECK(sim.controller().garage().slots.at({ 0, 0 }).status == SlotStatus::vacant);

  const auto& inbox = sim.controller().network().handset(car(1).phone);
  REQUIRE(inbox.size() == 2);
  CHECK(inbox[1].body == "Retrieved at 01:00:00. Duration 60 min. Due: 3.00.");

  sim.push(3700s, PaymentEvent{ TicketId{ 1 }, "" });
  sim.run_to_completion();
  CHECK(t.phase == TicketPhase::closed);
  CHECK_FALSE(sim.controller().fleet().belt(BeltId::exit()).load.has_value());
  CHECK(sim.controller().flow().exited == 1);
  CHECK(sim.violations().empty());
}

TEST_CASE("entrance rejections")
{
  Engine engine;
  Controller c(engine, SimulationConfig{});
  const auto too_long = c.handle_arrival(car(1, 5001));
  CHECK(too_long.kind == ArrivalOutcome::Kind::rejected);
  CHECK(too_long.reason == RejectReason::too_long);

  const auto ok = c.handle_arrival(car(2, 5000));
  CHECK(ok.kind == ArrivalOutcome::Kind::accepted);
  CHECK(ok.ticket == TicketId{ 1 });

  auto same_phone = car(3);
  same_phone.phone = car(2).phone;
  CHECK(c.handle_arrival(same_phone).kind == ArrivalOutcome::Kind::queued);
  CHECK(c.queued_arrivals() == 1);

  const auto bad = c.handle_arrival(Vehicle{ "CAR-9", 4000, "nope" });
  CHECK(bad.reason == RejectReason::invalid_vehicle);
}

TEST_CASE("a full garage turns cars away")
{
  SimulationConfig config;
  config.garage.floors = 1;
  config.garage.slots_per_floor = 1;
  Simulation sim(config);
  sim.push(0ms, ArrivalEvent{ car(1) });
  sim.push(100s, ArrivalEvent{ car(2) });
  sim.run_to_completion();
  REQUIRE(sim.controller().rejections().size() == 1);
  CHECK(sim.controller().rejections()[0].reason == RejectReason::no_vacancy);
  CHECK(sim.controller().rejections()[0].vehicle_id == "CAR-2");
}

TEST_CASE("queued duplicate phone is rejected once the lane frees")
{
  Simulation sim(SimulationConfig{});
  auto twin = car(2);
  twin.phone = car(1).phone;
  sim.push(0ms, ArrivalEvent{ car(1) });
  sim.push(1s, ArrivalEvent{ twin });
  sim.run_to_completion();
  REQUIRE(sim.controller().rejections().size() == 1);
  CHECK(sim.controller().rejections()[0].reason == RejectReason::duplicate_phone);
  CHECK(sim.controller().rejections()[0].at == 19s);
}

TEST_CASE("retrieval requests that cannot start")
{
  Engine engine;
  Controller c(engine, SimulationConfig{});
  CHECK(c.handle_retrieval_request("+1999", 0ms) == RetrievalResult::unknown_phone);
  (void)c.handle_arrival(car(1));
  CHECK(c.handle_retrieval_request(car(1).phone, 0ms) == RetrievalResult::not_parked);
  CHECK(c.handle_payment(TicketId{ 1 }) == PaymentResult::wrong_phase);
  CHECK(c.handle_payment(TicketId{ 5 }) == PaymentResult::unknown_ticket);
}

TEST_CASE("a belt fault halts new actions until cleared")
{
  SimulationConfig config;
  Simulation sim(config);
  sim.push(0ms, ArrivalEvent{ car(1) });
  sim.push(5s, BeltFaultEvent{ BeltId::platform() });
  sim.push(6s, ArrivalEvent{ car(2) });
  sim.push(40s, FaultClearedEvent{});
  sim.run_until(39s);
  CHECK(sim.controller().mode() == Mode::halted);
  // the entrance belt started at 2 s finishes; nothing new starts
  const auto acts = lines_with(sim.trace(), "act ");
  REQUIRE_FALSE(acts.empty());
  CHECK(acts.back().find("t=2000 ") != std::string::npos);
  REQUIRE(sim.controller().rejections().size() == 1);
  CHECK(sim.controller().rejections()[0].reason == RejectReason::halted);

  sim.run_to_completion();
  CHECK(sim.controller().mode() == Mode::normal);
  CHECK(sim.controller().garage().tickets.at(TicketId{ 1 }).phase == TicketPhase::parked);
  // resumes at the clearance instant
  CHECK(sim.controller().records().at(TicketId{ 1 }).park_complete == 40s + 2s + 5s + 5s);
  CHECK(sim.violations().empty());
}

TEST_CASE("concurrent work stays inside the relay budget")
{
  SimulationConfig config;
  config.auto_pay_s = 10.0;
  Simulation sim(config);
  for (int i = 0; i < 8; ++i) {
    sim.push(SimTime{ i * 1000 }, ArrivalEvent{ car(i + 1) });
  }
  for (int i = 0; i < 8; ++i) {
    sim.push(SimTime{ 600000 + i * 500 }, InboundSmsEvent{ car(i + 1).phone, "out" });
  }
  sim.run_to_completion();
  CHECK(sim.controller().fleet().relays().max_concurrent() == 2);
  CHECK(sim.controller().flow().exited == 8);
  for (const auto& [id, rec] : sim.controller().records()) {
    CHECK(rec.delivered_vehicle == rec.vehicle_id);
  }
  CHECK(sim.violations().empty());
}

TEST_CASE("config validation")
{
  SimulationConfig c;
  c.fleet.relay_budget = 1;
  CHECK_THROWS_AS(validate(c), Error);
  c = SimulationConfig{};
  c.sms.poll_interval_s = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = SimulationConfig{};
  c.sms.drop_probability = 2;
  CHECK_THROWS_AS(validate(c), Error);
  CHECK_NOTHROW(validate(SimulationConfig{}));
}

TEST_CASE("random runs keep every invariant")
{
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const auto r = run_scenario(random_scenario(seed));
    INFO("seed " << seed);
    REQUIRE(r.violations.empty());
    REQUIRE(r.report.aggregates.max_concurrent_motors <= 2);
  }
}
