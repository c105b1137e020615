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


#include "autopark/simulation.hpp"

#include <fmt/format.h>

namespace autopark {

Simulation::Simulation(const SimulationConfig& config)
  : m_controller(m_engine, config)
{
}

void Simulation::push(SimTime at, EventPayload payload)
{
  m_engine.schedule(at, std::move(payload));
}

void Simulation::dispatch(const SimEvent& event)
{
  try {
    m_controller.dispatch(event);
  } catch (const std::exception& e) {
    m_controller.violation(fmt::format("event seq={} raised: {}", event.seq, e.what()));
  }
}

void Simulation::run_until(SimTime t_end)
{
  m_engine.run_until(t_end, [this](const SimEvent& e) { dispatch(e); });
  m_controller.settle(m_engine.now());
}

void Simulation::run_to_completion()
{
  while (m_engine.step([this](const SimEvent& e) { dispatch(e); })) {
  }
  m_controller.settle(m_engine.now());
}

RunResult run_scenario(const Scenario& scenario)
{
  Simulation sim(scenario.config);
  for (const auto& ev : scenario.events) {
    sim.push(ev.at, ev.payload);
  }
  sim.run_to_completion();
  return { sim.report(), sim.trace(), sim.violations() };
}

namespace {

std::size_t count_external_dispatches(const std::string& trace)
{
  static const char* const kinds[] = { "kind=Arrival ",         "kind=InboundSms ", "kind=PaymentConfirmed ",
                                       "kind=IrradianceChange ", "kind=BeltFault ",  "kind=FaultCleared " };
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < trace.size()) {
    auto nl = trace.find('\n', pos);
    if (nl == std::string::npos) nl = trace.size();
    const std::string_view line(trace.data() + pos, nl - pos);
    if (line.starts_with("t=")) {
      for (const char* k : kinds) {
        if (line.find(k) != std::string_view::npos) {
          ++n;
          break;
        }
      }
    }
    pos = nl + 1;
  }
  return n;
}

void check_one(const std::string& name, const Scenario& scenario, SelfCheckResult& out)
{
  ++out.scenarios;
  RunResult r;
  try {
    r = run_scenario(scenario);
  } catch (const std::exception& e) {
    ++out.failures;
    out.messages.push_back(fmt::format("{}: {}", name, e.what()));
    return;
  }
  std::vector<std::string> problems = r.violations;
  if (r.report.aggregates.max_concurrent_motors > scenario.config.fleet.relay_budget) {
    problems.push_back(fmt::format("{} motors ran at once", r.report.aggregates.max_concurrent_motors));
  }
  // automatic payments are dispatched like scenario payments
  std::size_t expected = scenario.events.size();
  if (scenario.config.auto_pay_s) {
    for (const auto& row : r.report.rows) {
      if (row.amount) ++expected;
    }
  }
  const auto dispatched = count_external_dispatches(r.trace);
  if (dispatched != expected) {
    problems.push_back(fmt::format("{} scenario events expected but {} dispatched", expected, dispatched));
  }
  for (const auto& row : r.report.rows) {
    if ((row.parking_latency_s && *row.parking_latency_s < 0) ||
        (row.retrieval_latency_s && *row.retrieval_latency_s < 0)) {
      problems.push_back(fmt::format("negative latency for {}", row.vehicle_id));
    }
  }
  if (!problems.empty()) {
    ++out.failures;
    for (const auto& p : problems) {
      out.messages.push_back(fmt::format("{}: {}", name, p));
    }
  }
}

}  // namespace

SelfCheckResult self_check(std::uint64_t seed, std::size_t random_count)
{
  SelfCheckResult out;
  for (const auto& named : builtin_corpus()) {
    try {
      check_one(named.name, parse_scenario(named.text), out);
    } catch (const std::exception& e) {
      ++out.scenarios;
      ++out.failures;
      out.messages.push_back(fmt::format("{}: {}", named.name, e.what()));
    }
  }
  for (std::size_t i = 0; i < random_count; ++i) {
    const auto s = seed + i;
    check_one(fmt::format("random seed={}", s), random_scenario(s), out);
  }
  return out;
}

}  // namespace autopark
