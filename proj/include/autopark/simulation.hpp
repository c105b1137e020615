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


#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "autopark/controller.hpp"
#include "autopark/report.hpp"
#include "autopark/scenario.hpp"
#include "autopark/sim_engine.hpp"

namespace autopark {

/// Engine plus controller, driven by external events.
class Simulation
{
public:
  explicit Simulation(const SimulationConfig& config);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Throws SchedulingInPast.
  void push(SimTime at, EventPayload payload);
  /// Dispatches everything due up to `t_end`; the clock ends at `t_end`.
  void run_until(SimTime t_end);
  /// Dispatches until the queue is empty.
  void run_to_completion();

  [[nodiscard]] SimTime now() const { return m_engine.now(); }
  [[nodiscard]] const Engine& engine() const { return m_engine; }
  [[nodiscard]] const Controller& controller() const { return m_controller; }
  Controller& controller() { return m_controller; }
  [[nodiscard]] RunReport report() const { return build_report(m_controller); }
  [[nodiscard]] std::string trace() const { return m_engine.trace().text(); }
  [[nodiscard]] const std::vector<std::string>& violations() const { return m_controller.violations(); }

private:
  void dispatch(const SimEvent& event);

  Engine m_engine;
  Controller m_controller;
};

struct RunResult
{
  RunReport report;
  std::string trace;
  std::vector<std::string> violations;
};

/// Deterministic full run. Domain rejections show up in the report; broken
/// invariants and internal errors land in `violations`.
RunResult run_scenario(const Scenario& scenario);

struct SelfCheckResult
{
  std::size_t scenarios = 0;
  std::size_t failures = 0;
  std::vector<std::string> messages;
};

/// Built-in corpus plus `random_count` seeded random scenarios.
SelfCheckResult self_check(std::uint64_t seed, std::size_t random_count);

}  // namespace autopark
