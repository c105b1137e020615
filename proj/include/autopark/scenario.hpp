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
#include <string_view>
#include <vector>

#include "autopark/controller.hpp"
#include "autopark/sim_engine.hpp"

namespace autopark {

/// Scenario text format, one record per line:
///
///   # comment
///   config floors=3 slots_per_floor=6
///   t=0 kind=arrival vehicle=CAR-1 length_mm=4200 phone=+15550001
///   t=600 kind=sms_in phone=+15550001 body="retrieve"
///   t=700 kind=payment vehicle=CAR-1
///
/// Times are seconds (decimals allowed). Values may be double-quoted;
/// inside quotes \" and \\ are escapes. config lines precede all events.

class ParseError : public Error
{
public:
  ParseError(std::size_t line, std::string reason);

  [[nodiscard]] std::size_t line() const { return m_line; }
  [[nodiscard]] const std::string& reason() const { return m_reason; }

private:
  std::size_t m_line;
  std::string m_reason;
};

struct ScenarioEvent
{
  SimTime at{};
  EventPayload payload;
  std::size_t line = 0;
};

struct Scenario
{
  SimulationConfig config{};
  std::vector<ScenarioEvent> events;
};

/// Throws ParseError, or Error(unsorted_events) when times decrease.
Scenario parse_scenario(std::string_view text);

/// One event record. `t=` may be omitted, in which case `default_time` is
/// used. Throws ParseError (reported against `line`).
ScenarioEvent parse_event_line(std::string_view text, SimTime default_time, std::size_t line = 1);

/// Applies one `key=value` override. Throws ParseError on unknown keys or
/// bad numbers; the caller validates the finished config.
void apply_config(SimulationConfig& config, std::string_view key, std::string_view value, std::size_t line = 0);

/// Applies every `key=value` pair of a config file (one or more per line,
/// `config` prefix optional) and validates the result.
SimulationConfig parse_config(std::string_view text);

/// Inverse of parse_scenario for the events a scenario may carry.
std::string format_scenario(const Scenario& scenario);

struct RandomScenarioOptions
{
  std::size_t max_vehicles = 18;
  double arrival_window_s = 900.0;
  double too_long_fraction = 0.1;
  double retrieve_fraction = 0.8;
  double fault_probability = 0.3;
};

/// Seeded generator for property runs. Bills are paid automatically.
Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& options = {});

/// Hand-written scenarios exercising the main paths.
struct NamedScenario
{
  std::string name;
  std::string text;
};
const std::vector<NamedScenario>& builtin_corpus();

}  // namespace autopark
