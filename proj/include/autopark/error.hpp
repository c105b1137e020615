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

#include <stdexcept>
#include <string>
#include <string_view>

namespace autopark {

/// Contract violations raised by the core. Domain outcomes that a scenario
/// can legitimately produce (a rejected arrival, an unknown phone) are
/// returned as values instead.
enum class ErrorCode
{
  invalid_config,
  invalid_vehicle,
  scheduling_in_past,
  non_integral_steps,
  power_budget_exceeded,
  motor_already_powered,
  power_not_granted,
  belt_busy,
  belt_faulted,
  platform_busy,
  gate_busy,
  unknown_action,
  negative_duration,
  invalid_number,
  unparseable_line,
  not_registered,
  body_too_long,
  modem_error,
  missing_field,
  parse_error,
  unsorted_events,
  internal,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what)
    , m_code(code)
  {
  }

  [[nodiscard]] ErrorCode code() const noexcept { return m_code; }

private:
  ErrorCode m_code;
};

}  // namespace autopark
