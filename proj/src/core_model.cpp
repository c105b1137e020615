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

#include "autopark/core_model.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "autopark/devices.hpp"

namespace autopark {

std::string_view to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::invalid_vehicle: return "InvalidVehicle";
    case ErrorCode::scheduling_in_past: return "SchedulingInPast";
    case ErrorCode::non_integral_steps: return "NonIntegralSteps";
    case ErrorCode::power_budget_exceeded: return "PowerBudgetExceeded";
    case ErrorCode::motor_already_powered: return "MotorAlreadyPowered";
    case ErrorCode::power_not_granted: return "PowerNotGranted";
    case ErrorCode::belt_busy: return "BeltBusy";
    case ErrorCode::belt_faulted: return "BeltFaulted";
    case ErrorCode::platform_busy: return "PlatformBusy";
    case ErrorCode::gate_busy: return "GateBusy";
    case ErrorCode::unknown_action: return "UnknownAction";
    case ErrorCode::negative_duration: return "NegativeDuration";
    case ErrorCode::invalid_number: return "InvalidNumber";
    case ErrorCode::unparseable_line: return "UnparseableLine";
    case ErrorCode::not_registered: return "NotRegistered";
    case ErrorCode::body_too_long: return "BodyTooLong";
    case ErrorCode::modem_error: return "ModemError";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::unsorted_events: return "UnsortedEvents";
    case ErrorCode::internal: return "Internal";
  }
  return "Unknown";
}

SimTime from_seconds(double seconds)
{
  return SimTime{ std::llround(seconds * 1000.0) };
}

double to_seconds(SimTime t)
{
  return static_cast<double>(t.count()) / 1000.0;
}

std::string format_clock(SimTime t)
{
  const auto total_s = t.count() / 1000;
  return fmt::format("{:02}:{:02}:{:02}", total_s / 3600, (total_s / 60) % 60, total_s % 60);
}

Money Money::from_units(double units)
{
  return Money{ std::llround(units * 1e6) };
}

std::string Money::to_string() const
{
  // micros -> cents, rounding half away from zero
  const std::int64_t sign = micros < 0 ? -1 : 1;
  const std::int64_t mag = std::llabs(micros);
  const std::int64_t cents = (mag + 5000) / 10000;
  return fmt::format("{}{}.{:02}", sign < 0 ? "-" : "", cents / 100, cents % 100);
}

namespace {

void require(bool ok, const char* what)
{
  if (!ok) {
    throw Error(ErrorCode::invalid_config, what);
  }
}

bool divides(double travel_deg, double step_deg)
{
  try {
    (void)steps_for_angle(travel_deg, step_deg);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

void validate(const GarageConfig& config)
{
  require(config.floors >= 1, "floors must be >= 1");
  require(config.slots_per_floor >= 1, "slots_per_floor must be >= 1");
  require(config.max_vehicle_length_mm > 0, "max_vehicle_length_mm must be > 0");
  require(config.billing_rate_per_minute >= 0.0, "billing_rate_per_minute must be >= 0");
  require(config.bus_voltage_v > 0.0, "bus_voltage_v must be > 0");

  const auto& k = config.kinematics;
  require(k.belt_transit_s > 0.0, "belt_transit_s must be > 0");
  require(k.platform_load_s > 0.0, "platform_load_s must be > 0");
  require(k.elevation_per_floor_s > 0.0, "elevation_per_floor_s must be > 0");
  require(k.rotation_per_slot_s > 0.0, "rotation_per_slot_s must be > 0");
  require(k.gate_actuation_s > 0.0, "gate_actuation_s must be > 0");
  require(k.step_angle_main_deg > 0.0, "step_angle_main_deg must be > 0");
  require(k.step_angle_gate_deg > 0.0, "step_angle_gate_deg must be > 0");
  require(divides(90.0, k.step_angle_gate_deg), "gate step angle must divide 90 degrees");
  // Per-slot travel (60 deg at 1.8 deg/step) is not integral; the platform
  // positions against a whole-revolution step count instead.
  require(divides(360.0, k.step_angle_main_deg), "main step angle must divide 360 degrees");
}

bool is_valid_phone(std::string_view phone) noexcept
{
  if (!phone.empty() && phone.front() == '+') {
    phone.remove_prefix(1);
  }
  if (phone.empty()) {
    return false;
  }
  for (char c : phone) {
    if (c < '0' || c > '9') {
      return false;
    }
  }
  return true;
}

void validate(const Vehicle& vehicle)
{
  if (vehicle.vehicle_id.empty()) {
    throw Error(ErrorCode::invalid_vehicle, "vehicle_id is empty");
  }
  if (vehicle.length_mm <= 0) {
    throw Error(ErrorCode::invalid_vehicle, "length_mm must be > 0");
  }
  if (!is_valid_phone(vehicle.phone)) {
    throw Error(ErrorCode::invalid_vehicle, "phone '" + vehicle.phone + "' is not a digit string");
  }
}

std::string_view to_string(TicketPhase phase) noexcept
{
  switch (phase) {
    case TicketPhase::awaiting_entry: return "AwaitingEntry";
    case TicketPhase::parking: return "Parking";
    case TicketPhase::parked: return "Parked";
    case TicketPhase::retrieving: return "Retrieving";
    case TicketPhase::awaiting_payment: return "AwaitingPayment";
    case TicketPhase::closed: return "Closed";
  }
  return "Unknown";
}

void ParkingTicket::advance_to(TicketPhase next)
{
  if (static_cast<int>(next) != static_cast<int>(phase) + 1) {
    throw Error(ErrorCode::internal,
                fmt::format("ticket {} cannot move {} -> {}", id.value, to_string(phase), to_string(next)));
  }
  phase = next;
}

std::int64_t billed_minutes(SimTime entry, SimTime exit)
{
  if (exit < entry) {
    throw Error(ErrorCode::negative_duration,
                fmt::format("exit {} ms precedes entry {} ms", exit.count(), entry.count()));
  }
  constexpr std::int64_t minute_ms = 60'000;
  return ((exit - entry).count() + minute_ms - 1) / minute_ms;
}

Money compute_bill(SimTime entry, SimTime exit, Money rate_per_minute)
{
  return Money{ billed_minutes(entry, exit) * rate_per_minute.micros };
}

GarageState new_garage(const GarageConfig& config)
{
  validate(config);
  GarageState state;
  state.config = config;
  state.slots = SlotMatrix(config.floors, config.slots_per_floor);
  state.timers = TimerMatrix(config.floors, config.slots_per_floor);
  return state;
}

Occupancy occupancy_count(const GarageState& state)
{
  Occupancy out;
  for (const auto& cell : state.slots) {
    switch (cell.status) {
      case SlotStatus::vacant: ++out.vacant; break;
      case SlotStatus::reserved: ++out.reserved; break;
      case SlotStatus::occupied: ++out.occupied; break;
    }
  }
  return out;
}

}  // namespace autopark
