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

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autopark/error.hpp"

namespace autopark {

/// Simulated time since the start of a run. Integral milliseconds so that
/// billing never accumulates float drift.
using SimTime = std::chrono::milliseconds;

/// Seconds (as configured) to simulated milliseconds, rounded to nearest.
SimTime from_seconds(double seconds);
double to_seconds(SimTime t);

/// Renders a timestamp as HH:MM:SS. Hours are not wrapped at 24.
std::string format_clock(SimTime t);

struct TicketId
{
  std::uint64_t value = 0;
  auto operator<=>(const TicketId&) const = default;
};

/// Currency in millionths of a unit.
struct Money
{
  std::int64_t micros = 0;

  static Money from_units(double units);
  [[nodiscard]] double units() const { return static_cast<double>(micros) / 1e6; }
  /// Two decimals, half away from zero.
  [[nodiscard]] std::string to_string() const;

  auto operator<=>(const Money&) const = default;
};

struct KinematicsConfig
{
  double belt_transit_s = 10.0;
  double platform_load_s = 5.0;
  double elevation_per_floor_s = 8.0;
  double rotation_per_slot_s = 3.0;
  double gate_actuation_s = 2.0;
  double step_angle_main_deg = 1.8;
  double step_angle_gate_deg = 7.5;
};

struct GarageConfig
{
  int floors = 3;
  int slots_per_floor = 6;
  std::int64_t max_vehicle_length_mm = 5000;
  double billing_rate_per_minute = 0.05;
  KinematicsConfig kinematics{};
  double bus_voltage_v = 12.0;
};

/// Throws Error(invalid_config) naming the first violated constraint.
void validate(const GarageConfig& config);

struct Vehicle
{
  std::string vehicle_id;
  std::int64_t length_mm = 0;
  std::string phone;
};

/// Digits with an optional leading '+', at least one digit.
bool is_valid_phone(std::string_view phone) noexcept;
void validate(const Vehicle& vehicle);

struct SlotAddress
{
  int floor = 0;
  int slot = 0;
  auto operator<=>(const SlotAddress&) const = default;
};

enum class SlotStatus
{
  vacant,
  reserved,
  occupied,
};

struct SlotState
{
  SlotStatus status = SlotStatus::vacant;
  TicketId ticket{};

  static SlotState vacant() { return {}; }
  static SlotState reserved(TicketId id) { return { SlotStatus::reserved, id }; }
  static SlotState occupied(TicketId id) { return { SlotStatus::occupied, id }; }
  bool operator==(const SlotState&) const = default;
};

/// Row-major floors x slots grid.
template<class T>
class Grid
{
public:
  Grid() = default;
  Grid(int floors, int slots_per_floor, const T& fill = T{})
    : m_floors(floors)
    , m_slots(slots_per_floor)
    , m_cells(static_cast<std::size_t>(floors) * static_cast<std::size_t>(slots_per_floor), fill)
  {
  }

  [[nodiscard]] int floors() const { return m_floors; }
  [[nodiscard]] int slots_per_floor() const { return m_slots; }
  [[nodiscard]] std::size_t size() const { return m_cells.size(); }

  [[nodiscard]] bool contains(SlotAddress a) const
  {
    return a.floor >= 0 && a.floor < m_floors && a.slot >= 0 && a.slot < m_slots;
  }

  T& at(SlotAddress a) { return m_cells.at(index(a)); }
  const T& at(SlotAddress a) const { return m_cells.at(index(a)); }

  [[nodiscard]] SlotAddress address(std::size_t i) const
  {
    return { static_cast<int>(i / static_cast<std::size_t>(m_slots)),
             static_cast<int>(i % static_cast<std::size_t>(m_slots)) };
  }

  auto begin() { return m_cells.begin(); }
  auto end() { return m_cells.end(); }
  auto begin() const { return m_cells.begin(); }
  auto end() const { return m_cells.end(); }

private:
  std::size_t index(SlotAddress a) const
  {
    if (!contains(a)) {
      throw Error(ErrorCode::internal, "slot address out of range");
    }
    return static_cast<std::size_t>(a.floor) * static_cast<std::size_t>(m_slots) +
           static_cast<std::size_t>(a.slot);
  }

  int m_floors = 0;
  int m_slots = 0;
  std::vector<T> m_cells;
};

using SlotMatrix = Grid<SlotState>;
using TimerMatrix = Grid<std::optional<SimTime>>;

enum class TicketPhase
{
  awaiting_entry,
  parking,
  parked,
  retrieving,
  awaiting_payment,
  closed,
};

std::string_view to_string(TicketPhase phase) noexcept;

struct ParkingTicket
{
  TicketId id{};
  Vehicle vehicle;
  SlotAddress slot{};
  SimTime entry_time{};
  std::optional<SimTime> exit_time;
  TicketPhase phase = TicketPhase::awaiting_entry;
  std::optional<Money> amount_due;

  /// Moves to the next phase in lifecycle order; anything else is an error.
  void advance_to(TicketPhase next);
};

/// Started minutes of a stay: ceil(duration / 60 s). Throws NegativeDuration.
std::int64_t billed_minutes(SimTime entry, SimTime exit);

/// billed_minutes x rate.
Money compute_bill(SimTime entry, SimTime exit, Money rate_per_minute);

struct GarageState
{
  GarageConfig config;
  SlotMatrix slots;
  TimerMatrix timers;
  std::map<TicketId, ParkingTicket> tickets;
  std::uint64_t next_ticket = 1;
};

GarageState new_garage(const GarageConfig& config);

struct Occupancy
{
  std::size_t occupied = 0;
  std::size_t reserved = 0;
  std::size_t vacant = 0;
};

Occupancy occupancy_count(const GarageState& state);

}  // namespace autopark
