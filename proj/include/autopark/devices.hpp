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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "autopark/core_model.hpp"

namespace autopark {

struct StepperSpec
{
  double step_angle_deg = 1.8;
  double step_rate_hz = 100.0;
  double rated_power_w = 10.0;
};

/// Exact number of steps to travel `angle_deg`. Throws NonIntegralSteps when
/// the angle is not a whole multiple of the step angle (1e-9 tolerance).
std::int64_t steps_for_angle(double angle_deg, double step_angle_deg);

/// steps / step_rate_hz, rounded to the nearest millisecond.
SimTime move_duration(std::int64_t steps, double step_rate_hz);

struct LengthSensorReading
{
  bool front = false;
  bool middle = false;
  bool rear = false;

  [[nodiscard]] bool all_tripped() const { return front && middle && rear; }
  bool operator==(const LengthSensorReading&) const = default;
};

/// Three presence sensors at 0, max/2 and max along the entrance bay. A
/// sensor trips when the vehicle footprint [0, length) covers it, so all
/// three trip exactly when the vehicle is longer than the limit.
LengthSensorReading read_length_sensors(std::int64_t vehicle_length_mm,
                                        std::int64_t max_vehicle_length_mm);

enum class BeltRole
{
  entrance,
  exit,
  platform,
  slot,
};

struct BeltId
{
  BeltRole role = BeltRole::entrance;
  int face = 0;  // only meaningful for slot belts

  static BeltId entrance() { return { BeltRole::entrance, 0 }; }
  static BeltId exit() { return { BeltRole::exit, 0 }; }
  static BeltId platform() { return { BeltRole::platform, 0 }; }
  static BeltId slot(int face) { return { BeltRole::slot, face }; }

  [[nodiscard]] std::string to_string() const;
  /// "entrance", "exit", "platform" or "slot<k>".
  static std::optional<BeltId> parse(std::string_view text);

  auto operator<=>(const BeltId&) const = default;
};

/// Entrance, exit and platform belts plus one belt per slot face.
std::vector<BeltId> belt_layout(int slots_per_floor);

enum class MotorKind
{
  belt,
  elevator,
  rotor,
};

struct MotorId
{
  MotorKind kind = MotorKind::belt;
  BeltId belt{};
  int index = 0;

  static MotorId for_belt(BeltId b) { return { MotorKind::belt, b, 0 }; }
  static MotorId elevator() { return { MotorKind::elevator, {}, 0 }; }
  static MotorId rotor(int i) { return { MotorKind::rotor, {}, i }; }

  [[nodiscard]] std::string to_string() const;
  auto operator<=>(const MotorId&) const = default;
};

struct LoadRecord
{
  SimTime at{};
  MotorId motor{};
  bool powered = false;
};

/// Relay switch layer. At most `budget` motor drivers are energized at once.
class RelayBank
{
public:
  explicit RelayBank(std::size_t budget = 2)
    : m_budget(budget)
  {
  }

  /// Throws PowerBudgetExceeded when full, MotorAlreadyPowered on a repeat.
  void request_power(MotorId motor, SimTime now);
  void release(MotorId motor, SimTime now);

  [[nodiscard]] bool is_powered(const MotorId& motor) const { return m_powered.contains(motor); }
  [[nodiscard]] std::size_t powered_count() const { return m_powered.size(); }
  [[nodiscard]] std::size_t free_slots() const { return m_budget - m_powered.size(); }
  [[nodiscard]] std::size_t budget() const { return m_budget; }
  [[nodiscard]] std::size_t max_concurrent() const { return m_max_concurrent; }
  [[nodiscard]] const std::set<MotorId>& powered() const { return m_powered; }
  [[nodiscard]] const std::vector<LoadRecord>& ledger() const { return m_ledger; }

private:
  std::size_t m_budget;
  std::set<MotorId> m_powered;
  std::size_t m_max_concurrent = 0;
  std::vector<LoadRecord> m_ledger;
};

enum class GateWhich
{
  entrance,
  exit,
};

enum class GateCommand
{
  open,
  close,
};

struct GateState
{
  GateWhich which = GateWhich::entrance;
  double angle_deg = 0.0;  // 0 closed, 90 open
  std::optional<std::uint64_t> moving;
};

struct PlatformState
{
  int floor = 0;
  int slot_index = 0;  // angular position in slot units
  std::optional<std::uint64_t> busy;

  [[nodiscard]] double angle_deg(int slots_per_floor) const
  {
    return 360.0 * slot_index / slots_per_floor;
  }
};

struct BeltState
{
  BeltId id{};
  std::optional<std::uint64_t> busy;
  bool faulted = false;
  std::optional<std::string> load;  // vehicle currently on the belt
};

enum class RotationDirection
{
  none,
  clockwise,
  counter_clockwise,
};

/// Vehicle hand-offs between belts and bays, each running two belts for
/// the platform load time.
enum class TransferKind
{
  load_platform,       // entrance belt -> platform
  to_slot,             // platform -> bay at platform position
  from_slot,           // bay at platform position -> platform
  unload_to_exit,      // platform -> exit belt
};

std::string_view to_string(TransferKind kind) noexcept;

struct ConveyRequest
{
  BeltId belt{};
  std::string vehicle;
};
struct ElevateRequest
{
  int floor = 0;
};
struct RotateRequest
{
  int slot = 0;
};
struct GateRequest
{
  GateWhich which = GateWhich::entrance;
  GateCommand command = GateCommand::open;
};
struct TransferRequest
{
  TransferKind kind = TransferKind::load_platform;
};

using ActionRequest = std::variant<ConveyRequest, ElevateRequest, RotateRequest, GateRequest, TransferRequest>;

struct DeviceAction
{
  std::uint64_t id = 0;
  std::string device;  // e.g. "belt:entrance", "platform", "gate:exit"
  ActionRequest request;
  SimTime started{};
  SimTime done_at{};
  std::vector<MotorId> motors;
  std::int64_t steps = 0;
  RotationDirection direction = RotationDirection::none;
};

struct FleetConfig
{
  std::size_t relay_budget = 2;
  double motor_power_w = 10.0;
};

/// Simulated hardware. Passive state: actions are started with a completion
/// time and finished explicitly by whoever owns the clock.
class DeviceFleet
{
public:
  DeviceFleet(const GarageConfig& garage, FleetConfig fleet = {});

  /// Motors that must be powered before `start(request)`. Empty for gates
  /// (5 V logic supply) and for zero-travel moves.
  [[nodiscard]] std::vector<MotorId> motors_needed(const ActionRequest& request) const;

  /// Starts an action. Throws BeltBusy / BeltFaulted / PlatformBusy /
  /// GateBusy / PowerNotGranted on violated preconditions.
  DeviceAction start(const ActionRequest& request, SimTime now);

  /// Finishes an in-flight action: applies its effect and releases its
  /// motors. Throws UnknownAction for ids that are not in flight.
  DeviceAction complete(std::uint64_t action_id, SimTime now);

  DeviceAction belt_start_convey(BeltId belt, const std::string& vehicle, SimTime now)
  {
    return start(ConveyRequest{ belt, vehicle }, now);
  }
  DeviceAction elevator_goto_floor(int floor, SimTime now) { return start(ElevateRequest{ floor }, now); }
  DeviceAction platform_rotate_to_slot(int slot, SimTime now) { return start(RotateRequest{ slot }, now); }
  DeviceAction gate_actuate(GateWhich which, GateCommand command, SimTime now)
  {
    return start(GateRequest{ which, command }, now);
  }

  /// The vehicle leaves the belt (driven off at the exit).
  std::optional<std::string> discharge(BeltId belt);

  void set_belt_fault(BeltId belt);
  void clear_faults();
  [[nodiscard]] bool any_fault() const;

  RelayBank& relays() { return m_relays; }
  [[nodiscard]] const RelayBank& relays() const { return m_relays; }
  [[nodiscard]] const PlatformState& platform() const { return m_platform; }
  [[nodiscard]] const GateState& gate(GateWhich which) const;
  [[nodiscard]] const BeltState& belt(BeltId id) const;
  [[nodiscard]] const std::map<BeltId, BeltState>& belts() const { return m_belts; }
  [[nodiscard]] const Grid<std::optional<std::string>>& bays() const { return m_bays; }
  [[nodiscard]] const std::map<std::uint64_t, DeviceAction>& in_flight() const { return m_in_flight; }
  [[nodiscard]] const StepperSpec& main_stepper() const { return m_main; }
  [[nodiscard]] const StepperSpec& gate_stepper() const { return m_gate; }
  [[nodiscard]] double motor_power_w() const { return m_fleet.motor_power_w; }

  /// Every vehicle the fleet is physically holding, with its location.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> vehicle_locations() const;

private:
  BeltState& belt_mut(BeltId id);
  GateState& gate_mut(GateWhich which);
  void require_belt_ready(const BeltState& belt) const;
  void require_platform_idle() const;
  void require_powered(const std::vector<MotorId>& motors) const;
  [[nodiscard]] std::int64_t rotor_position_steps(int slot_index) const;

  GarageConfig m_garage;
  FleetConfig m_fleet;
  StepperSpec m_main;
  StepperSpec m_gate;
  RelayBank m_relays;
  PlatformState m_platform;
  GateState m_entrance_gate{ GateWhich::entrance, 0.0, std::nullopt };
  GateState m_exit_gate{ GateWhich::exit, 0.0, std::nullopt };
  std::map<BeltId, BeltState> m_belts;
  Grid<std::optional<std::string>> m_bays;
  std::map<std::uint64_t, DeviceAction> m_in_flight;
  std::uint64_t m_next_action = 1;
};

}  // namespace autopark
