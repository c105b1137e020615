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

#include "autopark/devices.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

namespace autopark {

std::int64_t steps_for_angle(double angle_deg, double step_angle_deg)
{
  if (!(step_angle_deg > 0.0) || angle_deg < 0.0) {
    throw Error(ErrorCode::non_integral_steps,
                fmt::format("bad step request: angle {} step {}", angle_deg, step_angle_deg));
  }
  const double ratio = angle_deg / step_angle_deg;
  const double whole = std::round(ratio);
  if (std::abs(ratio - whole) > 1e-9) {
    throw Error(ErrorCode::non_integral_steps,
                fmt::format("{} deg is not a whole number of {} deg steps", angle_deg, step_angle_deg));
  }
  return static_cast<std::int64_t>(whole);
}

SimTime move_duration(std::int64_t steps, double step_rate_hz)
{
  if (!(step_rate_hz > 0.0)) {
    throw Error(ErrorCode::internal, "step rate must be positive");
  }
  return SimTime{ std::llround(static_cast<double>(steps) * 1000.0 / step_rate_hz) };
}

LengthSensorReading read_length_sensors(std::int64_t vehicle_length_mm, std::int64_t max_vehicle_length_mm)
{
  // positions 0, max/2, max; compare doubled values to stay integral
  return LengthSensorReading{
    vehicle_length_mm > 0,
    2 * vehicle_length_mm > max_vehicle_length_mm,
    vehicle_length_mm > max_vehicle_length_mm,
  };
}

std::string BeltId::to_string() const
{
  switch (role) {
    case BeltRole::entrance: return "entrance";
    case BeltRole::exit: return "exit";
    case BeltRole::platform: return "platform";
    case BeltRole::slot: return fmt::format("slot{}", face);
  }
  return "unknown";
}

std::optional<BeltId> BeltId::parse(std::string_view text)
{
  if (text == "entrance") return entrance();
  if (text == "exit") return exit();
  if (text == "platform") return platform();
  if (text.starts_with("slot") && text.size() > 4) {
    int face = 0;
    for (char c : text.substr(4)) {
      if (c < '0' || c > '9') return std::nullopt;
      face = face * 10 + (c - '0');
      if (face > 100000) return std::nullopt;
    }
    return slot(face);
  }
  return std::nullopt;
}

std::vector<BeltId> belt_layout(int slots_per_floor)
{
  std::vector<BeltId> out{ BeltId::entrance(), BeltId::exit(), BeltId::platform() };
  for (int i = 0; i < slots_per_floor; ++i) {
    out.push_back(BeltId::slot(i));
  }
  return out;
}

std::string MotorId::to_string() const
{
  switch (kind) {
    case MotorKind::belt: return "belt:" + belt.to_string();
    case MotorKind::elevator: return "elevator";
    case MotorKind::rotor: return fmt::format("rotor:{}", index);
  }
  return "unknown";
}

void RelayBank::request_power(MotorId motor, SimTime now)
{
  if (m_powered.contains(motor)) {
    throw Error(ErrorCode::motor_already_powered, motor.to_string());
  }
  if (m_powered.size() >= m_budget) {
    throw Error(ErrorCode::power_budget_exceeded,
                fmt::format("{} requested with {} of {} relays closed", motor.to_string(), m_powered.size(), m_budget));
  }
  m_powered.insert(motor);
  m_max_concurrent = std::max(m_max_concurrent, m_powered.size());
  m_ledger.push_back({ now, motor, true });
}

void RelayBank::release(MotorId motor, SimTime now)
{
  if (m_powered.erase(motor) == 0) {
    throw Error(ErrorCode::power_not_granted, "release of unpowered " + motor.to_string());
  }
  m_ledger.push_back({ now, motor, false });
}

std::string_view to_string(TransferKind kind) noexcept
{
  switch (kind) {
    case TransferKind::load_platform: return "LoadPlatform";
    case TransferKind::to_slot: return "TransferToSlot";
    case TransferKind::from_slot: return "TransferFromSlot";
    case TransferKind::unload_to_exit: return "UnloadToExit";
  }
  return "Unknown";
}

DeviceFleet::DeviceFleet(const GarageConfig& garage, FleetConfig fleet)
  : m_garage(garage)
  , m_fleet(fleet)
  , m_relays(fleet.relay_budget)
  , m_bays(garage.floors, garage.slots_per_floor)
{
  validate(garage);
  const auto& k = garage.kinematics;
  const auto rev_steps = steps_for_angle(360.0, k.step_angle_main_deg);
  m_main = StepperSpec{ k.step_angle_main_deg,
                        static_cast<double>(rev_steps) / (garage.slots_per_floor * k.rotation_per_slot_s),
                        fleet.motor_power_w };
  const auto gate_steps = steps_for_angle(90.0, k.step_angle_gate_deg);
  m_gate = StepperSpec{ k.step_angle_gate_deg, static_cast<double>(gate_steps) / k.gate_actuation_s,
                        fleet.motor_power_w };
  for (const auto& id : belt_layout(garage.slots_per_floor)) {
    m_belts.emplace(id, BeltState{ id, std::nullopt, false, std::nullopt });
  }
}

const GateState& DeviceFleet::gate(GateWhich which) const
{
  return which == GateWhich::entrance ? m_entrance_gate : m_exit_gate;
}

GateState& DeviceFleet::gate_mut(GateWhich which)
{
  return which == GateWhich::entrance ? m_entrance_gate : m_exit_gate;
}

const BeltState& DeviceFleet::belt(BeltId id) const
{
  auto it = m_belts.find(id);
  if (it == m_belts.end()) {
    throw Error(ErrorCode::internal, "no such belt " + id.to_string());
  }
  return it->second;
}

BeltState& DeviceFleet::belt_mut(BeltId id)
{
  return const_cast<BeltState&>(std::as_const(*this).belt(id));
}

void DeviceFleet::require_belt_ready(const BeltState& b) const
{
  if (b.faulted) {
    throw Error(ErrorCode::belt_faulted, b.id.to_string());
  }
  if (b.busy) {
    throw Error(ErrorCode::belt_busy, b.id.to_string());
  }
}

void DeviceFleet::require_platform_idle() const
{
  if (m_platform.busy) {
    throw Error(ErrorCode::platform_busy, fmt::format("platform busy with action {}", *m_platform.busy));
  }
}

void DeviceFleet::require_powered(const std::vector<MotorId>& motors) const
{
  for (const auto& m : motors) {
    if (!m_relays.is_powered(m)) {
      throw Error(ErrorCode::power_not_granted, m.to_string());
    }
  }
}

std::int64_t DeviceFleet::rotor_position_steps(int slot_index) const
{
  const auto rev = steps_for_angle(360.0, m_main.step_angle_deg);
  return std::llround(static_cast<double>(rev) * slot_index / m_garage.slots_per_floor);
}

namespace {

struct RotationPlan
{
  int slots = 0;
  RotationDirection direction = RotationDirection::none;
};

RotationPlan plan_rotation(int from, int to, int slots_per_floor)
{
  const int forward = ((to - from) % slots_per_floor + slots_per_floor) % slots_per_floor;
  if (forward == 0) {
    return {};
  }
  // ties go clockwise
  if (2 * forward <= slots_per_floor) {
    return { forward, RotationDirection::clockwise };
  }
  return { slots_per_floor - forward, RotationDirection::counter_clockwise };
}

std::vector<MotorId> transfer_motors(TransferKind kind, int face)
{
  switch (kind) {
    case TransferKind::load_platform:
      return { MotorId::for_belt(BeltId::entrance()), MotorId::for_belt(BeltId::platform()) };
    case TransferKind::to_slot:
    case TransferKind::from_slot:
      return { MotorId::for_belt(BeltId::platform()), MotorId::for_belt(BeltId::slot(face)) };
    case TransferKind::unload_to_exit:
      return { MotorId::for_belt(BeltId::platform()), MotorId::for_belt(BeltId::exit()) };
  }
  return {};
}

}  // namespace

std::vector<MotorId> DeviceFleet::motors_needed(const ActionRequest& request) const
{
  return std::visit(
    [&](const auto& r) -> std::vector<MotorId> {
      using R = std::decay_t<decltype(r)>;
      if constexpr (std::is_same_v<R, ConveyRequest>) {
        return { MotorId::for_belt(r.belt) };
      } else if constexpr (std::is_same_v<R, ElevateRequest>) {
        if (r.floor == m_platform.floor) return {};
        return { MotorId::elevator() };
      } else if constexpr (std::is_same_v<R, RotateRequest>) {
        if (r.slot == m_platform.slot_index) return {};
        // the two hybrid motors under the upper platform are separate loads
        return { MotorId::rotor(0), MotorId::rotor(1) };
      } else if constexpr (std::is_same_v<R, GateRequest>) {
        return {};
      } else {
        return transfer_motors(r.kind, m_platform.slot_index);
      }
    },
    request);
}

DeviceAction DeviceFleet::start(const ActionRequest& request, SimTime now)
{
  const auto& k = m_garage.kinematics;
  DeviceAction action;
  action.request = request;
  action.started = now;
  action.motors = motors_needed(request);

  std::visit(
    [&](const auto& r) {
      using R = std::decay_t<decltype(r)>;
      if constexpr (std::is_same_v<R, ConveyRequest>) {
        auto& b = belt_mut(r.belt);
        require_belt_ready(b);
        if (b.load && *b.load != r.vehicle) {
          throw Error(ErrorCode::belt_busy, fmt::format("{} already carries {}", b.id.to_string(), *b.load));
        }
        require_powered(action.motors);
        action.device = "belt:" + b.id.to_string();
        action.done_at = now + from_seconds(k.belt_transit_s);
      } else if constexpr (std::is_same_v<R, ElevateRequest>) {
        require_platform_idle();
        if (r.floor < 0 || r.floor >= m_garage.floors) {
          throw Error(ErrorCode::internal, fmt::format("floor {} out of range", r.floor));
        }
        require_powered(action.motors);
        action.device = "platform";
        action.done_at = now + from_seconds(std::abs(r.floor - m_platform.floor) * k.elevation_per_floor_s);
      } else if constexpr (std::is_same_v<R, RotateRequest>) {
        require_platform_idle();
        if (r.slot < 0 || r.slot >= m_garage.slots_per_floor) {
          throw Error(ErrorCode::internal, fmt::format("slot {} out of range", r.slot));
        }
        require_powered(action.motors);
        const auto plan = plan_rotation(m_platform.slot_index, r.slot, m_garage.slots_per_floor);
        action.device = "platform";
        action.direction = plan.direction;
        const auto rev = steps_for_angle(360.0, m_main.step_angle_deg);
        const auto cw = ((rotor_position_steps(r.slot) - rotor_position_steps(m_platform.slot_index)) % rev + rev) % rev;
        action.steps = plan.direction == RotationDirection::counter_clockwise ? rev - cw : cw;
        action.done_at = now + from_seconds(plan.slots * k.rotation_per_slot_s);
      } else if constexpr (std::is_same_v<R, GateRequest>) {
        auto& g = gate_mut(r.which);
        if (g.moving) {
          throw Error(ErrorCode::gate_busy, r.which == GateWhich::entrance ? "entrance" : "exit");
        }
        const double target = r.command == GateCommand::open ? 90.0 : 0.0;
        action.device = r.which == GateWhich::entrance ? "gate:entrance" : "gate:exit";
        action.steps = steps_for_angle(std::abs(target - g.angle_deg), m_gate.step_angle_deg);
        action.done_at = now + move_duration(action.steps, m_gate.step_rate_hz);
      } else {
        require_platform_idle();
        const auto motors = transfer_motors(r.kind, m_platform.slot_index);
        for (const auto& m : motors) {
          require_belt_ready(belt(m.belt));
        }
        const SlotAddress bay{ m_platform.floor, m_platform.slot_index };
        auto& platform_belt = belt_mut(BeltId::platform());
        switch (r.kind) {
          case TransferKind::load_platform:
            if (m_platform.floor != 0 || m_platform.slot_index != 0 || !belt(BeltId::entrance()).load ||
                platform_belt.load) {
              throw Error(ErrorCode::internal, "LoadPlatform needs a loaded entrance belt and a home platform");
            }
            break;
          case TransferKind::to_slot:
            if (!platform_belt.load || m_bays.at(bay)) {
              throw Error(ErrorCode::internal, "TransferToSlot needs a loaded platform and an empty bay");
            }
            break;
          case TransferKind::from_slot:
            if (platform_belt.load || !m_bays.at(bay)) {
              throw Error(ErrorCode::internal, "TransferFromSlot needs an empty platform and a full bay");
            }
            break;
          case TransferKind::unload_to_exit:
            if (m_platform.floor != 0 || m_platform.slot_index != 0 || !platform_belt.load ||
                belt(BeltId::exit()).load) {
              throw Error(ErrorCode::internal, "UnloadToExit needs a loaded home platform and an empty exit belt");
            }
            break;
        }
        require_powered(action.motors);
        action.device = "platform";
        action.done_at = now + from_seconds(k.platform_load_s);
      }
    },
    request);

  action.id = m_next_action++;
  std::visit(
    [&](const auto& r) {
      using R = std::decay_t<decltype(r)>;
      if constexpr (std::is_same_v<R, ConveyRequest>) {
        auto& b = belt_mut(r.belt);
        b.busy = action.id;
        b.load = r.vehicle;
      } else if constexpr (std::is_same_v<R, GateRequest>) {
        gate_mut(r.which).moving = action.id;
      } else if constexpr (std::is_same_v<R, TransferRequest>) {
        m_platform.busy = action.id;
        for (const auto& m : action.motors) {
          belt_mut(m.belt).busy = action.id;
        }
      } else {
        m_platform.busy = action.id;
      }
    },
    request);
  m_in_flight.emplace(action.id, action);
  return action;
}

DeviceAction DeviceFleet::complete(std::uint64_t action_id, SimTime now)
{
  auto it = m_in_flight.find(action_id);
  if (it == m_in_flight.end()) {
    throw Error(ErrorCode::unknown_action, fmt::format("action {} is not in flight", action_id));
  }
  DeviceAction action = it->second;
  m_in_flight.erase(it);

  std::visit(
    [&](const auto& r) {
      using R = std::decay_t<decltype(r)>;
      if constexpr (std::is_same_v<R, ConveyRequest>) {
        belt_mut(r.belt).busy.reset();
      } else if constexpr (std::is_same_v<R, ElevateRequest>) {
        m_platform.floor = r.floor;
        m_platform.busy.reset();
      } else if constexpr (std::is_same_v<R, RotateRequest>) {
        m_platform.slot_index = r.slot;
        m_platform.busy.reset();
      } else if constexpr (std::is_same_v<R, GateRequest>) {
        auto& g = gate_mut(r.which);
        g.angle_deg = r.command == GateCommand::open ? 90.0 : 0.0;
        g.moving.reset();
      } else {
        const SlotAddress bay{ m_platform.floor, m_platform.slot_index };
        auto& platform_belt = belt_mut(BeltId::platform());
        switch (r.kind) {
          case TransferKind::load_platform:
            platform_belt.load = std::exchange(belt_mut(BeltId::entrance()).load, std::nullopt);
            break;
          case TransferKind::to_slot:
            m_bays.at(bay) = std::exchange(platform_belt.load, std::nullopt);
            break;
          case TransferKind::from_slot:
            platform_belt.load = std::exchange(m_bays.at(bay), std::nullopt);
            break;
          case TransferKind::unload_to_exit:
            belt_mut(BeltId::exit()).load = std::exchange(platform_belt.load, std::nullopt);
            break;
        }
        for (const auto& m : action.motors) {
          belt_mut(m.belt).busy.reset();
        }
        m_platform.busy.reset();
      }
    },
    action.request);

  for (const auto& m : action.motors) {
    m_relays.release(m, now);
  }
  return action;
}

std::optional<std::string> DeviceFleet::discharge(BeltId id)
{
  auto& b = belt_mut(id);
  if (b.busy) {
    throw Error(ErrorCode::belt_busy, id.to_string());
  }
  return std::exchange(b.load, std::nullopt);
}

void DeviceFleet::set_belt_fault(BeltId id)
{
  belt_mut(id).faulted = true;
}

void DeviceFleet::clear_faults()
{
  for (auto& [_, b] : m_belts) {
    b.faulted = false;
  }
}

bool DeviceFleet::any_fault() const
{
  for (const auto& [_, b] : m_belts) {
    if (b.faulted) return true;
  }
  return false;
}

std::vector<std::pair<std::string, std::string>> DeviceFleet::vehicle_locations() const
{
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [id, b] : m_belts) {
    if (b.load) {
      out.emplace_back(*b.load, "belt:" + id.to_string());
    }
  }
  for (std::size_t i = 0; i < m_bays.size(); ++i) {
    const auto a = m_bays.address(i);
    if (const auto& v = m_bays.at(a)) {
      out.emplace_back(*v, fmt::format("bay:{},{}", a.floor, a.slot));
    }
  }
  return out;
}

}  // namespace autopark
