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
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autopark/core_model.hpp"
#include "autopark/devices.hpp"
#include "autopark/power.hpp"
#include "autopark/sim_engine.hpp"
#include "autopark/sms_gateway.hpp"

namespace autopark {

struct SimulationConfig
{
  GarageConfig garage{};
  FleetConfig fleet{};
  SmsConfig sms{};
  PowerConfig power{};
  /// When set, every bill is paid this many seconds after it is sent.
  std::optional<double> auto_pay_s;
};

/// Throws InvalidConfig.
void validate(const SimulationConfig& config);

/// First Vacant cell in scan order floor 0..F-1, slot 0..S-1.
std::optional<SlotAddress> find_first_vacant(const SlotMatrix& matrix);

/// find_first_vacant, then marks the cell Reserved for `ticket`.
std::optional<SlotAddress> allocate_slot(SlotMatrix& matrix, TicketId ticket);

enum class RejectReason
{
  too_long,
  no_vacancy,
  duplicate_phone,
  halted,
  invalid_vehicle,
};

std::string_view to_string(RejectReason reason) noexcept;

struct ArrivalOutcome
{
  enum class Kind
  {
    accepted,
    rejected,
    queued,  // waiting behind another vehicle at the entrance
  };
  Kind kind = Kind::queued;
  TicketId ticket{};
  RejectReason reason = RejectReason::too_long;
};

enum class RetrievalResult
{
  started,
  unknown_phone,
  already_retrieving,
  not_parked,  // the ticket is still on its way into the slot
  halted,
};

std::string_view to_string(RetrievalResult result) noexcept;

enum class PaymentResult
{
  accepted,
  wrong_phase,
  unknown_ticket,
};

std::string_view to_string(PaymentResult result) noexcept;

enum class Mode
{
  normal,
  halted,
};

enum class StepKind
{
  open_gate,
  close_gate,
  convey,
  load_platform,
  elevate,
  rotate,
  transfer_to_slot,
  transfer_from_slot,
  lower,
  unload_to_exit,
  send_sms,
  start_timer,
  await_payment,
  sync,                 // wait for every asynchronous action of the program
  depart,               // vehicle leaves the exit belt
  acquire_platform,
  release_platform,
  acquire_exit_lane,
  release_exit_lane,
  release_entrance_lane,
};

std::string_view to_string(StepKind kind) noexcept;

struct Step
{
  StepKind kind = StepKind::sync;
  GateWhich gate = GateWhich::entrance;
  BeltId belt{};
  int floor = 0;
  int slot = 0;
  MessageKind message = MessageKind::welcome;
  bool async = false;
};

enum class ProgramKind
{
  parking,
  retrieval,
  homing,
};

struct StepProgram
{
  std::uint64_t id = 0;
  ProgramKind kind = ProgramKind::parking;
  TicketId ticket{};  // 0 for homing
  std::vector<Step> steps;
  std::size_t next = 0;
  std::optional<std::uint64_t> waiting_action;
  std::set<std::uint64_t> outstanding;
  bool waiting_sync = false;
  bool waiting_payment = false;
};

/// Parking sequence: gate, timer and welcome SMS, entrance belt, platform
/// load, lift and turn, hand-off into the bay.
std::vector<Step> parking_program(SlotAddress slot);

/// Retrieval sequence: lift and turn to the bay, pull the car, lower, unload
/// onto the exit belt, bill, wait for payment, release through the exit gate.
std::vector<Step> retrieval_program(SlotAddress slot);

/// Per-ticket timestamps the run report is built from.
struct TicketRecord
{
  TicketId ticket{};
  std::string vehicle_id;
  SimTime entry{};
  std::optional<SimTime> park_complete;
  std::optional<SimTime> retrieval_request;
  std::optional<SimTime> exit_ready;
  std::optional<Money> amount;
  std::optional<std::string> delivered_vehicle;
};

struct RejectionRecord
{
  std::string vehicle_id;
  SimTime at{};
  RejectReason reason = RejectReason::too_long;
};

struct FlowCounters
{
  std::size_t entered = 0;
  std::size_t in_transit = 0;
  std::size_t parked = 0;
  std::size_t exited = 0;
};

/// The garage brain. Drives the fleet, the SMS gateway and the power model
/// from events dispatched by the engine.
class Controller
{
public:
  Controller(Engine& engine, SimulationConfig config);

  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  /// Engine handler: advances the power model, applies the event, runs
  /// ready programs and checks invariants.
  void dispatch(const SimEvent& event);

  ArrivalOutcome handle_arrival(const Vehicle& vehicle);
  /// `received_at` is the modem timestamp of the customer's message; the
  /// parking timer stops there.
  RetrievalResult handle_retrieval_request(const std::string& phone, SimTime received_at);
  PaymentResult handle_payment(TicketId ticket);
  /// Throws UnknownAction.
  void on_device_done(std::uint64_t action_id);
  void on_fault(BeltId belt);
  void on_fault_cleared();

  [[nodiscard]] Mode mode() const { return m_mode; }
  [[nodiscard]] const GarageState& garage() const { return m_garage; }
  [[nodiscard]] const DeviceFleet& fleet() const { return m_fleet; }
  [[nodiscard]] const SmsGateway& gateway() const { return m_gateway; }
  SmsGateway& gateway() { return m_gateway; }
  [[nodiscard]] const SmsNetwork& network() const { return m_network; }
  [[nodiscard]] const PowerModel& power() const { return m_power; }
  [[nodiscard]] const SimulationConfig& config() const { return m_config; }
  [[nodiscard]] const std::map<TicketId, TicketRecord>& records() const { return m_records; }
  [[nodiscard]] const std::vector<RejectionRecord>& rejections() const { return m_rejections; }
  [[nodiscard]] const std::vector<std::string>& violations() const { return m_violations; }
  [[nodiscard]] std::size_t occupancy_peak() const { return m_occupancy_peak; }
  [[nodiscard]] std::size_t queued_arrivals() const { return m_entrance_queue.size(); }
  [[nodiscard]] FlowCounters flow() const;
  [[nodiscard]] std::optional<std::uint64_t> platform_owner() const { return m_platform_owner; }

  /// Empty when every invariant holds.
  [[nodiscard]] std::vector<std::string> check_invariants() const;

  /// Brings the energy meters up to `now` without dispatching anything.
  void settle(SimTime now) { m_power.advance(now, m_fleet.relays().powered_count()); }

  /// Records a broken invariant in the trace and the violation list.
  void violation(std::string what);

private:
  void trace(std::string line);
  void pump();
  void run_program(std::uint64_t pid);
  bool may_power(std::uint64_t pid, std::size_t need);
  bool issue_device_step(StepProgram& p, const Step& step);
  void on_step_complete(StepProgram& p, const Step& step, const DeviceAction& action);
  void finish_program(std::uint64_t pid);
  void release_platform(std::uint64_t pid);
  void evaluate_entrance();
  std::uint64_t start_program(ProgramKind kind, TicketId ticket, std::vector<Step> steps);
  void send_message(MessageKind kind, ParkingTicket& ticket);
  void ensure_poll();
  void poll_inbox();
  ParkingTicket& ticket(TicketId id);
  void set_phase(ParkingTicket& t, TicketPhase next);
  std::string ticket_tag(const StepProgram& p) const;

  Engine& m_engine;
  SimulationConfig m_config;
  GarageState m_garage;
  DeviceFleet m_fleet;
  SmsGateway m_gateway;
  SmsNetwork m_network;
  PowerModel m_power;
  Mode m_mode = Mode::normal;

  std::map<std::uint64_t, StepProgram> m_programs;
  std::uint64_t m_next_program = 1;
  std::map<std::uint64_t, std::pair<std::uint64_t, std::size_t>> m_action_owner;  // action -> (program, step)
  std::deque<std::uint64_t> m_ready;
  std::deque<std::uint64_t> m_power_waiters;
  std::deque<std::uint64_t> m_halt_waiters;
  std::deque<std::uint64_t> m_platform_waiters;
  std::deque<std::uint64_t> m_exit_waiters;
  std::optional<std::uint64_t> m_platform_owner;
  std::optional<std::uint64_t> m_exit_owner;
  bool m_entrance_busy = false;
  std::deque<Vehicle> m_entrance_queue;
  std::optional<ArrivalOutcome> m_last_evaluated;

  bool m_poll_pending = false;
  std::map<std::uint64_t, SmsMessage> m_outbound;

  std::size_t m_entered = 0;
  std::size_t m_occupancy_peak = 0;
  std::map<TicketId, TicketRecord> m_records;
  std::vector<RejectionRecord> m_rejections;
  std::vector<std::string> m_violations;
};

}  // namespace autopark
