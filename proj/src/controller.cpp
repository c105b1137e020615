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

#include "autopark/controller.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace autopark {

namespace {

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool contains(const std::deque<std::uint64_t>& q, std::uint64_t v)
{
  return std::find(q.begin(), q.end(), v) != q.end();
}

void remove(std::deque<std::uint64_t>& q, std::uint64_t v)
{
  q.erase(std::remove(q.begin(), q.end(), v), q.end());
}

bool holds_slot(TicketPhase phase)
{
  return phase == TicketPhase::awaiting_entry || phase == TicketPhase::parking || phase == TicketPhase::parked ||
         phase == TicketPhase::retrieving;
}

bool in_transit(TicketPhase phase)
{
  return phase == TicketPhase::awaiting_entry || phase == TicketPhase::parking ||
         phase == TicketPhase::retrieving || phase == TicketPhase::awaiting_payment;
}

bool timer_running(TicketPhase phase)
{
  return phase == TicketPhase::awaiting_entry || phase == TicketPhase::parking || phase == TicketPhase::parked;
}

std::string sensors_tag(const LengthSensorReading& r)
{
  return fmt::format("{}{}{}", r.front ? 'T' : 'F', r.middle ? 'T' : 'F', r.rear ? 'T' : 'F');
}

Step device(StepKind kind)
{
  Step s;
  s.kind = kind;
  return s;
}

Step gate_step(StepKind kind, GateWhich which, bool async = false)
{
  Step s = device(kind);
  s.gate = which;
  s.async = async;
  return s;
}

Step convey(BeltId belt)
{
  Step s = device(StepKind::convey);
  s.belt = belt;
  return s;
}

Step elevate(int floor)
{
  Step s = device(StepKind::elevate);
  s.floor = floor;
  return s;
}

Step rotate(int slot)
{
  Step s = device(StepKind::rotate);
  s.slot = slot;
  return s;
}

Step sms(MessageKind kind)
{
  Step s = device(StepKind::send_sms);
  s.message = kind;
  return s;
}

}  // namespace

void validate(const SimulationConfig& config)
{
  validate(config.garage);
  // a platform rotation energizes both hybrid motors at once
  if (config.fleet.relay_budget < 2) {
    throw Error(ErrorCode::invalid_config, "relay_budget must be >= 2");
  }
  if (!(config.fleet.motor_power_w > 0.0)) {
    throw Error(ErrorCode::invalid_config, "motor_power_w must be > 0");
  }
  if (!(config.sms.poll_interval_s > 0.0) || config.sms.delivery_delay_s < 0.0 ||
      config.sms.drop_probability < 0.0 || config.sms.drop_probability > 1.0) {
    throw Error(ErrorCode::invalid_config, "sms poll interval, delivery delay or drop probability out of range");
  }
  if (from_seconds(config.sms.poll_interval_s).count() <= 0) {
    throw Error(ErrorCode::invalid_config, "poll_interval_s rounds to zero milliseconds");
  }
  if (config.auto_pay_s && *config.auto_pay_s < 0.0) {
    throw Error(ErrorCode::invalid_config, "auto_pay_s must be >= 0");
  }
}

std::optional<SlotAddress> find_first_vacant(const SlotMatrix& matrix)
{
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto a = matrix.address(i);
    if (matrix.at(a).status == SlotStatus::vacant) {
      return a;
    }
  }
  return std::nullopt;
}

std::optional<SlotAddress> allocate_slot(SlotMatrix& matrix, TicketId ticket)
{
  auto slot = find_first_vacant(matrix);
  if (slot) {
    matrix.at(*slot) = SlotState::reserved(ticket);
  }
  return slot;
}

std::string_view to_string(RejectReason reason) noexcept
{
  switch (reason) {
    case RejectReason::too_long: return "TooLong";
    case RejectReason::no_vacancy: return "NoVacancy";
    case RejectReason::duplicate_phone: return "DuplicatePhone";
    case RejectReason::halted: return "Halted";
    case RejectReason::invalid_vehicle: return "InvalidVehicle";
  }
  return "Unknown";
}

std::string_view to_string(RetrievalResult result) noexcept
{
  switch (result) {
    case RetrievalResult::started: return "Started";
    case RetrievalResult::unknown_phone: return "UnknownPhone";
    case RetrievalResult::already_retrieving: return "AlreadyRetrieving";
    case RetrievalResult::not_parked: return "NotParked";
    case RetrievalResult::halted: return "Halted";
  }
  return "Unknown";
}

std::string_view to_string(PaymentResult result) noexcept
{
  switch (result) {
    case PaymentResult::accepted: return "Accepted";
    case PaymentResult::wrong_phase: return "WrongPhase";
    case PaymentResult::unknown_ticket: return "UnknownTicket";
  }
  return "Unknown";
}

std::string_view to_string(StepKind kind) noexcept
{
  switch (kind) {
    case StepKind::open_gate: return "OpenGate";
    case StepKind::close_gate: return "CloseGate";
    case StepKind::convey: return "Convey";
    case StepKind::load_platform: return "LoadPlatform";
    case StepKind::elevate: return "Elevate";
    case StepKind::rotate: return "Rotate";
    case StepKind::transfer_to_slot: return "TransferToSlot";
    case StepKind::transfer_from_slot: return "TransferFromSlot";
    case StepKind::lower: return "Lower";
    case StepKind::unload_to_exit: return "UnloadToExit";
    case StepKind::send_sms: return "SendSms";
    case StepKind::start_timer: return "StartTimer";
    case StepKind::await_payment: return "AwaitPayment";
    case StepKind::sync: return "Sync";
    case StepKind::depart: return "Depart";
    case StepKind::acquire_platform: return "AcquirePlatform";
    case StepKind::release_platform: return "ReleasePlatform";
    case StepKind::acquire_exit_lane: return "AcquireExitLane";
    case StepKind::release_exit_lane: return "ReleaseExitLane";
    case StepKind::release_entrance_lane: return "ReleaseEntranceLane";
  }
  return "Unknown";
}

std::vector<Step> parking_program(SlotAddress slot)
{
  return {
    gate_step(StepKind::open_gate, GateWhich::entrance, true),
    device(StepKind::start_timer),
    sms(MessageKind::welcome),
    device(StepKind::sync),
    convey(BeltId::entrance()),
    gate_step(StepKind::close_gate, GateWhich::entrance),
    device(StepKind::acquire_platform),
    elevate(0),
    rotate(0),
    device(StepKind::load_platform),
    device(StepKind::release_entrance_lane),
    elevate(slot.floor),
    rotate(slot.slot),
    device(StepKind::transfer_to_slot),
    device(StepKind::release_platform),
  };
}

std::vector<Step> retrieval_program(SlotAddress slot)
{
  return {
    device(StepKind::acquire_exit_lane),
    device(StepKind::acquire_platform),
    elevate(slot.floor),
    rotate(slot.slot),
    device(StepKind::transfer_from_slot),
    device(StepKind::lower),
    rotate(0),
    device(StepKind::unload_to_exit),
    device(StepKind::release_platform),
    convey(BeltId::exit()),
    sms(MessageKind::bill),
    device(StepKind::await_payment),
    gate_step(StepKind::open_gate, GateWhich::exit),
    convey(BeltId::exit()),
    device(StepKind::depart),
    gate_step(StepKind::close_gate, GateWhich::exit),
    device(StepKind::release_exit_lane),
  };
}

namespace {

std::vector<Step> homing_program()
{
  return { elevate(0), rotate(0), device(StepKind::release_platform) };
}

std::optional<ActionRequest> request_for(const Step& step, const std::string& vehicle)
{
  switch (step.kind) {
    case StepKind::open_gate: return GateRequest{ step.gate, GateCommand::open };
    case StepKind::close_gate: return GateRequest{ step.gate, GateCommand::close };
    case StepKind::convey: return ConveyRequest{ step.belt, vehicle };
    case StepKind::load_platform: return TransferRequest{ TransferKind::load_platform };
    case StepKind::elevate: return ElevateRequest{ step.floor };
    case StepKind::lower: return ElevateRequest{ 0 };
    case StepKind::rotate: return RotateRequest{ step.slot };
    case StepKind::transfer_to_slot: return TransferRequest{ TransferKind::to_slot };
    case StepKind::transfer_from_slot: return TransferRequest{ TransferKind::from_slot };
    case StepKind::unload_to_exit: return TransferRequest{ TransferKind::unload_to_exit };
    default: return std::nullopt;
  }
}

}  // namespace

// ---- Controller ---------------------------------------------------------------

Controller::Controller(Engine& engine, SimulationConfig config)
  : m_engine(engine)
  , m_config((validate(config), config))
  , m_garage(new_garage(config.garage))
  , m_fleet(config.garage, config.fleet)
  , m_network(config.sms)
  , m_power(config.power, config.garage.bus_voltage_v, config.fleet.motor_power_w)
{
  m_gateway.initialize();
}

void Controller::trace(std::string line)
{
  m_engine.trace().append(std::move(line));
}

void Controller::violation(std::string what)
{
  trace(fmt::format("violation t={} {}", m_engine.now().count(), what));
  m_violations.push_back(std::move(what));
}

ParkingTicket& Controller::ticket(TicketId id)
{
  return m_garage.tickets.at(id);
}

void Controller::set_phase(ParkingTicket& t, TicketPhase next)
{
  const auto from = t.phase;
  t.advance_to(next);
  trace(fmt::format("ticket={} phase={}->{} t={}", t.id.value, to_string(from), to_string(next),
                    m_engine.now().count()));
}

std::string Controller::ticket_tag(const StepProgram& p) const
{
  return p.kind == ProgramKind::homing ? std::string{ "home" } : std::to_string(p.ticket.value);
}

FlowCounters Controller::flow() const
{
  FlowCounters f;
  f.entered = m_entered;
  f.parked = occupancy_count(m_garage).occupied;
  for (const auto& [_, t] : m_garage.tickets) {
    if (in_transit(t.phase)) ++f.in_transit;
    if (t.phase == TicketPhase::closed) ++f.exited;
  }
  return f;
}

void Controller::dispatch(const SimEvent& event)
{
  m_power.advance(event.at, m_fleet.relays().powered_count());

  std::visit(overloaded{
               [&](const ArrivalEvent& e) { (void)handle_arrival(e.vehicle); },
               [&](const InboundSmsEvent& e) {
                 const int index = m_gateway.deliver_inbound(e.phone, e.body, m_engine.now());
                 trace(fmt::format("inbox t={} phone={} index={}", m_engine.now().count(), e.phone, index));
                 ensure_poll();
               },
               [&](const PaymentEvent& e) {
                 std::optional<TicketId> id = e.ticket;
                 if (!id) {
                   // latest ticket issued to that vehicle
                   for (const auto& [tid, t] : m_garage.tickets) {
                     if (t.vehicle.vehicle_id == e.vehicle_id) id = tid;
                   }
                 }
                 if (!id) {
                   trace(fmt::format("payment t={} vehicle={} result={}", m_engine.now().count(), e.vehicle_id,
                                     to_string(PaymentResult::unknown_ticket)));
                   return;
                 }
                 (void)handle_payment(*id);
               },
               [&](const DeviceDoneEvent& e) {
                 try {
                   on_device_done(e.action);
                 } catch (const Error& err) {
                   violation(err.what());
                 }
               },
               [&](const IrradianceEvent& e) { m_power.set_irradiance(e.w_per_m2); },
               [&](const BeltFaultEvent& e) { on_fault(e.belt); },
               [&](const FaultClearedEvent&) { on_fault_cleared(); },
               [&](const PollInboxEvent&) {
                 m_poll_pending = false;
                 poll_inbox();
               },
               [&](const SmsDeliveredEvent& e) {
                 auto it = m_outbound.find(e.message_ref);
                 if (it != m_outbound.end()) {
                   m_network.deliver(it->second);
                   m_outbound.erase(it);
                 }
               },
             },
             event.payload);
  pump();

  const auto occ = occupancy_count(m_garage);
  m_occupancy_peak = std::max(m_occupancy_peak, occ.occupied + occ.reserved);
  for (auto& v : check_invariants()) {
    violation(std::move(v));
  }
}

ArrivalOutcome Controller::handle_arrival(const Vehicle& vehicle)
{
  const auto now = m_engine.now();
  auto reject = [&](RejectReason reason) {
    trace(fmt::format("reject t={} vehicle={} reason={}", now.count(), vehicle.vehicle_id, to_string(reason)));
    m_rejections.push_back({ vehicle.vehicle_id, now, reason });
    return ArrivalOutcome{ ArrivalOutcome::Kind::rejected, {}, reason };
  };
  if (m_mode == Mode::halted) {
    return reject(RejectReason::halted);
  }
  try {
    validate(vehicle);
  } catch (const Error&) {
    return reject(RejectReason::invalid_vehicle);
  }

  m_entrance_queue.push_back(vehicle);
  if (m_entrance_busy) {
    trace(fmt::format("queue t={} vehicle={} position={}", now.count(), vehicle.vehicle_id,
                      m_entrance_queue.size()));
    return ArrivalOutcome{ ArrivalOutcome::Kind::queued, {}, {} };
  }
  m_last_evaluated.reset();
  evaluate_entrance();
  pump();
  return m_last_evaluated.value_or(ArrivalOutcome{ ArrivalOutcome::Kind::queued, {}, {} });
}

void Controller::evaluate_entrance()
{
  const auto now = m_engine.now();
  while (!m_entrance_busy && m_mode == Mode::normal && !m_entrance_queue.empty()) {
    Vehicle v = std::move(m_entrance_queue.front());
    m_entrance_queue.pop_front();

    const auto sensors = read_length_sensors(v.length_mm, m_garage.config.max_vehicle_length_mm);
    auto reject = [&](RejectReason reason) {
      trace(fmt::format("reject t={} vehicle={} reason={} sensors={}", now.count(), v.vehicle_id,
                        to_string(reason), sensors_tag(sensors)));
      m_rejections.push_back({ v.vehicle_id, now, reason });
      m_last_evaluated = ArrivalOutcome{ ArrivalOutcome::Kind::rejected, {}, reason };
    };

    if (sensors.all_tripped()) {
      reject(RejectReason::too_long);
      continue;
    }
    const bool duplicate = std::any_of(m_garage.tickets.begin(), m_garage.tickets.end(), [&](const auto& kv) {
      return kv.second.phase != TicketPhase::closed && kv.second.vehicle.phone == v.phone;
    });
    if (duplicate) {
      reject(RejectReason::duplicate_phone);
      continue;
    }
    const TicketId id{ m_garage.next_ticket };
    const auto slot = allocate_slot(m_garage.slots, id);
    if (!slot) {
      reject(RejectReason::no_vacancy);
      continue;
    }

    ++m_garage.next_ticket;
    ParkingTicket t;
    t.id = id;
    t.vehicle = v;
    t.slot = *slot;
    t.entry_time = now;
    m_garage.tickets.emplace(id, t);
    ++m_entered;
    m_entrance_busy = true;
    m_records.emplace(id, TicketRecord{ id, v.vehicle_id, now, {}, {}, {}, {}, {} });
    trace(fmt::format("accept t={} ticket={} vehicle={} slot={},{} sensors={}", now.count(), id.value, v.vehicle_id,
                      slot->floor, slot->slot, sensors_tag(sensors)));
    start_program(ProgramKind::parking, id, parking_program(*slot));
    m_last_evaluated = ArrivalOutcome{ ArrivalOutcome::Kind::accepted, id, {} };
  }
}

RetrievalResult Controller::handle_retrieval_request(const std::string& phone, SimTime received_at)
{
  if (m_mode == Mode::halted) {
    return RetrievalResult::halted;
  }
  ParkingTicket* found = nullptr;
  for (auto& [_, t] : m_garage.tickets) {
    if (t.phase != TicketPhase::closed && t.vehicle.phone == phone) {
      found = &t;
    }
  }
  if (!found) {
    return RetrievalResult::unknown_phone;
  }
  switch (found->phase) {
    case TicketPhase::retrieving:
    case TicketPhase::awaiting_payment: return RetrievalResult::already_retrieving;
    case TicketPhase::awaiting_entry:
    case TicketPhase::parking: return RetrievalResult::not_parked;
    default: break;
  }

  auto& t = *found;
  t.exit_time = received_at;
  m_garage.timers.at(t.slot).reset();
  m_garage.slots.at(t.slot) = SlotState::reserved(t.id);
  m_records.at(t.id).retrieval_request = received_at;
  trace(fmt::format("timer t={} ticket={} op=stop stamp={}", m_engine.now().count(), t.id.value,
                    received_at.count()));
  set_phase(t, TicketPhase::retrieving);
  start_program(ProgramKind::retrieval, t.id, retrieval_program(t.slot));
  pump();
  return RetrievalResult::started;
}

PaymentResult Controller::handle_payment(TicketId id)
{
  const auto now = m_engine.now();
  auto it = m_garage.tickets.find(id);
  PaymentResult result = PaymentResult::accepted;
  if (it == m_garage.tickets.end()) {
    result = PaymentResult::unknown_ticket;
  } else if (it->second.phase != TicketPhase::awaiting_payment) {
    result = PaymentResult::wrong_phase;
  }
  trace(fmt::format("payment t={} ticket={} result={}", now.count(), id.value, to_string(result)));
  if (result != PaymentResult::accepted) {
    return result;
  }
  set_phase(it->second, TicketPhase::closed);
  for (auto& [pid, p] : m_programs) {
    if (p.ticket == id && p.waiting_payment) {
      p.waiting_payment = false;
      m_ready.push_back(pid);
    }
  }
  pump();
  return result;
}

void Controller::on_device_done(std::uint64_t action_id)
{
  auto own = m_action_owner.find(action_id);
  if (own == m_action_owner.end()) {
    throw Error(ErrorCode::unknown_action, fmt::format("action {} belongs to no program", action_id));
  }
  const auto action = m_fleet.complete(action_id, m_engine.now());
  const auto [pid, index] = own->second;
  m_action_owner.erase(own);

  auto& p = m_programs.at(pid);
  on_step_complete(p, p.steps[index], action);
  if (p.outstanding.erase(action_id) > 0) {
    if (p.waiting_sync && p.outstanding.empty()) {
      p.waiting_sync = false;
      m_ready.push_back(pid);
    }
  } else if (p.waiting_action == action_id) {
    p.waiting_action.reset();
    m_ready.push_back(pid);
  }
  pump();
}

void Controller::on_step_complete(StepProgram& p, const Step& step, const DeviceAction&)
{
  if (p.kind == ProgramKind::homing) {
    return;
  }
  auto& t = ticket(p.ticket);
  const auto now = m_engine.now();
  switch (step.kind) {
    case StepKind::transfer_to_slot:
      m_garage.slots.at(t.slot) = SlotState::occupied(t.id);
      m_records.at(t.id).park_complete = now;
      set_phase(t, TicketPhase::parked);
      break;
    case StepKind::transfer_from_slot:
      m_garage.slots.at(t.slot) = SlotState::vacant();
      break;
    case StepKind::convey:
      if (step.belt == BeltId::exit() && t.phase == TicketPhase::retrieving) {
        const auto& load = m_fleet.belt(BeltId::exit()).load;
        auto& rec = m_records.at(t.id);
        rec.delivered_vehicle = load;
        trace(fmt::format("deliver t={} ticket={} vehicle={}", now.count(), t.id.value, load.value_or("-")));
        if (load != t.vehicle.vehicle_id) {
          violation(fmt::format("ticket {} delivered {} instead of {}", t.id.value, load.value_or("nothing"),
                                t.vehicle.vehicle_id));
        }
      }
      break;
    default: break;
  }
}

std::uint64_t Controller::start_program(ProgramKind kind, TicketId ticket, std::vector<Step> steps)
{
  const auto pid = m_next_program++;
  StepProgram p;
  p.id = pid;
  p.kind = kind;
  p.ticket = ticket;
  p.steps = std::move(steps);
  m_programs.emplace(pid, std::move(p));
  m_ready.push_back(pid);
  return pid;
}

void Controller::finish_program(std::uint64_t pid)
{
  m_programs.erase(pid);
}

void Controller::release_platform(std::uint64_t pid)
{
  if (m_platform_owner != pid) {
    violation(fmt::format("program {} released a platform it does not own", pid));
  }
  m_platform_owner.reset();
  if (!m_platform_waiters.empty()) {
    m_platform_owner = m_platform_waiters.front();
    m_platform_waiters.pop_front();
    m_ready.push_back(*m_platform_owner);
    return;
  }
  const auto& pf = m_fleet.platform();
  if (pf.floor != 0 || pf.slot_index != 0) {
    m_platform_owner = start_program(ProgramKind::homing, TicketId{ 0 }, homing_program());
  }
}

bool Controller::may_power(std::uint64_t pid, std::size_t need)
{
  if (need == 0) {
    remove(m_power_waiters, pid);
    return true;
  }
  const bool my_turn = m_power_waiters.empty() || m_power_waiters.front() == pid;
  if (my_turn && m_fleet.relays().free_slots() >= need) {
    if (!m_power_waiters.empty()) m_power_waiters.pop_front();
    return true;
  }
  if (!contains(m_power_waiters, pid)) {
    m_power_waiters.push_back(pid);
  }
  return false;
}

bool Controller::issue_device_step(StepProgram& p, const Step& step)
{
  const auto now = m_engine.now();
  const std::string vehicle = p.kind == ProgramKind::homing ? std::string{} : ticket(p.ticket).vehicle.vehicle_id;
  const auto request = request_for(step, vehicle);
  if (!request) {
    throw Error(ErrorCode::internal, fmt::format("{} is not a device step", to_string(step.kind)));
  }
  const auto motors = m_fleet.motors_needed(*request);
  if (!may_power(p.id, motors.size())) {
    return false;
  }
  if (m_mode == Mode::halted) {
    violation("device action issued while halted");
  }
  for (const auto& m : motors) {
    m_fleet.relays().request_power(m, now);
  }
  const auto action = m_fleet.start(*request, now);
  m_action_owner.emplace(action.id, std::make_pair(p.id, p.next));
  ++p.next;
  if (step.async) {
    p.outstanding.insert(action.id);
  } else {
    p.waiting_action = action.id;
  }

  std::string motor_list;
  for (const auto& m : motors) {
    if (!motor_list.empty()) motor_list += '+';
    motor_list += m.to_string();
  }
  trace(fmt::format("act t={} ticket={} step={} action={} device={} done={} motors={}", now.count(), ticket_tag(p),
                    to_string(step.kind), action.id, action.device, action.done_at.count(),
                    motor_list.empty() ? "-" : motor_list));
  m_engine.schedule(action.done_at, DeviceDoneEvent{ action.device, action.id });

  if (p.kind == ProgramKind::parking && step.kind == StepKind::convey) {
    auto& t = ticket(p.ticket);
    if (t.phase == TicketPhase::awaiting_entry) {
      set_phase(t, TicketPhase::parking);
    }
  }
  return true;
}

void Controller::run_program(std::uint64_t pid)
{
  auto it = m_programs.find(pid);
  if (it == m_programs.end()) {
    return;
  }
  StepProgram& p = it->second;
  if (p.waiting_action || p.waiting_sync || p.waiting_payment) {
    return;
  }
  const auto now = m_engine.now();

  while (true) {
    if (p.next >= p.steps.size()) {
      finish_program(pid);
      return;
    }
    if (m_mode == Mode::halted) {
      if (!contains(m_halt_waiters, pid)) m_halt_waiters.push_back(pid);
      return;
    }
    const Step step = p.steps[p.next];
    switch (step.kind) {
      case StepKind::acquire_platform:
        if (m_platform_owner == pid || (!m_platform_owner && m_platform_waiters.empty())) {
          m_platform_owner = pid;
          ++p.next;
          break;
        }
        if (!contains(m_platform_waiters, pid)) m_platform_waiters.push_back(pid);
        return;
      case StepKind::release_platform:
        ++p.next;
        release_platform(pid);
        break;
      case StepKind::acquire_exit_lane:
        if (m_exit_owner == pid || (!m_exit_owner && m_exit_waiters.empty())) {
          m_exit_owner = pid;
          ++p.next;
          break;
        }
        if (!contains(m_exit_waiters, pid)) m_exit_waiters.push_back(pid);
        return;
      case StepKind::release_exit_lane:
        ++p.next;
        m_exit_owner.reset();
        if (!m_exit_waiters.empty()) {
          m_exit_owner = m_exit_waiters.front();
          m_exit_waiters.pop_front();
          m_ready.push_back(*m_exit_owner);
        }
        break;
      case StepKind::release_entrance_lane:
        ++p.next;
        m_entrance_busy = false;
        evaluate_entrance();
        break;
      case StepKind::start_timer: {
        ++p.next;
        auto& t = ticket(p.ticket);
        m_garage.timers.at(t.slot) = t.entry_time;
        trace(fmt::format("timer t={} ticket={} op=start cell={},{}", now.count(), t.id.value, t.slot.floor,
                          t.slot.slot));
        break;
      }
      case StepKind::send_sms:
        ++p.next;
        send_message(step.message, ticket(p.ticket));
        break;
      case StepKind::await_payment:
        if (ticket(p.ticket).phase == TicketPhase::closed) {
          ++p.next;
          break;
        }
        p.waiting_payment = true;
        return;
      case StepKind::sync:
        if (p.outstanding.empty()) {
          ++p.next;
          break;
        }
        p.waiting_sync = true;
        return;
      case StepKind::depart: {
        ++p.next;
        const auto v = m_fleet.discharge(BeltId::exit());
        trace(fmt::format("depart t={} ticket={} vehicle={}", now.count(), p.ticket.value, v.value_or("-")));
        break;
      }
      default:
        if (!issue_device_step(p, step)) {
          return;
        }
        if (!step.async) {
          return;
        }
        break;
    }
  }
}

void Controller::pump()
{
  while (true) {
    if (!m_ready.empty()) {
      const auto pid = m_ready.front();
      m_ready.pop_front();
      run_program(pid);
      continue;
    }
    // strict FIFO on the relay budget: only the head waiter may start
    if (m_mode == Mode::normal && !m_power_waiters.empty()) {
      const auto head = m_power_waiters.front();
      const auto& p = m_programs.at(head);
      const std::string vehicle = p.kind == ProgramKind::homing ? std::string{} : ticket(p.ticket).vehicle.vehicle_id;
      const auto request = request_for(p.steps.at(p.next), vehicle);
      const auto need = request ? m_fleet.motors_needed(*request).size() : 0;
      if (m_fleet.relays().free_slots() >= need) {
        run_program(head);
        if (!m_power_waiters.empty() && m_power_waiters.front() == head) {
          break;
        }
        continue;
      }
    }
    break;
  }
}

void Controller::send_message(MessageKind kind, ParkingTicket& t)
{
  const auto now = m_engine.now();
  if (kind == MessageKind::bill) {
    const auto amount = compute_bill(t.entry_time, t.exit_time.value(),
                                     Money::from_units(m_garage.config.billing_rate_per_minute));
    t.amount_due = amount;
    auto& rec = m_records.at(t.id);
    rec.exit_ready = now;
    rec.amount = amount;
    trace(fmt::format("bill t={} ticket={} minutes={} amount={}", now.count(), t.id.value,
                      billed_minutes(t.entry_time, *t.exit_time), amount.to_string()));
    set_phase(t, TicketPhase::awaiting_payment);
    if (m_config.auto_pay_s) {
      m_engine.schedule(now + from_seconds(*m_config.auto_pay_s), PaymentEvent{ t.id, t.vehicle.vehicle_id });
    }
  }

  const auto kind_name = kind == MessageKind::welcome ? "Welcome" : "Bill";
  std::uint64_t ref = 0;
  std::string body;
  try {
    body = compose_message(kind, t);
    ref = m_gateway.send_sms(t.vehicle.phone, body, now);
  } catch (const Error& e) {
    trace(fmt::format("sms-error t={} ticket={} kind={} error={}", now.count(), t.id.value, kind_name, e.what()));
    return;
  }
  trace(fmt::format("sms t={} ticket={} kind={} to={} ref={}", now.count(), t.id.value, kind_name, t.vehicle.phone,
                    ref));
  if (!m_network.carries()) {
    trace(fmt::format("sms-dropped t={} ref={}", now.count(), ref));
    return;
  }
  m_outbound.emplace(ref, SmsMessage{ SmsDirection::out, t.vehicle.phone, body, now, ref });
  m_engine.schedule(now + from_seconds(m_config.sms.delivery_delay_s), SmsDeliveredEvent{ t.vehicle.phone, ref });
}

void Controller::ensure_poll()
{
  if (m_poll_pending || m_mode != Mode::normal || m_gateway.modem().stored() == 0) {
    return;
  }
  const auto interval = from_seconds(m_config.sms.poll_interval_s).count();
  const auto now = m_engine.now().count();
  m_engine.schedule(SimTime{ (now / interval + 1) * interval }, PollInboxEvent{});
  m_poll_pending = true;
}

void Controller::poll_inbox()
{
  if (m_mode != Mode::normal) {
    return;
  }
  const auto now = m_engine.now();
  for (const auto& msg : m_gateway.poll_inbox()) {
    const auto result = handle_retrieval_request(msg.phone, msg.received_at);
    trace(fmt::format("retrieval t={} phone={} received={} result={}", now.count(), msg.phone,
                      msg.received_at.count(), to_string(result)));
  }
  ensure_poll();
}

void Controller::on_fault(BeltId belt)
{
  m_fleet.set_belt_fault(belt);
  if (m_mode == Mode::normal) {
    m_mode = Mode::halted;
    trace(fmt::format("mode t={} Normal->Halted reason=BeltFault:{}", m_engine.now().count(), belt.to_string()));
  }
}

void Controller::on_fault_cleared()
{
  if (m_mode == Mode::normal) {
    return;
  }
  m_fleet.clear_faults();
  m_mode = Mode::normal;
  trace(fmt::format("mode t={} Halted->Normal", m_engine.now().count()));
  while (!m_halt_waiters.empty()) {
    m_ready.push_back(m_halt_waiters.front());
    m_halt_waiters.pop_front();
  }
  evaluate_entrance();
  ensure_poll();
  pump();
}

std::vector<std::string> Controller::check_invariants() const
{
  std::vector<std::string> out;
  const auto& slots = m_garage.slots;

  // ticket <-> cell bijection and phase agreement
  std::map<TicketId, SlotAddress> seen;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto a = slots.address(i);
    const auto& cell = slots.at(a);
    const auto& timer = m_garage.timers.at(a);
    if (cell.status == SlotStatus::vacant) {
      if (timer) out.push_back(fmt::format("timer set on vacant cell {},{}", a.floor, a.slot));
      continue;
    }
    if (!seen.emplace(cell.ticket, a).second) {
      out.push_back(fmt::format("ticket {} holds two cells", cell.ticket.value));
    }
    auto it = m_garage.tickets.find(cell.ticket);
    if (it == m_garage.tickets.end()) {
      out.push_back(fmt::format("cell {},{} names unknown ticket {}", a.floor, a.slot, cell.ticket.value));
      continue;
    }
    const auto& t = it->second;
    if (t.slot != a) {
      out.push_back(fmt::format("ticket {} sits in {},{} but was assigned {},{}", t.id.value, a.floor, a.slot,
                                t.slot.floor, t.slot.slot));
    }
    const bool status_ok = cell.status == SlotStatus::occupied ? t.phase == TicketPhase::parked
                                                              : holds_slot(t.phase) && t.phase != TicketPhase::parked;
    if (!status_ok) {
      out.push_back(fmt::format("cell {},{} state disagrees with ticket {} phase {}", a.floor, a.slot, t.id.value,
                                to_string(t.phase)));
    }
    if (timer_running(t.phase) != timer.has_value()) {
      out.push_back(fmt::format("timer for ticket {} is {} in phase {}", t.id.value, timer ? "set" : "clear",
                                to_string(t.phase)));
    } else if (timer && *timer != t.entry_time) {
      out.push_back(fmt::format("timer for ticket {} does not match its entry time", t.id.value));
    }
  }
  for (const auto& [id, t] : m_garage.tickets) {
    if (t.phase == TicketPhase::parked && !seen.contains(id)) {
      out.push_back(fmt::format("parked ticket {} has no cell", id.value));
    }
    const bool billed = t.phase == TicketPhase::awaiting_payment || t.phase == TicketPhase::closed;
    if (billed != t.amount_due.has_value()) {
      out.push_back(fmt::format("ticket {} amount_due presence disagrees with phase", id.value));
    }
    if (t.exit_time && *t.exit_time < t.entry_time) {
      out.push_back(fmt::format("ticket {} exits before it entered", id.value));
    }
  }

  const auto f = flow();
  if (f.entered != f.in_transit + f.parked + f.exited) {
    out.push_back(fmt::format("conservation: entered {} != in_transit {} + parked {} + exited {}", f.entered,
                              f.in_transit, f.parked, f.exited));
  }

  if (m_fleet.relays().powered_count() > m_fleet.relays().budget()) {
    out.push_back(fmt::format("{} motors powered over a budget of {}", m_fleet.relays().powered_count(),
                              m_fleet.relays().budget()));
  }

  // one physical place per vehicle
  std::set<std::string> vehicles;
  for (const auto& [v, where] : m_fleet.vehicle_locations()) {
    if (!vehicles.insert(v).second) {
      out.push_back(fmt::format("vehicle {} is in two places", v));
    }
  }

  // only the platform owner may move the platform
  if (const auto busy = m_fleet.platform().busy) {
    auto own = m_action_owner.find(*busy);
    if (own == m_action_owner.end() || own->second.first != m_platform_owner) {
      out.push_back("platform moved by a program that does not own it");
    }
  }
  return out;
}

}  // namespace autopark
