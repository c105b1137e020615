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

#include "autopark/sim_engine.hpp"

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

std::string quote(const std::string& s)
{
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view kind_name(const EventPayload& payload) noexcept
{
  return std::visit(overloaded{
                      [](const ArrivalEvent&) { return std::string_view{ "Arrival" }; },
                      [](const InboundSmsEvent&) { return std::string_view{ "InboundSms" }; },
                      [](const PaymentEvent&) { return std::string_view{ "PaymentConfirmed" }; },
                      [](const DeviceDoneEvent&) { return std::string_view{ "DeviceDone" }; },
                      [](const IrradianceEvent&) { return std::string_view{ "IrradianceChange" }; },
                      [](const BeltFaultEvent&) { return std::string_view{ "BeltFault" }; },
                      [](const FaultClearedEvent&) { return std::string_view{ "FaultCleared" }; },
                      [](const PollInboxEvent&) { return std::string_view{ "PollInbox" }; },
                      [](const SmsDeliveredEvent&) { return std::string_view{ "SmsDelivered" }; },
                    },
                    payload);
}

std::string describe(const EventPayload& payload)
{
  return std::visit(
    overloaded{
      [](const ArrivalEvent& e) {
        return fmt::format("vehicle={},length_mm={},phone={}", e.vehicle.vehicle_id, e.vehicle.length_mm,
                           e.vehicle.phone);
      },
      [](const InboundSmsEvent& e) { return fmt::format("phone={},body={}", e.phone, quote(e.body)); },
      [](const PaymentEvent& e) {
        return e.ticket ? fmt::format("ticket={}", e.ticket->value) : fmt::format("vehicle={}", e.vehicle_id);
      },
      [](const DeviceDoneEvent& e) { return fmt::format("device={},action={}", e.device, e.action); },
      [](const IrradianceEvent& e) { return fmt::format("w_per_m2={}", e.w_per_m2); },
      [](const BeltFaultEvent& e) { return fmt::format("belt={}", e.belt.to_string()); },
      [](const FaultClearedEvent&) { return std::string{ "-" }; },
      [](const PollInboxEvent&) { return std::string{ "-" }; },
      [](const SmsDeliveredEvent& e) { return fmt::format("phone={},ref={}", e.phone, e.message_ref); },
    },
    payload);
}

SimEvent EventQueue::pop()
{
  SimEvent e = m_heap.top();
  m_heap.pop();
  return e;
}

std::string TraceLog::text() const
{
  std::string out;
  for (const auto& line : m_lines) {
    out += line;
    out.push_back('\n');
  }
  return out;
}

std::string format_dispatch(const SimEvent& event)
{
  return fmt::format("t={} seq={} kind={} detail={}", event.at.count(), event.seq, kind_name(event.payload),
                     describe(event.payload));
}

std::uint64_t Engine::schedule(SimTime at, EventPayload payload)
{
  if (at < m_now) {
    throw Error(ErrorCode::scheduling_in_past,
                fmt::format("event at {} ms scheduled with clock at {} ms", at.count(), m_now.count()));
  }
  const auto seq = m_next_seq++;
  m_queue.push(SimEvent{ at, seq, std::move(payload) });
  return seq;
}

std::optional<SimTime> Engine::next_time() const
{
  if (m_queue.empty()) return std::nullopt;
  return m_queue.top().at;
}

std::optional<SimEvent> Engine::step(const Handler& handler)
{
  if (m_queue.empty()) return std::nullopt;
  SimEvent e = m_queue.pop();
  m_now = e.at;
  m_trace.append(format_dispatch(e));
  if (handler) handler(e);
  return e;
}

std::vector<SimEvent> Engine::run_until(SimTime t_end, const Handler& handler)
{
  std::vector<SimEvent> dispatched;
  while (!m_queue.empty() && m_queue.top().at <= t_end) {
    dispatched.push_back(*step(handler));
  }
  if (t_end > m_now) {
    m_now = t_end;
  }
  return dispatched;
}

}  // namespace autopark
