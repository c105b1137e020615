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
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "autopark/core_model.hpp"
#include "autopark/devices.hpp"

namespace autopark {

struct ArrivalEvent
{
  Vehicle vehicle;
};

struct InboundSmsEvent
{
  std::string phone;
  std::string body;
};

/// Payment for a ticket, addressed either by ticket id or by vehicle id.
struct PaymentEvent
{
  std::optional<TicketId> ticket;
  std::string vehicle_id;
};

struct DeviceDoneEvent
{
  std::string device;
  std::uint64_t action = 0;
};

struct IrradianceEvent
{
  double w_per_m2 = 0.0;
};

struct BeltFaultEvent
{
  BeltId belt{};
};

struct FaultClearedEvent
{
};

/// Periodic modem inbox check.
struct PollInboxEvent
{
};

/// An outbound SMS reaching the customer's handset.
struct SmsDeliveredEvent
{
  std::string phone;
  std::uint64_t message_ref = 0;
};

using EventPayload = std::variant<ArrivalEvent,
                                  InboundSmsEvent,
                                  PaymentEvent,
                                  DeviceDoneEvent,
                                  IrradianceEvent,
                                  BeltFaultEvent,
                                  FaultClearedEvent,
                                  PollInboxEvent,
                                  SmsDeliveredEvent>;

std::string_view kind_name(const EventPayload& payload) noexcept;
std::string describe(const EventPayload& payload);

struct SimEvent
{
  SimTime at{};
  std::uint64_t seq = 0;
  EventPayload payload;
};

/// Min-queue on (at, seq).
class EventQueue
{
public:
  void push(SimEvent event) { m_heap.push(std::move(event)); }
  SimEvent pop();
  [[nodiscard]] const SimEvent& top() const { return m_heap.top(); }
  [[nodiscard]] bool empty() const { return m_heap.empty(); }
  [[nodiscard]] std::size_t size() const { return m_heap.size(); }

private:
  struct Later
  {
    bool operator()(const SimEvent& a, const SimEvent& b) const
    {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> m_heap;
};

/// Line-oriented trace shared by the engine and everything it drives.
class TraceLog
{
public:
  void append(std::string line) { m_lines.push_back(std::move(line)); }
  [[nodiscard]] const std::vector<std::string>& lines() const { return m_lines; }
  /// Lines joined with '\n', trailing newline included.
  [[nodiscard]] std::string text() const;

private:
  std::vector<std::string> m_lines;
};

/// `t=<ms> seq=<n> kind=<kind> detail=<...>`
std::string format_dispatch(const SimEvent& event);

class Engine
{
public:
  using Handler = std::function<void(const SimEvent&)>;

  [[nodiscard]] SimTime now() const { return m_now; }

  /// Throws SchedulingInPast when `at` is before the clock.
  std::uint64_t schedule(SimTime at, EventPayload payload);

  /// Dispatches every event with at <= t_end in (at, seq) order, then sets
  /// the clock to t_end (if later). Returns the dispatched events.
  std::vector<SimEvent> run_until(SimTime t_end, const Handler& handler);

  /// Dispatches the next event, if any.
  std::optional<SimEvent> step(const Handler& handler);

  [[nodiscard]] bool idle() const { return m_queue.empty(); }
  [[nodiscard]] std::optional<SimTime> next_time() const;
  [[nodiscard]] std::size_t pending() const { return m_queue.size(); }

  TraceLog& trace() { return m_trace; }
  [[nodiscard]] const TraceLog& trace() const { return m_trace; }

private:
  SimTime m_now{ 0 };
  std::uint64_t m_next_seq = 1;
  EventQueue m_queue;
  TraceLog m_trace;
};

}  // namespace autopark
