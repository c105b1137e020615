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
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "autopark/core_model.hpp"

namespace autopark {

inline constexpr std::size_t max_sms_body = 160;
inline constexpr char ctrl_z = '\x1A';

// ---- commands (host -> modem) ----------------------------------------------

struct RegisterNetwork
{
  bool operator==(const RegisterNetwork&) const = default;
};
struct SetTextMode
{
  bool operator==(const SetTextMode&) const = default;
};
struct SendMessage
{
  std::string number;
  bool operator==(const SendMessage&) const = default;
};
struct ReadInbox
{
  bool operator==(const ReadInbox&) const = default;
};
struct DeleteMessage
{
  int index = 0;
  bool operator==(const DeleteMessage&) const = default;
};

using AtCommand = std::variant<RegisterNetwork, SetTextMode, SendMessage, ReadInbox, DeleteMessage>;

/// Exact command line including the trailing CR, e.g. `AT+CMGS="+9745551"\r`.
/// Throws InvalidNumber for a SendMessage with a malformed number.
std::string render_at(const AtCommand& command);

/// Inverse of render_at; accepts the line with or without its CR.
/// Throws UnparseableLine.
AtCommand parse_at_command(std::string_view line);

// ---- responses (modem -> host) ---------------------------------------------

struct ModemOk
{
  bool operator==(const ModemOk&) const = default;
};
struct ModemErrorResponse
{
  bool operator==(const ModemErrorResponse&) const = default;
};
struct Prompt
{
  bool operator==(const Prompt&) const = default;
};
struct MessageRef
{
  std::uint64_t ref = 0;
  bool operator==(const MessageRef&) const = default;
};
/// `+CMGL` header; the body travels on the following line.
struct InboxEntry
{
  int index = 0;
  std::string number;
  SimTime timestamp{};
  std::string body;
  bool operator==(const InboxEntry&) const = default;
};
struct NewMessageNotice
{
  int index = 0;
  bool operator==(const NewMessageNotice&) const = default;
};

using ModemResponse = std::variant<ModemOk, ModemErrorResponse, Prompt, MessageRef, InboxEntry, NewMessageNotice>;

/// Parses one CR/LF-stripped response line. An InboxEntry comes back with an
/// empty body. Throws UnparseableLine.
ModemResponse parse_modem_line(std::string_view line);

/// The modem's own renderer: one line, or two for an InboxEntry (header and
/// body). No line terminators.
std::vector<std::string> render_modem_response(const ModemResponse& response);

// ---- messages --------------------------------------------------------------

enum class SmsDirection
{
  in,
  out,
};

struct SmsMessage
{
  SmsDirection direction = SmsDirection::out;
  std::string number;
  std::string body;
  SimTime at{};
  std::uint64_t ref = 0;
};

struct InboundSms
{
  int index = 0;
  std::string phone;
  std::string body;
  SimTime received_at{};
};

/// Serial transcript: `>>` lines to the modem, `<<` lines from it, with the
/// 0x1A terminator shown as `<CTRL-Z>` and CRs dropped.
class ExchangeLog
{
public:
  void to_modem(std::string_view bytes);
  void from_modem(std::string_view line);
  [[nodiscard]] const std::vector<std::string>& lines() const { return m_lines; }
  [[nodiscard]] std::string text() const;

private:
  std::vector<std::string> m_lines;
};

/// Simulated GSM shield. Speaks text-mode AT over a line interface.
class ModemEmulator
{
public:
  /// Feeds one command line (ending in CR) or, after a prompt, one message
  /// body (ending in 0x1A). Returns the response lines.
  std::vector<std::string> write(std::string_view bytes);

  /// A message from the network lands in SIM storage. Returns the
  /// unsolicited `+CMTI` line the modem emits.
  std::string receive(const std::string& number, const std::string& body, SimTime at);

  /// Messages handed to the network, in send order.
  [[nodiscard]] const std::vector<SmsMessage>& sent() const { return m_sent; }
  [[nodiscard]] bool registered() const { return m_registered; }
  [[nodiscard]] bool text_mode() const { return m_text_mode; }
  [[nodiscard]] std::size_t stored() const { return m_storage.size(); }

  /// Network time, used to stamp outgoing messages.
  void set_clock(SimTime now) { m_clock = now; }

  /// Fault injection: the next message body is answered with ERROR.
  void fail_next_send() { m_fail_next_send = true; }

private:
  std::vector<std::string> handle_command(const AtCommand& command);

  SimTime m_clock{ 0 };
  bool m_registered = false;
  bool m_text_mode = false;
  std::optional<std::string> m_pending_number;
  bool m_fail_next_send = false;
  std::uint64_t m_next_ref = 1;
  std::map<int, InboxEntry> m_storage;
  std::vector<SmsMessage> m_sent;
};

struct SmsConfig
{
  double poll_interval_s = 2.0;
  double delivery_delay_s = 1.0;
  double drop_probability = 0.0;
  std::uint64_t seed = 1;
};

/// Host side of the serial link. Owns the emulator and the transcript.
class SmsGateway
{
public:
  /// AT+CREG=1 then AT+CMGF=1. Throws ModemError if either is refused.
  void initialize();

  /// Full text-mode send exchange. Throws NotRegistered, BodyTooLong,
  /// InvalidNumber or ModemError.
  std::uint64_t send_sms(const std::string& number, const std::string& body, SimTime now);

  /// Lists unread messages and deletes each one. Arrival order.
  std::vector<InboundSms> poll_inbox();

  /// Network-side arrival; the `+CMTI` notice goes into the transcript.
  int deliver_inbound(const std::string& number, const std::string& body, SimTime at);

  [[nodiscard]] bool ready() const { return m_ready; }
  [[nodiscard]] const ExchangeLog& log() const { return m_log; }
  ModemEmulator& modem() { return m_modem; }
  [[nodiscard]] const ModemEmulator& modem() const { return m_modem; }

private:
  std::vector<ModemResponse> exchange(const AtCommand& command);
  void expect_ok(const std::vector<ModemResponse>& responses, std::string_view what);

  ModemEmulator m_modem;
  ExchangeLog m_log;
  bool m_ready = false;
};

/// Handsets on the far side of the network.
class SmsNetwork
{
public:
  explicit SmsNetwork(SmsConfig config = {});

  /// Whether the network carries this message (drop-probability draw).
  bool carries();
  void deliver(const SmsMessage& message);

  [[nodiscard]] const std::vector<SmsMessage>& handset(const std::string& phone) const;
  [[nodiscard]] const std::map<std::string, std::vector<SmsMessage>>& handsets() const { return m_handsets; }
  [[nodiscard]] const SmsConfig& config() const { return m_config; }

private:
  SmsConfig m_config;
  std::mt19937_64 m_rng;
  std::map<std::string, std::vector<SmsMessage>> m_handsets;
};

enum class MessageKind
{
  welcome,
  bill,
};

/// Welcome: drop-off time and retrieval instructions. Bill: retrieval time,
/// billed minutes and amount due. Throws MissingField.
std::string compose_message(MessageKind kind, const ParkingTicket& ticket);

}  // namespace autopark
