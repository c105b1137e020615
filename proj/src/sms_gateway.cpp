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

#include "autopark/sms_gateway.hpp"

#include <algorithm>
#include <charconv>

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

[[noreturn]] void unparseable(std::string_view line)
{
  throw Error(ErrorCode::unparseable_line, "'" + std::string(line) + "'");
}

std::string_view strip_eol(std::string_view s)
{
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

template<class Int>
std::optional<Int> parse_int(std::string_view s)
{
  Int v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) {
    return std::nullopt;
  }
  return v;
}

/// Strips a `"..."` pair; nullopt if not quoted.
std::optional<std::string_view> unquote(std::string_view s)
{
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
    return std::nullopt;
  }
  return s.substr(1, s.size() - 2);
}

constexpr std::string_view unread_filter = "\"REC UNREAD\"";

}  // namespace

std::string render_at(const AtCommand& command)
{
  return std::visit(overloaded{
                      [](const RegisterNetwork&) { return std::string{ "AT+CREG=1\r" }; },
                      [](const SetTextMode&) { return std::string{ "AT+CMGF=1\r" }; },
                      [](const SendMessage& c) {
                        if (!is_valid_phone(c.number)) {
                          throw Error(ErrorCode::invalid_number, "'" + c.number + "'");
                        }
                        return fmt::format("AT+CMGS=\"{}\"\r", c.number);
                      },
                      [](const ReadInbox&) { return fmt::format("AT+CMGL={}\r", unread_filter); },
                      [](const DeleteMessage& c) { return fmt::format("AT+CMGD={}\r", c.index); },
                    },
                    command);
}

AtCommand parse_at_command(std::string_view line)
{
  const auto s = strip_eol(line);
  if (s == "AT+CREG=1") return RegisterNetwork{};
  if (s == "AT+CMGF=1") return SetTextMode{};
  if (s.starts_with("AT+CMGL=") && s.substr(8) == unread_filter) return ReadInbox{};
  if (s.starts_with("AT+CMGS=")) {
    const auto number = unquote(s.substr(8));
    if (!number || !is_valid_phone(*number)) unparseable(line);
    return SendMessage{ std::string(*number) };
  }
  if (s.starts_with("AT+CMGD=")) {
    const auto index = parse_int<int>(s.substr(8));
    if (!index) unparseable(line);
    return DeleteMessage{ *index };
  }
  unparseable(line);
}

ModemResponse parse_modem_line(std::string_view line)
{
  const auto s = strip_eol(line);
  if (s == "OK") return ModemOk{};
  if (s == "ERROR") return ModemErrorResponse{};
  if (s == ">" || s == "> ") return Prompt{};
  if (s.starts_with("+CMGS: ")) {
    const auto ref = parse_int<std::uint64_t>(s.substr(7));
    if (!ref) unparseable(line);
    return MessageRef{ *ref };
  }
  if (s.starts_with("+CMTI: \"SM\",")) {
    const auto index = parse_int<int>(s.substr(12));
    if (!index) unparseable(line);
    return NewMessageNotice{ *index };
  }
  if (s.starts_with("+CMGL: ")) {
    // +CMGL: <index>,"REC UNREAD","<number>",,"<ms>"
    auto rest = s.substr(7);
    const auto c1 = rest.find(',');
    if (c1 == std::string_view::npos) unparseable(line);
    const auto index = parse_int<int>(rest.substr(0, c1));
    rest.remove_prefix(c1 + 1);
    if (!index || !rest.starts_with(unread_filter) || rest.size() <= unread_filter.size() ||
        rest[unread_filter.size()] != ',') {
      unparseable(line);
    }
    rest.remove_prefix(unread_filter.size() + 1);
    const auto sep = rest.find(",,");
    if (sep == std::string_view::npos) unparseable(line);
    const auto number = unquote(rest.substr(0, sep));
    const auto stamp = unquote(rest.substr(sep + 2));
    if (!number || !stamp || !is_valid_phone(*number)) unparseable(line);
    const auto ms = parse_int<std::int64_t>(*stamp);
    if (!ms) unparseable(line);
    return InboxEntry{ *index, std::string(*number), SimTime{ *ms }, {} };
  }
  unparseable(line);
}

std::vector<std::string> render_modem_response(const ModemResponse& response)
{
  return std::visit(overloaded{
                      [](const ModemOk&) { return std::vector<std::string>{ "OK" }; },
                      [](const ModemErrorResponse&) { return std::vector<std::string>{ "ERROR" }; },
                      [](const Prompt&) { return std::vector<std::string>{ ">" }; },
                      [](const MessageRef& r) { return std::vector<std::string>{ fmt::format("+CMGS: {}", r.ref) }; },
                      [](const InboxEntry& e) {
                        return std::vector<std::string>{
                          fmt::format("+CMGL: {},{},\"{}\",,\"{}\"", e.index, unread_filter, e.number,
                                      e.timestamp.count()),
                          e.body,
                        };
                      },
                      [](const NewMessageNotice& n) {
                        return std::vector<std::string>{ fmt::format("+CMTI: \"SM\",{}", n.index) };
                      },
                    },
                    response);
}

// ---- ExchangeLog ------------------------------------------------------------

void ExchangeLog::to_modem(std::string_view bytes)
{
  std::string shown;
  for (char c : bytes) {
    if (c == '\r' || c == '\n') continue;
    if (c == ctrl_z) {
      shown += "<CTRL-Z>";
    } else {
      shown.push_back(c);
    }
  }
  m_lines.push_back(">>" + shown);
}

void ExchangeLog::from_modem(std::string_view line)
{
  m_lines.push_back("<<" + std::string(strip_eol(line)));
}

std::string ExchangeLog::text() const
{
  std::string out;
  for (const auto& l : m_lines) {
    out += l;
    out.push_back('\n');
  }
  return out;
}

// ---- ModemEmulator ----------------------------------------------------------

std::vector<std::string> ModemEmulator::write(std::string_view bytes)
{
  if (m_pending_number) {
    // message body phase
    if (bytes.empty() || bytes.back() != ctrl_z) {
      m_pending_number.reset();
      return { "ERROR" };
    }
    const std::string number = *std::exchange(m_pending_number, std::nullopt);
    std::string body(bytes.substr(0, bytes.size() - 1));
    if (std::exchange(m_fail_next_send, false) || body.size() > max_sms_body) {
      return { "ERROR" };
    }
    const auto ref = m_next_ref++;
    m_sent.push_back(SmsMessage{ SmsDirection::out, number, std::move(body), m_clock, ref });
    auto lines = render_modem_response(MessageRef{ ref });
    lines.emplace_back("OK");
    return lines;
  }
  AtCommand command;
  try {
    command = parse_at_command(bytes);
  } catch (const Error&) {
    return { "ERROR" };
  }
  return handle_command(command);
}

std::vector<std::string> ModemEmulator::handle_command(const AtCommand& command)
{
  return std::visit(overloaded{
                      [&](const RegisterNetwork&) -> std::vector<std::string> {
                        m_registered = true;
                        return { "OK" };
                      },
                      [&](const SetTextMode&) -> std::vector<std::string> {
                        m_text_mode = true;
                        return { "OK" };
                      },
                      [&](const SendMessage& c) -> std::vector<std::string> {
                        if (!m_registered || !m_text_mode) return { "ERROR" };
                        m_pending_number = c.number;
                        return { ">" };
                      },
                      [&](const ReadInbox&) -> std::vector<std::string> {
                        if (!m_text_mode) return { "ERROR" };
                        std::vector<std::string> out;
                        for (const auto& [_, entry] : m_storage) {
                          for (auto& l : render_modem_response(entry)) {
                            out.push_back(std::move(l));
                          }
                        }
                        out.emplace_back("OK");
                        return out;
                      },
                      [&](const DeleteMessage& c) -> std::vector<std::string> {
                        if (m_storage.erase(c.index) == 0) return { "ERROR" };
                        return { "OK" };
                      },
                    },
                    command);
}

std::string ModemEmulator::receive(const std::string& number, const std::string& body, SimTime at)
{
  // lowest free storage index; arrival order is kept by the index only while
  // earlier messages are still stored, so the host sorts by timestamp too
  int index = 1;
  while (m_storage.contains(index)) {
    ++index;
  }
  m_storage.emplace(index, InboxEntry{ index, number, at, body });
  return render_modem_response(NewMessageNotice{ index }).front();
}

// ---- SmsGateway -------------------------------------------------------------

std::vector<ModemResponse> SmsGateway::exchange(const AtCommand& command)
{
  const auto line = render_at(command);
  m_log.to_modem(line);
  const auto replies = m_modem.write(line);
  std::vector<ModemResponse> out;
  for (std::size_t i = 0; i < replies.size(); ++i) {
    m_log.from_modem(replies[i]);
    ModemResponse r;
    try {
      r = parse_modem_line(replies[i]);
    } catch (const Error&) {
      // unparseable lines stay in the transcript; the exchange fails
      out.emplace_back(ModemErrorResponse{});
      continue;
    }
    if (auto* entry = std::get_if<InboxEntry>(&r); entry && i + 1 < replies.size()) {
      entry->body = replies[++i];
      m_log.from_modem(entry->body);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void SmsGateway::expect_ok(const std::vector<ModemResponse>& responses, std::string_view what)
{
  if (responses.empty() || !std::holds_alternative<ModemOk>(responses.back())) {
    throw Error(ErrorCode::modem_error, std::string(what) + " refused");
  }
  for (const auto& r : responses) {
    if (std::holds_alternative<ModemErrorResponse>(r)) {
      throw Error(ErrorCode::modem_error, std::string(what) + " failed");
    }
  }
}

void SmsGateway::initialize()
{
  expect_ok(exchange(RegisterNetwork{}), "AT+CREG");
  expect_ok(exchange(SetTextMode{}), "AT+CMGF");
  m_ready = true;
}

std::uint64_t SmsGateway::send_sms(const std::string& number, const std::string& body, SimTime now)
{
  if (!m_ready) {
    throw Error(ErrorCode::not_registered, "send before AT+CREG/AT+CMGF");
  }
  if (body.size() > max_sms_body) {
    throw Error(ErrorCode::body_too_long, fmt::format("{} chars", body.size()));
  }
  for (char c : body) {
    if (c == '\r' || c == '\n' || c == ctrl_z) {
      throw Error(ErrorCode::modem_error, "control character in message body");
    }
  }
  const auto prompt = exchange(SendMessage{ number });
  if (prompt.size() != 1 || !std::holds_alternative<Prompt>(prompt.front())) {
    throw Error(ErrorCode::modem_error, "no prompt for AT+CMGS");
  }

  std::string payload = body;
  payload.push_back(ctrl_z);
  m_modem.set_clock(now);
  m_log.to_modem(payload);
  std::optional<std::uint64_t> ref;
  bool ok = false;
  for (const auto& line : m_modem.write(payload)) {
    m_log.from_modem(line);
    try {
      const auto r = parse_modem_line(line);
      if (const auto* m = std::get_if<MessageRef>(&r)) ref = m->ref;
      if (std::holds_alternative<ModemOk>(r)) ok = true;
    } catch (const Error&) {
      ok = false;
      break;
    }
  }
  if (!ok || !ref) {
    throw Error(ErrorCode::modem_error, "message to " + number + " rejected");
  }
  return *ref;
}

std::vector<InboundSms> SmsGateway::poll_inbox()
{
  if (!m_ready) {
    throw Error(ErrorCode::not_registered, "poll before AT+CREG/AT+CMGF");
  }
  const auto listing = exchange(ReadInbox{});
  std::vector<InboundSms> out;
  for (const auto& r : listing) {
    if (const auto* e = std::get_if<InboxEntry>(&r)) {
      out.push_back(InboundSms{ e->index, e->number, e->body, e->timestamp });
    }
  }
  expect_ok(listing, "AT+CMGL");
  std::stable_sort(out.begin(), out.end(), [](const InboundSms& a, const InboundSms& b) {
    return a.received_at < b.received_at;
  });
  for (const auto& m : out) {
    expect_ok(exchange(DeleteMessage{ m.index }), "AT+CMGD");
  }
  return out;
}

int SmsGateway::deliver_inbound(const std::string& number, const std::string& body, SimTime at)
{
  const auto notice = m_modem.receive(number, body, at);
  m_log.from_modem(notice);
  return std::get<NewMessageNotice>(parse_modem_line(notice)).index;
}

// ---- SmsNetwork -------------------------------------------------------------

SmsNetwork::SmsNetwork(SmsConfig config)
  : m_config(config)
  , m_rng(config.seed)
{
}

bool SmsNetwork::carries()
{
  if (m_config.drop_probability <= 0.0) {
    return true;
  }
  return std::uniform_real_distribution<double>(0.0, 1.0)(m_rng) >= m_config.drop_probability;
}

void SmsNetwork::deliver(const SmsMessage& message)
{
  m_handsets[message.number].push_back(message);
}

const std::vector<SmsMessage>& SmsNetwork::handset(const std::string& phone) const
{
  static const std::vector<SmsMessage> empty;
  auto it = m_handsets.find(phone);
  return it == m_handsets.end() ? empty : it->second;
}

// ---- templates --------------------------------------------------------------

std::string compose_message(MessageKind kind, const ParkingTicket& ticket)
{
  std::string body;
  if (kind == MessageKind::welcome) {
    body = fmt::format("Parked at {}. Ticket {}. Reply to this number to retrieve your car.",
                       format_clock(ticket.entry_time), ticket.id.value);
  } else {
    if (!ticket.exit_time) {
      throw Error(ErrorCode::missing_field, fmt::format("ticket {} has no exit time", ticket.id.value));
    }
    if (!ticket.amount_due) {
      throw Error(ErrorCode::missing_field, fmt::format("ticket {} has no amount due", ticket.id.value));
    }
    body = fmt::format("Retrieved at {}. Duration {} min. Due: {}.", format_clock(*ticket.exit_time),
                       billed_minutes(ticket.entry_time, *ticket.exit_time), ticket.amount_due->to_string());
  }
  if (body.size() > max_sms_body) {
    throw Error(ErrorCode::body_too_long, fmt::format("{} chars", body.size()));
  }
  return body;
}

}  // namespace autopark
