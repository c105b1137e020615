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


#include "autopark/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

namespace autopark {

ParseError::ParseError(std::size_t line, std::string reason)
  : Error(ErrorCode::parse_error, fmt::format("line {}: {}", line, reason))
  , m_line(line)
  , m_reason(std::move(reason))
{
}

namespace {

struct Field
{
  std::string key;
  std::string value;
};

std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Splits `key=value` tokens separated by blanks. A bare first word (like
/// `config`) comes back with an empty value and `bare` set.
std::vector<Field> tokenize(std::string_view text, std::size_t line, std::string* bare)
{
  std::vector<Field> out;
  std::size_t i = 0;
  const auto n = text.size();
  while (true) {
    while (i < n && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
    if (i >= n) break;
    const auto start = i;
    while (i < n && text[i] != '=' && text[i] != ' ' && text[i] != '\t') ++i;
    std::string key(text.substr(start, i - start));
    if (i >= n || text[i] != '=') {
      if (bare && out.empty() && bare->empty()) {
        *bare = key;
        continue;
      }
      throw ParseError(line, fmt::format("expected key=value, got '{}'", key));
    }
    ++i;
    std::string value;
    if (i < n && text[i] == '"') {
      ++i;
      bool closed = false;
      while (i < n) {
        const char c = text[i++];
        if (c == '"') {
          closed = true;
          break;
        }
        if (c == '\\' && i < n) {
          value.push_back(text[i++]);
          continue;
        }
        value.push_back(c);
      }
      if (!closed) throw ParseError(line, fmt::format("unterminated quote in '{}'", key));
    } else {
      const auto vstart = i;
      while (i < n && text[i] != ' ' && text[i] != '\t' && text[i] != '\r') ++i;
      value = std::string(text.substr(vstart, i - vstart));
    }
    if (key.empty()) throw ParseError(line, "empty key");
    if (std::any_of(out.begin(), out.end(), [&](const Field& f) { return f.key == key; })) {
      throw ParseError(line, fmt::format("duplicate field '{}'", key));
    }
    out.push_back({ std::move(key), std::move(value) });
  }
  return out;
}

double to_double(std::string_view key, std::string_view v, std::size_t line)
{
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ParseError(line, fmt::format("'{}' is not a number for {}", v, key));
  }
  return out;
}

std::int64_t to_int(std::string_view key, std::string_view v, std::size_t line)
{
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ParseError(line, fmt::format("'{}' is not an integer for {}", v, key));
  }
  return out;
}

SimTime to_time(std::string_view v, std::size_t line)
{
  const double s = to_double("t", v, line);
  if (s < 0.0) throw ParseError(line, "t must be >= 0");
  return from_seconds(s);
}

std::string fmt_seconds(SimTime t)
{
  return fmt::format("{}", static_cast<double>(t.count()) / 1000.0);
}

std::string quote(std::string_view s)
{
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

using Setter = std::function<void(SimulationConfig&, std::string_view, std::size_t)>;

template<class T>
Setter real(T SimulationConfig::*group, double T::*field)
{
  return [=](SimulationConfig& c, std::string_view v, std::size_t line) { c.*group.*field = to_double("", v, line); };
}

const std::map<std::string, Setter, std::less<>>& setters()
{
  static const std::map<std::string, Setter, std::less<>> table = {
    { "floors", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.floors = static_cast<int>(to_int("floors", v, l)); } },
    { "slots_per_floor", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.slots_per_floor = static_cast<int>(to_int("slots_per_floor", v, l)); } },
    { "max_vehicle_length_mm", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.max_vehicle_length_mm = to_int("max_vehicle_length_mm", v, l); } },
    { "billing_rate_per_minute", real(&SimulationConfig::garage, &GarageConfig::billing_rate_per_minute) },
    { "bus_voltage_v", real(&SimulationConfig::garage, &GarageConfig::bus_voltage_v) },
    { "belt_transit_s", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.kinematics.belt_transit_s = to_double("belt_transit_s", v, l); } },
    { "platform_load_s", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.kinematics.platform_load_s = to_double("platform_load_s", v, l); } },
    { "elevation_per_floor_s", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.kinematics.elevation_per_floor_s = to_double("elevation_per_floor_s", v, l); } },
    { "rotation_per_slot_s", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.kinematics.rotation_per_slot_s = to_double("rotation_per_slot_s", v, l); } },
    { "gate_actuation_s", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.kinematics.gate_actuation_s = to_double("gate_actuation_s", v, l); } },
    { "step_angle_main_deg", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.kinematics.step_angle_main_deg = to_double("step_angle_main_deg", v, l); } },
    { "step_angle_gate_deg", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.garage.kinematics.step_angle_gate_deg = to_double("step_angle_gate_deg", v, l); } },
    { "relay_budget", [](SimulationConfig& c, std::string_view v, std::size_t l) {
        const auto n = to_int("relay_budget", v, l);
        if (n < 0) throw ParseError(l, "relay_budget must be >= 0");
        c.fleet.relay_budget = static_cast<std::size_t>(n);
      } },
    { "motor_power_w", real(&SimulationConfig::fleet, &FleetConfig::motor_power_w) },
    { "poll_interval_s", real(&SimulationConfig::sms, &SmsConfig::poll_interval_s) },
    { "delivery_delay_s", real(&SimulationConfig::sms, &SmsConfig::delivery_delay_s) },
    { "drop_probability", real(&SimulationConfig::sms, &SmsConfig::drop_probability) },
    { "sms_seed", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.sms.seed = static_cast<std::uint64_t>(to_int("sms_seed", v, l)); } },
    { "battery_capacity_ah", real(&SimulationConfig::power, &PowerConfig::battery_capacity_ah) },
    { "initial_soc", real(&SimulationConfig::power, &PowerConfig::initial_soc) },
    { "irradiance_w_per_m2", real(&SimulationConfig::power, &PowerConfig::irradiance_w_per_m2) },
    { "charge_limit_a", real(&SimulationConfig::power, &PowerConfig::charge_limit_a) },
    { "auto_pay_s", [](SimulationConfig& c, std::string_view v, std::size_t l) { c.auto_pay_s = to_double("auto_pay_s", v, l); } },
  };
  return table;
}

std::string format_config(const SimulationConfig& c)
{
  const auto& k = c.garage.kinematics;
  std::string out = fmt::format(
    "config floors={} slots_per_floor={} max_vehicle_length_mm={} billing_rate_per_minute={} bus_voltage_v={}\n"
    "config belt_transit_s={} platform_load_s={} elevation_per_floor_s={} rotation_per_slot_s={} "
    "gate_actuation_s={} step_angle_main_deg={} step_angle_gate_deg={}\n"
    "config relay_budget={} motor_power_w={}\n"
    "config poll_interval_s={} delivery_delay_s={} drop_probability={} sms_seed={}\n"
    "config battery_capacity_ah={} initial_soc={} irradiance_w_per_m2={} charge_limit_a={}\n",
    c.garage.floors, c.garage.slots_per_floor, c.garage.max_vehicle_length_mm, c.garage.billing_rate_per_minute,
    c.garage.bus_voltage_v, k.belt_transit_s, k.platform_load_s, k.elevation_per_floor_s, k.rotation_per_slot_s,
    k.gate_actuation_s, k.step_angle_main_deg, k.step_angle_gate_deg, c.fleet.relay_budget, c.fleet.motor_power_w,
    c.sms.poll_interval_s, c.sms.delivery_delay_s, c.sms.drop_probability, c.sms.seed, c.power.battery_capacity_ah,
    c.power.initial_soc, c.power.irradiance_w_per_m2, c.power.charge_limit_a);
  if (c.auto_pay_s) {
    out += fmt::format("config auto_pay_s={}\n", *c.auto_pay_s);
  }
  return out;
}

class FieldSet
{
public:
  FieldSet(std::vector<Field> fields, std::string_view kind, std::size_t line)
    : m_fields(std::move(fields))
    , m_kind(kind)
    , m_line(line)
  {
  }

  std::optional<std::string> take(std::string_view key)
  {
    auto it = std::find_if(m_fields.begin(), m_fields.end(), [&](const Field& f) { return f.key == key; });
    if (it == m_fields.end()) return std::nullopt;
    auto v = std::move(it->value);
    m_fields.erase(it);
    return v;
  }

  std::string need(std::string_view key)
  {
    auto v = take(key);
    if (!v) throw ParseError(m_line, fmt::format("{} event is missing field '{}'", m_kind, key));
    return *v;
  }

  void done() const
  {
    if (!m_fields.empty()) {
      throw ParseError(m_line, fmt::format("unknown field '{}' for {} event", m_fields.front().key, m_kind));
    }
  }

private:
  std::vector<Field> m_fields;
  std::string_view m_kind;
  std::size_t m_line;
};

ScenarioEvent parse_fields(std::vector<Field> fields, SimTime default_time, std::size_t line)
{
  std::string kind;
  std::optional<std::string> t;
  {
    FieldSet fs(fields, "", line);
    t = fs.take("t");
    auto k = fs.take("kind");
    if (!k) throw ParseError(line, "missing field 'kind'");
    kind = *k;
  }
  std::erase_if(fields, [](const Field& f) { return f.key == "t" || f.key == "kind"; });
  FieldSet fs(std::move(fields), kind, line);

  ScenarioEvent ev;
  ev.line = line;
  ev.at = t ? to_time(*t, line) : default_time;

  if (kind == "arrival") {
    Vehicle v;
    v.vehicle_id = fs.need("vehicle");
    v.length_mm = to_int("length_mm", fs.need("length_mm"), line);
    v.phone = fs.need("phone");
    ev.payload = ArrivalEvent{ std::move(v) };
  } else if (kind == "sms_in") {
    auto phone = fs.need("phone");
    auto body = fs.need("body");
    ev.payload = InboundSmsEvent{ std::move(phone), std::move(body) };
  } else if (kind == "payment") {
    auto ticket = fs.take("ticket");
    auto vehicle = fs.take("vehicle");
    if (ticket.has_value() == vehicle.has_value()) {
      throw ParseError(line, "payment event needs exactly one of 'ticket' or 'vehicle'");
    }
    PaymentEvent p;
    if (ticket) {
      const auto id = to_int("ticket", *ticket, line);
      if (id <= 0) throw ParseError(line, "ticket must be > 0");
      p.ticket = TicketId{ static_cast<std::uint64_t>(id) };
    } else {
      p.vehicle_id = *vehicle;
    }
    ev.payload = std::move(p);
  } else if (kind == "irradiance") {
    const double w = to_double("w_per_m2", fs.need("w_per_m2"), line);
    if (w < 0.0 || w > 1000.0) throw ParseError(line, "w_per_m2 must lie in [0, 1000]");
    ev.payload = IrradianceEvent{ w };
  } else if (kind == "fault") {
    const auto name = fs.need("belt");
    const auto belt = BeltId::parse(name);
    if (!belt) throw ParseError(line, fmt::format("unknown belt '{}'", name));
    ev.payload = BeltFaultEvent{ *belt };
  } else if (kind == "fault_cleared") {
    ev.payload = FaultClearedEvent{};
  } else {
    throw ParseError(line, fmt::format("unknown event kind '{}'", kind));
  }
  fs.done();
  return ev;
}

}  // namespace

void apply_config(SimulationConfig& config, std::string_view key, std::string_view value, std::size_t line)
{
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) {
    throw ParseError(line, fmt::format("unknown config key '{}'", key));
  }
  it->second(config, value, line);
}

ScenarioEvent parse_event_line(std::string_view text, SimTime default_time, std::size_t line)
{
  return parse_fields(tokenize(trim(text), line, nullptr), default_time, line);
}

Scenario parse_scenario(std::string_view text)
{
  Scenario sc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::string bare;
    auto fields = tokenize(line, line_no, &bare);
    if (bare == "config") {
      if (!sc.events.empty()) throw ParseError(line_no, "config lines must precede events");
      for (const auto& f : fields) apply_config(sc.config, f.key, f.value, line_no);
      continue;
    }
    if (!bare.empty()) throw ParseError(line_no, fmt::format("unexpected word '{}'", bare));
    if (std::none_of(fields.begin(), fields.end(), [](const Field& f) { return f.key == "t"; })) {
      throw ParseError(line_no, "missing field 't'");
    }
    auto ev = parse_fields(std::move(fields), SimTime{ 0 }, line_no);
    if (!sc.events.empty() && ev.at < sc.events.back().at) {
      throw Error(ErrorCode::unsorted_events, fmt::format("line {}: t={} s is earlier than the previous event",
                                                          line_no, fmt_seconds(ev.at)));
    }
    sc.events.push_back(std::move(ev));
  }
  try {
    validate(sc.config);
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
  return sc;
}

SimulationConfig parse_config(std::string_view text)
{
  SimulationConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::string bare;
    const auto fields = tokenize(line, line_no, &bare);
    if (!bare.empty() && bare != "config") throw ParseError(line_no, fmt::format("unexpected word '{}'", bare));
    for (const auto& f : fields) apply_config(config, f.key, f.value, line_no);
  }
  try {
    validate(config);
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
  return config;
}

std::string format_scenario(const Scenario& scenario)
{
  std::string out = format_config(scenario.config);
  for (const auto& ev : scenario.events) {
    const auto t = fmt_seconds(ev.at);
    std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, ArrivalEvent>) {
          out += fmt::format("t={} kind=arrival vehicle={} length_mm={} phone={}\n", t, quote(e.vehicle.vehicle_id),
                             e.vehicle.length_mm, e.vehicle.phone);
        } else if constexpr (std::is_same_v<E, InboundSmsEvent>) {
          out += fmt::format("t={} kind=sms_in phone={} body={}\n", t, e.phone, quote(e.body));
        } else if constexpr (std::is_same_v<E, PaymentEvent>) {
          out += e.ticket ? fmt::format("t={} kind=payment ticket={}\n", t, e.ticket->value)
                          : fmt::format("t={} kind=payment vehicle={}\n", t, quote(e.vehicle_id));
        } else if constexpr (std::is_same_v<E, IrradianceEvent>) {
          out += fmt::format("t={} kind=irradiance w_per_m2={}\n", t, e.w_per_m2);
        } else if constexpr (std::is_same_v<E, BeltFaultEvent>) {
          out += fmt::format("t={} kind=fault belt={}\n", t, e.belt.to_string());
        } else if constexpr (std::is_same_v<E, FaultClearedEvent>) {
          out += fmt::format("t={} kind=fault_cleared\n", t);
        } else {
          throw Error(ErrorCode::internal, "internal events have no scenario form");
        }
      },
      ev.payload);
  }
  return out;
}

Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& options)
{
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto tenths = [](double s) { return from_seconds(std::round(s * 10.0) / 10.0); };

  Scenario sc;
  sc.config.auto_pay_s = std::round(uniform(5.0, 60.0));
  const auto max_len = sc.config.garage.max_vehicle_length_mm;
  const auto n = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, options.max_vehicles))(rng);

  std::vector<ScenarioEvent> events;
  for (std::size_t i = 0; i < n; ++i) {
    Vehicle v;
    v.vehicle_id = fmt::format("CAR-{}", i + 1);
    v.phone = fmt::format("+1555{:04}", i + 1);
    v.length_mm = chance(options.too_long_fraction)
                    ? std::uniform_int_distribution<std::int64_t>(max_len + 1, 2 * max_len)(rng)
                    : std::uniform_int_distribution<std::int64_t>(2500, max_len)(rng);
    const double t = uniform(0.0, options.arrival_window_s);
    events.push_back({ tenths(t), ArrivalEvent{ v }, 0 });
    if (chance(options.retrieve_fraction)) {
      events.push_back({ tenths(t + uniform(60.0, 1500.0)), InboundSmsEvent{ v.phone, "retrieve" }, 0 });
    }
  }
  if (chance(options.fault_probability)) {
    const auto belts = belt_layout(sc.config.garage.slots_per_floor);
    const auto belt = belts[std::uniform_int_distribution<std::size_t>(0, belts.size() - 1)(rng)];
    const double t = uniform(0.0, options.arrival_window_s);
    events.push_back({ tenths(t), BeltFaultEvent{ belt }, 0 });
    events.push_back({ tenths(t + uniform(5.0, 120.0)), FaultClearedEvent{}, 0 });
  }
  const auto sun_changes = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int i = 0; i < sun_changes; ++i) {
    events.push_back({ tenths(uniform(0.0, options.arrival_window_s)), IrradianceEvent{ std::round(uniform(0.0, 1000.0)) }, 0 });
  }
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.at < b.at; });
  sc.events = std::move(events);
  return sc;
}

const std::vector<NamedScenario>& builtin_corpus()
{
  static const std::vector<NamedScenario> corpus = {
    { "single_round_trip",
      "t=0 kind=arrival vehicle=CAR-1 length_mm=4200 phone=+15550001\n"
      "t=600 kind=sms_in phone=+15550001 body=\"retrieve\"\n"
      "t=720 kind=payment vehicle=CAR-1\n" },
    { "too_long",
      "t=0 kind=arrival vehicle=BUS-1 length_mm=9000 phone=+15550002\n"
      "t=5 kind=arrival vehicle=CAR-2 length_mm=5000 phone=+15550003\n" },
    { "duplicate_phone",
      "t=0 kind=arrival vehicle=CAR-1 length_mm=4000 phone=+15550001\n"
      "t=60 kind=arrival vehicle=CAR-2 length_mm=4000 phone=+15550001\n" },
    { "full_garage",
      "config floors=1 slots_per_floor=2\n"
      "t=0 kind=arrival vehicle=CAR-1 length_mm=4000 phone=+15550001\n"
      "t=1 kind=arrival vehicle=CAR-2 length_mm=4000 phone=+15550002\n"
      "t=2 kind=arrival vehicle=CAR-3 length_mm=4000 phone=+15550003\n"
      "t=300 kind=sms_in phone=+15550001 body=\"out\"\n"
      "t=400 kind=payment ticket=1\n"
      "t=500 kind=arrival vehicle=CAR-3 length_mm=4000 phone=+15550003\n" },
    { "fault_mid_parking",
      "t=0 kind=arrival vehicle=CAR-1 length_mm=4000 phone=+15550001\n"
      "t=20 kind=fault belt=platform\n"
      "t=60 kind=fault_cleared\n"
      "t=400 kind=sms_in phone=+15550001 body=\"retrieve\"\n"
      "t=500 kind=payment vehicle=CAR-1\n" },
    { "rush_hour",
      "config auto_pay_s=20\n"
      "t=0 kind=arrival vehicle=CAR-1 length_mm=4100 phone=+15550001\n"
      "t=1 kind=arrival vehicle=CAR-2 length_mm=4200 phone=+15550002\n"
      "t=2 kind=arrival vehicle=CAR-3 length_mm=4300 phone=+15550003\n"
      "t=3 kind=arrival vehicle=CAR-4 length_mm=4400 phone=+15550004\n"
      "t=90 kind=sms_in phone=+15550001 body=\"retrieve\"\n"
      "t=91 kind=sms_in phone=+15550002 body=\"retrieve\"\n"
      "t=92 kind=sms_in phone=+15550099 body=\"who\"\n"
      "t=300 kind=sms_in phone=+15550004 body=\"retrieve\"\n" },
    { "night_shift",
      "config initial_soc=0.001 irradiance_w_per_m2=0\n"
      "t=0 kind=arrival vehicle=CAR-1 length_mm=4000 phone=+15550001\n"
      "t=200 kind=irradiance w_per_m2=800\n"
      "t=300 kind=sms_in phone=+15550001 body=\"retrieve\"\n"
      "t=400 kind=payment vehicle=CAR-1\n" },
  };
  return corpus;
}

}  // namespace autopark
