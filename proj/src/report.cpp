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


#include "autopark/report.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "autopark/scenario.hpp"

namespace autopark {

const char* const k_csv_header =
  "vehicle_id,ticket,status,entry_t,park_complete_t,retrieval_request_t,exit_t,parking_latency_s,"
  "retrieval_latency_s,amount";

namespace {

double secs(SimTime t)
{
  return static_cast<double>(t.count()) / 1000.0;
}

std::optional<double> secs(const std::optional<SimTime>& t)
{
  return t ? std::optional<double>(secs(*t)) : std::nullopt;
}

std::optional<double> max_of(const std::optional<double>& a, const std::optional<double>& b)
{
  if (!a) return b;
  if (!b) return a;
  return std::max(*a, *b);
}

std::string fmt_opt(const std::optional<double>& v)
{
  return v ? fmt::format("{:.3f}", *v) : std::string{};
}

std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_csv(std::string_view line, std::size_t line_no)
{
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back().push_back(c);
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quote");
  return out;
}

std::optional<double> opt_double(const std::string& s, std::size_t line_no)
{
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(line_no, fmt::format("bad number '{}'", s));
  return v;
}

nlohmann::json opt_json(const std::optional<double>& v)
{
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> json_opt(const nlohmann::json& j, const char* key)
{
  const auto& v = j.at(key);
  return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

}  // namespace

RunReport build_report(const Controller& controller)
{
  struct Keyed
  {
    std::tuple<double, int, std::size_t> key;
    ReportRow row;
  };
  std::vector<Keyed> keyed;

  for (const auto& [id, rec] : controller.records()) {
    ReportRow r;
    r.vehicle_id = rec.vehicle_id;
    r.ticket = id.value;
    r.status = "ok";
    r.entry_t = secs(rec.entry);
    r.park_complete_t = secs(rec.park_complete);
    r.retrieval_request_t = secs(rec.retrieval_request);
    r.exit_t = secs(rec.exit_ready);
    if (rec.park_complete) r.parking_latency_s = secs(*rec.park_complete - rec.entry);
    if (rec.exit_ready && rec.retrieval_request) r.retrieval_latency_s = secs(*rec.exit_ready - *rec.retrieval_request);
    if (rec.amount) r.amount = rec.amount->to_string();
    keyed.push_back({ { *r.entry_t, 0, id.value }, std::move(r) });
  }
  std::size_t i = 0;
  for (const auto& rej : controller.rejections()) {
    ReportRow r;
    r.vehicle_id = rej.vehicle_id;
    r.status = fmt::format("rejected:{}", to_string(rej.reason));
    r.entry_t = secs(rej.at);
    keyed.push_back({ { *r.entry_t, 1, i++ }, std::move(r) });
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });

  RunReport report;
  for (auto& k : keyed) {
    report.aggregates.max_parking_latency_s = max_of(report.aggregates.max_parking_latency_s, k.row.parking_latency_s);
    report.aggregates.max_retrieval_latency_s =
      max_of(report.aggregates.max_retrieval_latency_s, k.row.retrieval_latency_s);
    report.rows.push_back(std::move(k.row));
  }
  const auto& energy = controller.power().report();
  report.aggregates.occupancy_peak = controller.occupancy_peak();
  report.aggregates.pv_wh = energy.pv_wh;
  report.aggregates.grid_wh = energy.grid_wh;
  report.aggregates.load_wh = energy.load_wh;
  report.aggregates.min_soc = energy.min_soc;
  report.aggregates.max_concurrent_motors = std::max(energy.max_concurrent_motors, controller.fleet().relays().max_concurrent());
  return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view name)
{
  if (name == "table") return ReportFormat::table;
  if (name == "csv") return ReportFormat::csv;
  if (name == "json-lines") return ReportFormat::json_lines;
  return std::nullopt;
}

std::string format_report(const RunReport& report, ReportFormat format)
{
  std::string out;
  switch (format) {
    case ReportFormat::csv:
      out = k_csv_header;
      out.push_back('\n');
      for (const auto& r : report.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.vehicle_id),
                           r.ticket ? std::to_string(*r.ticket) : std::string{}, r.status, fmt_opt(r.entry_t),
                           fmt_opt(r.park_complete_t), fmt_opt(r.retrieval_request_t), fmt_opt(r.exit_t),
                           fmt_opt(r.parking_latency_s), fmt_opt(r.retrieval_latency_s), r.amount.value_or(""));
      }
      break;
    case ReportFormat::json_lines:
      for (const auto& r : report.rows) {
        nlohmann::ordered_json j;
        j["type"] = "ticket";
        j["vehicle_id"] = r.vehicle_id;
        j["ticket"] = r.ticket ? nlohmann::ordered_json(*r.ticket) : nlohmann::ordered_json(nullptr);
        j["status"] = r.status;
        j["entry_t"] = opt_json(r.entry_t);
        j["park_complete_t"] = opt_json(r.park_complete_t);
        j["retrieval_request_t"] = opt_json(r.retrieval_request_t);
        j["exit_t"] = opt_json(r.exit_t);
        j["parking_latency_s"] = opt_json(r.parking_latency_s);
        j["retrieval_latency_s"] = opt_json(r.retrieval_latency_s);
        j["amount"] = r.amount ? nlohmann::ordered_json(*r.amount) : nlohmann::ordered_json(nullptr);
        out += j.dump();
        out.push_back('\n');
      }
      {
        const auto& a = report.aggregates;
        nlohmann::ordered_json j;
        j["type"] = "summary";
        j["max_parking_latency_s"] = opt_json(a.max_parking_latency_s);
        j["max_retrieval_latency_s"] = opt_json(a.max_retrieval_latency_s);
        j["occupancy_peak"] = a.occupancy_peak;
        j["pv_wh"] = a.pv_wh;
        j["grid_wh"] = a.grid_wh;
        j["load_wh"] = a.load_wh;
        j["min_soc"] = a.min_soc;
        j["max_concurrent_motors"] = a.max_concurrent_motors;
        out += j.dump();
        out.push_back('\n');
      }
      break;
    case ReportFormat::table: {
      out += fmt::format("{:<12} {:>6} {:<24} {:>9} {:>9} {:>9} {:>9} {:>8} {:>8} {:>8}\n", "vehicle", "ticket",
                         "status", "entry", "parked", "request", "exit", "park_s", "retr_s", "amount");
      auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.1f}", *v) : std::string{ "-" }; };
      for (const auto& r : report.rows) {
        out += fmt::format("{:<12} {:>6} {:<24} {:>9} {:>9} {:>9} {:>9} {:>8} {:>8} {:>8}\n", r.vehicle_id,
                           r.ticket ? std::to_string(*r.ticket) : "-", r.status, cell(r.entry_t),
                           cell(r.park_complete_t), cell(r.retrieval_request_t), cell(r.exit_t),
                           cell(r.parking_latency_s), cell(r.retrieval_latency_s), r.amount.value_or("-"));
      }
      const auto& a = report.aggregates;
      out += fmt::format("\nmax parking latency   {} s\n", cell(a.max_parking_latency_s));
      out += fmt::format("max retrieval latency {} s\n", cell(a.max_retrieval_latency_s));
      out += fmt::format("occupancy peak        {}\n", a.occupancy_peak);
      out += fmt::format("max concurrent motors {}\n", a.max_concurrent_motors);
      out += fmt::format("energy pv/grid/load   {:.4f} / {:.4f} / {:.4f} Wh\n", a.pv_wh, a.grid_wh, a.load_wh);
      out += fmt::format("min state of charge   {:.4f}\n", a.min_soc);
      break;
    }
  }
  return out;
}

RunReport parse_csv_report(std::string_view text)
{
  RunReport report;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!header) {
      if (line != k_csv_header) throw ParseError(line_no, "unexpected csv header");
      header = true;
      continue;
    }
    const auto f = split_csv(line, line_no);
    if (f.size() != 10) throw ParseError(line_no, fmt::format("expected 10 fields, got {}", f.size()));
    ReportRow r;
    r.vehicle_id = f[0];
    if (!f[1].empty()) r.ticket = static_cast<std::uint64_t>(*opt_double(f[1], line_no));
    r.status = f[2];
    r.entry_t = opt_double(f[3], line_no);
    r.park_complete_t = opt_double(f[4], line_no);
    r.retrieval_request_t = opt_double(f[5], line_no);
    r.exit_t = opt_double(f[6], line_no);
    r.parking_latency_s = opt_double(f[7], line_no);
    r.retrieval_latency_s = opt_double(f[8], line_no);
    if (!f[9].empty()) r.amount = f[9];
    report.rows.push_back(std::move(r));
  }
  if (!header) throw ParseError(1, "missing csv header");
  return report;
}

RunReport parse_json_lines_report(std::string_view text)
{
  RunReport report;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "ticket") {
        ReportRow r;
        r.vehicle_id = j.at("vehicle_id").get<std::string>();
        if (!j.at("ticket").is_null()) r.ticket = j.at("ticket").get<std::uint64_t>();
        r.status = j.at("status").get<std::string>();
        r.entry_t = json_opt(j, "entry_t");
        r.park_complete_t = json_opt(j, "park_complete_t");
        r.retrieval_request_t = json_opt(j, "retrieval_request_t");
        r.exit_t = json_opt(j, "exit_t");
        r.parking_latency_s = json_opt(j, "parking_latency_s");
        r.retrieval_latency_s = json_opt(j, "retrieval_latency_s");
        if (!j.at("amount").is_null()) r.amount = j.at("amount").get<std::string>();
        report.rows.push_back(std::move(r));
      } else if (type == "summary") {
        auto& a = report.aggregates;
        a.max_parking_latency_s = json_opt(j, "max_parking_latency_s");
        a.max_retrieval_latency_s = json_opt(j, "max_retrieval_latency_s");
        a.occupancy_peak = j.at("occupancy_peak").get<std::size_t>();
        a.pv_wh = j.at("pv_wh").get<double>();
        a.grid_wh = j.at("grid_wh").get<double>();
        a.load_wh = j.at("load_wh").get<double>();
        a.min_soc = j.at("min_soc").get<double>();
        a.max_concurrent_motors = j.at("max_concurrent_motors").get<std::size_t>();
      } else {
        throw ParseError(line_no, fmt::format("unknown record type '{}'", type));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return report;
}

}  // namespace autopark
