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


#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "autopark/report.hpp"
#include "autopark/scenario.hpp"
#include "autopark/simulation.hpp"

#include <fmt/format.h>

using namespace autopark;
using namespace std::chrono_literals;

namespace {

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t parse_error_line(std::string_view text)
{
  try {
    (void)parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string parse_error_reason(std::string_view text)
{
  try {
    (void)parse_scenario(text);
  } catch (const ParseError& e) {
    return e.reason();
  }
  return {};
}

const char* const k_round_trip =
  "t=0 kind=arrival vehicle=CAR-1 length_mm=4200 phone=+15550001\n"
  "t=600 kind=sms_in phone=+15550001 body=\"retrieve\"\n"
  "t=720 kind=payment vehicle=CAR-1\n";

}  // namespace

TEST_CASE("minimal scenario")
{
  const auto sc = parse_scenario("t=0 kind=arrival vehicle=A length_mm=4000 phone=+1555\n");
  REQUIRE(sc.events.size() == 1);
  const auto& a = std::get<ArrivalEvent>(sc.events[0].payload);
  CHECK(a.vehicle.vehicle_id == "A");
  CHECK(a.vehicle.length_mm == 4000);
  CHECK(sc.events[0].line == 1);
}

TEST_CASE("events out of order are refused")
{
  try {
    (void)parse_scenario("t=5 kind=fault_cleared\nt=4 kind=fault_cleared\n");
    FAIL("expected UnsortedEvents");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsorted_events);
  }
}

TEST_CASE("parse errors name the line and the field")
{
  CHECK(parse_error_reason("t=0 kind=arrival vehicle=A length_mm=4000\n").find("'phone'") != std::string::npos);
  CHECK(parse_error_line("# c\n\nt=0 kind=arrival vehicle=A length_mm=4000\n") == 3);
  CHECK(parse_error_reason("t=0 kind=fault_cleared colour=red\n").find("unknown field 'colour'") != std::string::npos);
  CHECK(parse_error_reason("t=0 kind=teleport\n").find("unknown event kind") != std::string::npos);
  CHECK(parse_error_reason("kind=fault_cleared\n").find("'t'") != std::string::npos);
  CHECK(parse_error_reason("t=x kind=fault_cleared\n").find("not a number") != std::string::npos);
  CHECK(parse_error_reason("t=0 kind=payment ticket=1 vehicle=A\n").find("exactly one") != std::string::npos);
  CHECK(parse_error_reason("t=0 kind=fault belt=roof\n").find("unknown belt") != std::string::npos);
  CHECK(parse_error_reason("t=0 kind=sms_in phone=1 body=\"open\n").find("unterminated") != std::string::npos);
  CHECK(parse_error_reason("t=0 kind=fault_cleared\nconfig floors=2\n").find("precede") != std::string::npos);
  CHECK(parse_error_reason("config warp=9\n").find("unknown config key") != std::string::npos);
  CHECK(parse_error_line("config floors=0\n") == 0);
}

TEST_CASE("config lines and quoting")
{
  const auto sc = parse_scenario(
    "config floors=2 slots_per_floor=4 billing_rate_per_minute=0.1\n"
    "config auto_pay_s=15\n"
    "t=1.25 kind=sms_in phone=+1 body=\"say \\\"hi\\\" \\\\ bye\"\n");
  CHECK(sc.config.garage.floors == 2);
  CHECK(sc.config.garage.slots_per_floor == 4);
  CHECK(sc.config.garage.billing_rate_per_minute == 0.1);
  CHECK(sc.config.auto_pay_s == 15.0);
  REQUIRE(sc.events.size() == 1);
  CHECK(sc.events[0].at == 1250ms);
  CHECK(std::get<InboundSmsEvent>(sc.events[0].payload).body == "say \"hi\" \\ bye");
}

TEST_CASE("event lines default to the current time")
{
  const auto ev = parse_event_line("kind=payment ticket=3", 42s);
  CHECK(ev.at == 42s);
  CHECK(std::get<PaymentEvent>(ev.payload).ticket == TicketId{ 3 });
}

TEST_CASE("scenarios survive format and re-parse")
{
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto sc = random_scenario(seed);
    const auto again = parse_scenario(format_scenario(sc));
    REQUIRE(again.events.size() == sc.events.size());
    for (std::size_t i = 0; i < sc.events.size(); ++i) {
      REQUIRE(again.events[i].at == sc.events[i].at);
      REQUIRE(describe(again.events[i].payload) == describe(sc.events[i].payload));
    }
    CHECK(format_scenario(again) == format_scenario(sc));
  }
}

TEST_CASE("one round trip yields both latencies and a bill")
{
  const auto r = run_scenario(parse_scenario(k_round_trip));
  REQUIRE(r.report.rows.size() == 1);
  const auto& row = r.report.rows[0];
  CHECK(row.status == "ok");
  CHECK(row.ticket == 1u);
  CHECK(row.parking_latency_s == 24.0);
  CHECK(row.retrieval_request_t == 600.0);
  // poll at 602, 5 + 5 + 10 s of belts
  CHECK(row.exit_t == 622.0);
  CHECK(row.retrieval_latency_s == 22.0);
  // 600 s at 0.05 per minute
  CHECK(row.amount == "0.50");
  CHECK(r.violations.empty());
}

TEST_CASE("too long arrivals appear as rejected rows")
{
  const auto r = run_scenario(parse_scenario("t=0 kind=arrival vehicle=BUS length_mm=5001 phone=+1\n"));
  REQUIRE(r.report.rows.size() == 1);
  CHECK(r.report.rows[0].status == "rejected:TooLong");
  CHECK_FALSE(r.report.rows[0].ticket.has_value());
}

TEST_CASE("identical input gives identical bytes")
{
  const auto sc = random_scenario(77);
  const auto a = run_scenario(sc);
  const auto b = run_scenario(sc);
  CHECK(a.trace == b.trace);
  CHECK(format_report(a.report, ReportFormat::json_lines) == format_report(b.report, ReportFormat::json_lines));
}

TEST_CASE("trace of the reference round trip matches the golden file")
{
  const auto r = run_scenario(parse_scenario(k_round_trip));
  CHECK(r.trace == read_file(std::string(AUTOPARK_GOLDEN_DIR) + "/single_round_trip.trace"));
}

TEST_CASE("every scenario event is dispatched exactly once")
{
  const auto sc = parse_scenario(k_round_trip);
  const auto r = run_scenario(sc);
  for (const auto& ev : sc.events) {
    const auto needle = fmt::format("t={} ", ev.at.count());
    const auto detail = "detail=" + describe(ev.payload);
    std::size_t hits = 0;
    std::istringstream in(r.trace);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(needle, 0) == 0 && line.find(detail) != std::string::npos) ++hits;
    }
    CHECK(hits == 1);
  }
}

TEST_CASE("report formats")
{
  RunReport empty;
  CHECK(format_report(empty, ReportFormat::csv) == std::string(k_csv_header) + "\n");

  const auto r = run_scenario(parse_scenario(k_round_trip)).report;
  const auto csv = format_report(r, ReportFormat::csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.substr(csv.find('\n') + 1) == "CAR-1,1,ok,0.000,24.000,600.000,622.000,24.000,22.000,0.50\n");

  CHECK(parse_csv_report(csv).rows == r.rows);
  CHECK(parse_json_lines_report(format_report(r, ReportFormat::json_lines)) == r);
  CHECK(format_report(r, ReportFormat::table).find("CAR-1") != std::string::npos);
  CHECK(parse_report_format("json-lines") == ReportFormat::json_lines);
  CHECK_FALSE(parse_report_format("xml").has_value());
}

TEST_CASE("structured reports round-trip on random runs")
{
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const auto r = run_scenario(random_scenario(seed)).report;
    REQUIRE(parse_json_lines_report(format_report(r, ReportFormat::json_lines)) == r);
    REQUIRE(parse_csv_report(format_report(r, ReportFormat::csv)).rows == r.rows);
  }
}

TEST_CASE("csv quoting")
{
  RunReport r;
  ReportRow row;
  row.vehicle_id = "odd, \"name\"";
  row.status = "ok";
  r.rows.push_back(row);
  CHECK(parse_csv_report(format_report(r, ReportFormat::csv)).rows == r.rows);
  CHECK_THROWS_AS((void)parse_csv_report("nope\n"), ParseError);
  CHECK_THROWS_AS((void)parse_json_lines_report("{\"type\":\"ticket\"}\n"), ParseError);
}

TEST_CASE("built-in corpus passes the self-check")
{
  const auto r = self_check(1, 20);
  CHECK(r.scenarios == builtin_corpus().size() + 20);
  CHECK(r.failures == 0);
  for (const auto& m : r.messages) MESSAGE(m);
}

TEST_CASE("reference scenarios in the repository parse")
{
  for (const char* name : { "single.txt", "farthest_slot.txt" }) {
    CHECK_NOTHROW((void)parse_scenario(read_file(std::string(AUTOPARK_SCENARIO_DIR) + "/" + name)));
  }
}
