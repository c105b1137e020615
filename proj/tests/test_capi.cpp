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

#include <string>
#include <vector>

#include "autopark/autopark.h"

namespace {

std::string report(ap_sim* sim, ap_report_format fmt)
{
  size_t needed = 0;
  CHECK(ap_sim_report(sim, fmt, nullptr, 0, &needed) == AP_ERR_BUFFER_TOO_SMALL);
  std::vector<char> buf(needed);
  REQUIRE(ap_sim_report(sim, fmt, buf.data(), buf.size(), &needed) == AP_OK);
  return std::string(buf.data());
}

}  // namespace

TEST_CASE("scenario through the C API")
{
  const char* text =
    "t=0 kind=arrival vehicle=CAR-1 length_mm=4200 phone=+15550001\n"
    "t=600 kind=sms_in phone=+15550001 body=\"retrieve\"\n"
    "t=720 kind=payment vehicle=CAR-1\n";
  ap_sim* sim = nullptr;
  REQUIRE(ap_sim_create_from_scenario(text, &sim) == AP_OK);
  REQUIRE(sim != nullptr);
  CHECK(ap_sim_run_to_completion(sim) == AP_OK);
  CHECK(ap_sim_violation_count(sim) == 0);
  CHECK(ap_sim_now_ms(sim) == 734000);
  const auto csv = report(sim, AP_REPORT_CSV);
  CHECK(csv.find("CAR-1,1,ok,0.000,24.000,600.000,622.000,24.000,22.000,0.50") != std::string::npos);

  size_t needed = 0;
  ap_sim_at_log(sim, nullptr, 0, &needed);
  std::vector<char> log(needed);
  REQUIRE(ap_sim_at_log(sim, log.data(), log.size(), &needed) == AP_OK);
  CHECK(std::string(log.data()).find(">>AT+CMGL=\"REC UNREAD\"") != std::string::npos);
  ap_sim_destroy(sim);
}

TEST_CASE("interactive use")
{
  ap_sim* sim = nullptr;
  REQUIRE(ap_sim_create("floors=1\nslots_per_floor=2\n", &sim) == AP_OK);
  CHECK(ap_sim_push_event(sim, "kind=arrival vehicle=A length_mm=4000 phone=+1") == AP_OK);
  CHECK(ap_sim_advance(sim, 30000) == AP_OK);
  CHECK(ap_sim_now_ms(sim) == 30000);
  CHECK(report(sim, AP_REPORT_JSON_LINES).find("\"park_complete_t\":24.0") != std::string::npos);
  CHECK(ap_sim_advance(sim, 1000) == AP_ERR_INVALID_ARGUMENT);
  CHECK(ap_sim_push_event(sim, "t=1 kind=fault_cleared") == AP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ap_last_error()).find("SchedulingInPast") != std::string::npos);
  CHECK(ap_sim_push_event(sim, "kind=warp") == AP_ERR_PARSE);
  ap_sim_destroy(sim);
}

TEST_CASE("error codes")
{
  ap_sim* sim = nullptr;
  CHECK(ap_sim_create_from_scenario("t=1 kind=fault_cleared\nt=0 kind=fault_cleared\n", &sim) ==
        AP_ERR_UNSORTED_EVENTS);
  CHECK(sim == nullptr);
  CHECK(ap_sim_create_from_scenario("t=0 kind=arrival vehicle=A\n", &sim) == AP_ERR_PARSE);
  CHECK(std::string(ap_last_error()).find("line 1") != std::string::npos);
  CHECK(ap_sim_create("floors=0", &sim) == AP_ERR_PARSE);
  CHECK(ap_sim_create(nullptr, nullptr) == AP_ERR_INVALID_ARGUMENT);
  CHECK(ap_sim_run_to_completion(nullptr) == AP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ap_status_string(AP_ERR_BUFFER_TOO_SMALL)) == "buffer too small");

  REQUIRE(ap_sim_create(nullptr, &sim) == AP_OK);
  char tiny[4];
  size_t needed = 0;
  CHECK(ap_sim_report(sim, AP_REPORT_CSV, tiny, sizeof tiny, &needed) == AP_ERR_BUFFER_TOO_SMALL);
  CHECK(needed > sizeof tiny);
  CHECK(ap_sim_report(sim, static_cast<ap_report_format>(9), tiny, sizeof tiny, &needed) == AP_ERR_INVALID_ARGUMENT);
  ap_sim_destroy(sim);
  ap_sim_destroy(nullptr);
}

TEST_CASE("self-check through the C API")
{
  size_t scenarios = 0;
  size_t failures = 1;
  size_t needed = 0;
  char buf[1] = { 'x' };
  CHECK(ap_self_check(5, 10, &scenarios, &failures, buf, sizeof buf, &needed) == AP_OK);
  CHECK(failures == 0);
  CHECK(scenarios >= 10);
  CHECK(buf[0] == '\0');
}
