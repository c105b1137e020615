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


#include "autopark/autopark.h"

#include <cstring>
#include <memory>
#include <string>

#include "autopark/scenario.hpp"
#include "autopark/simulation.hpp"

struct ap_sim
{
  std::unique_ptr<autopark::Simulation> sim;
};

namespace {

thread_local std::string g_last_error;

ap_status fail(ap_status status, const std::string& message)
{
  g_last_error = message;
  return status;
}

ap_status status_of(const autopark::Error& e)
{
  switch (e.code()) {
    case autopark::ErrorCode::parse_error: return AP_ERR_PARSE;
    case autopark::ErrorCode::unsorted_events: return AP_ERR_UNSORTED_EVENTS;
    case autopark::ErrorCode::invalid_config: return AP_ERR_INVALID_CONFIG;
    case autopark::ErrorCode::scheduling_in_past: return AP_ERR_INVALID_ARGUMENT;
    default: return AP_ERR_INTERNAL;
  }
}

template<class F>
ap_status guarded(F&& f)
{
  try {
    g_last_error.clear();
    return f();
  } catch (const autopark::Error& e) {
    return fail(status_of(e), e.what());
  } catch (const std::exception& e) {
    return fail(AP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(AP_ERR_INTERNAL, "unknown exception");
  }
}

ap_status copy_out(const std::string& text, char* buf, size_t cap, size_t* needed)
{
  if (needed) *needed = text.size() + 1;
  if (cap < text.size() + 1) {
    return fail(AP_ERR_BUFFER_TOO_SMALL, "buffer too small");
  }
  if (!buf) {
    return fail(AP_ERR_INVALID_ARGUMENT, "buf is NULL");
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return AP_OK;
}

}  // namespace

extern "C" {

ap_status ap_sim_create(const char* config_text, ap_sim** out)
{
  return guarded([&] {
    if (!out) return fail(AP_ERR_INVALID_ARGUMENT, "out is NULL");
    *out = nullptr;
    const auto config = autopark::parse_config(config_text ? config_text : "");
    *out = new ap_sim{ std::make_unique<autopark::Simulation>(config) };
    return AP_OK;
  });
}

ap_status ap_sim_create_from_scenario(const char* scenario_text, ap_sim** out)
{
  return guarded([&] {
    if (!out || !scenario_text) return fail(AP_ERR_INVALID_ARGUMENT, "NULL argument");
    *out = nullptr;
    const auto scenario = autopark::parse_scenario(scenario_text);
    auto handle = std::make_unique<ap_sim>();
    handle->sim = std::make_unique<autopark::Simulation>(scenario.config);
    for (const auto& ev : scenario.events) {
      handle->sim->push(ev.at, ev.payload);
    }
    *out = handle.release();
    return AP_OK;
  });
}

void ap_sim_destroy(ap_sim* sim)
{
  delete sim;
}

ap_status ap_sim_push_event(ap_sim* sim, const char* line)
{
  return guarded([&] {
    if (!sim || !line) return fail(AP_ERR_INVALID_ARGUMENT, "NULL argument");
    auto ev = autopark::parse_event_line(line, sim->sim->now());
    sim->sim->push(ev.at, std::move(ev.payload));
    return AP_OK;
  });
}

ap_status ap_sim_advance(ap_sim* sim, int64_t until_ms)
{
  return guarded([&] {
    if (!sim) return fail(AP_ERR_INVALID_ARGUMENT, "sim is NULL");
    if (autopark::SimTime{ until_ms } < sim->sim->now()) return fail(AP_ERR_INVALID_ARGUMENT, "time runs forward only");
    const auto before = sim->sim->violations().size();
    sim->sim->run_until(autopark::SimTime{ until_ms });
    if (sim->sim->violations().size() > before) return fail(AP_ERR_INVARIANT, sim->sim->violations().back());
    return AP_OK;
  });
}

ap_status ap_sim_run_to_completion(ap_sim* sim)
{
  return guarded([&] {
    if (!sim) return fail(AP_ERR_INVALID_ARGUMENT, "sim is NULL");
    const auto before = sim->sim->violations().size();
    sim->sim->run_to_completion();
    if (sim->sim->violations().size() > before) return fail(AP_ERR_INVARIANT, sim->sim->violations().back());
    return AP_OK;
  });
}

int64_t ap_sim_now_ms(const ap_sim* sim)
{
  return sim ? sim->sim->now().count() : 0;
}

ap_status ap_sim_report(const ap_sim* sim, ap_report_format format, char* buf, size_t cap, size_t* needed)
{
  return guarded([&] {
    if (!sim) return fail(AP_ERR_INVALID_ARGUMENT, "sim is NULL");
    autopark::ReportFormat f;
    switch (format) {
      case AP_REPORT_TABLE: f = autopark::ReportFormat::table; break;
      case AP_REPORT_CSV: f = autopark::ReportFormat::csv; break;
      case AP_REPORT_JSON_LINES: f = autopark::ReportFormat::json_lines; break;
      default: return fail(AP_ERR_INVALID_ARGUMENT, "unknown report format");
    }
    return copy_out(autopark::format_report(sim->sim->report(), f), buf, cap, needed);
  });
}

ap_status ap_sim_trace(const ap_sim* sim, char* buf, size_t cap, size_t* needed)
{
  return guarded([&] {
    if (!sim) return fail(AP_ERR_INVALID_ARGUMENT, "sim is NULL");
    return copy_out(sim->sim->trace(), buf, cap, needed);
  });
}

ap_status ap_sim_at_log(const ap_sim* sim, char* buf, size_t cap, size_t* needed)
{
  return guarded([&] {
    if (!sim) return fail(AP_ERR_INVALID_ARGUMENT, "sim is NULL");
    return copy_out(sim->sim->controller().gateway().log().text(), buf, cap, needed);
  });
}

size_t ap_sim_violation_count(const ap_sim* sim)
{
  return sim ? sim->sim->violations().size() : 0;
}

ap_status ap_self_check(uint64_t seed,
                        size_t random_count,
                        size_t* scenarios,
                        size_t* failures,
                        char* buf,
                        size_t cap,
                        size_t* needed)
{
  return guarded([&] {
    const auto r = autopark::self_check(seed, random_count);
    if (scenarios) *scenarios = r.scenarios;
    if (failures) *failures = r.failures;
    std::string text;
    for (const auto& m : r.messages) {
      text += m;
      text.push_back('\n');
    }
    return copy_out(text, buf, cap, needed);
  });
}

const char* ap_last_error(void)
{
  return g_last_error.c_str();
}

const char* ap_status_string(ap_status status)
{
  switch (status) {
    case AP_OK: return "ok";
    case AP_ERR_PARSE: return "parse error";
    case AP_ERR_UNSORTED_EVENTS: return "unsorted events";
    case AP_ERR_INVALID_CONFIG: return "invalid config";
    case AP_ERR_INVARIANT: return "invariant violation";
    case AP_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case AP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

}  // extern "C"
