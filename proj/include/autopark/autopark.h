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


#ifndef AUTOPARK_AUTOPARK_H
#define AUTOPARK_AUTOPARK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(AUTOPARK_BUILDING)
#    define AP_API __declspec(dllexport)
#  else
#    define AP_API __declspec(dllimport)
#  endif
#else
#  define AP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/** Opaque simulation handle. */
typedef struct ap_sim ap_sim;

typedef enum ap_status
{
  AP_OK = 0,
  AP_ERR_PARSE = 1,
  AP_ERR_UNSORTED_EVENTS = 2,
  AP_ERR_INVALID_CONFIG = 3,
  AP_ERR_INVARIANT = 4,
  AP_ERR_BUFFER_TOO_SMALL = 5,
  AP_ERR_INVALID_ARGUMENT = 6,
  AP_ERR_INTERNAL = 7
} ap_status;

typedef enum ap_report_format
{
  AP_REPORT_TABLE = 0,
  AP_REPORT_CSV = 1,
  AP_REPORT_JSON_LINES = 2
} ap_report_format;

/* Text outputs follow one rule: *needed receives the size including the
 * terminating NUL; when cap is smaller nothing is written and
 * AP_ERR_BUFFER_TOO_SMALL is returned. buf may be NULL when cap is 0. */

/** Empty simulation. config_text holds `key=value` lines and may be NULL. */
AP_API ap_status ap_sim_create(const char* config_text, ap_sim** out);
/** Simulation preloaded with every event of a scenario file. */
AP_API ap_status ap_sim_create_from_scenario(const char* scenario_text, ap_sim** out);
AP_API void ap_sim_destroy(ap_sim* sim);

/** One scenario event record; without `t=` it is scheduled at the current time. */
AP_API ap_status ap_sim_push_event(ap_sim* sim, const char* line);
/** Dispatches everything due up to until_ms; the clock ends there. */
AP_API ap_status ap_sim_advance(ap_sim* sim, int64_t until_ms);
AP_API ap_status ap_sim_run_to_completion(ap_sim* sim);
AP_API int64_t ap_sim_now_ms(const ap_sim* sim);

AP_API ap_status ap_sim_report(const ap_sim* sim, ap_report_format format, char* buf, size_t cap, size_t* needed);
AP_API ap_status ap_sim_trace(const ap_sim* sim, char* buf, size_t cap, size_t* needed);
/** Host/modem AT transcript. */
AP_API ap_status ap_sim_at_log(const ap_sim* sim, char* buf, size_t cap, size_t* needed);
AP_API size_t ap_sim_violation_count(const ap_sim* sim);

/** Runs the built-in corpus plus random_count seeded random scenarios. The
 * text output lists one line per failure. */
AP_API ap_status ap_self_check(uint64_t seed,
                               size_t random_count,
                               size_t* scenarios,
                               size_t* failures,
                               char* buf,
                               size_t cap,
                               size_t* needed);

/** Message of the last failed call on this thread, "" if none. */
AP_API const char* ap_last_error(void);
AP_API const char* ap_status_string(ap_status status);

#ifdef __cplusplus
}
#endif

#endif
