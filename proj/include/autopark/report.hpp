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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autopark/controller.hpp"

namespace autopark {

struct ReportRow
{
  std::string vehicle_id;
  std::optional<std::uint64_t> ticket;
  std::string status;  // "ok" or "rejected:<Reason>"
  std::optional<double> entry_t;
  std::optional<double> park_complete_t;
  std::optional<double> retrieval_request_t;
  std::optional<double> exit_t;
  std::optional<double> parking_latency_s;
  std::optional<double> retrieval_latency_s;
  std::optional<std::string> amount;

  bool operator==(const ReportRow&) const = default;
};

struct ReportAggregates
{
  std::optional<double> max_parking_latency_s;
  std::optional<double> max_retrieval_latency_s;
  std::size_t occupancy_peak = 0;
  double pv_wh = 0.0;
  double grid_wh = 0.0;
  double load_wh = 0.0;
  double min_soc = 1.0;
  std::size_t max_concurrent_motors = 0;

  bool operator==(const ReportAggregates&) const = default;
};

struct RunReport
{
  std::vector<ReportRow> rows;
  ReportAggregates aggregates;

  bool operator==(const RunReport&) const = default;
};

/// Rows ordered by entry (or rejection) time, accepted before rejected at
/// equal times. Times are seconds with millisecond resolution.
RunReport build_report(const Controller& controller);

enum class ReportFormat
{
  table,
  csv,
  json_lines,
};

/// "table", "csv" or "json-lines".
std::optional<ReportFormat> parse_report_format(std::string_view name);

std::string format_report(const RunReport& report, ReportFormat format);

extern const char* const k_csv_header;

/// Rows only; aggregates are left at their defaults. Throws ParseError.
RunReport parse_csv_report(std::string_view text);
/// Rows and aggregates. Throws ParseError.
RunReport parse_json_lines_report(std::string_view text);

}  // namespace autopark
