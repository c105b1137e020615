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


// autopark command line: batch runs, an interactive shell and the self-check.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autopark/autopark.h"

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_parse = 1;
constexpr int k_exit_violation = 2;

template<class F>
std::string fetch(F&& call)
{
  size_t needed = 0;
  call(nullptr, 0, &needed);
  std::vector<char> buf(needed);
  if (call(buf.data(), buf.size(), &needed) != AP_OK) {
    return {};
  }
  return std::string(buf.data());
}

bool read_file(const std::string& path, std::string& out)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool parse_format(const std::string& name, ap_report_format& out)
{
  if (name == "table") out = AP_REPORT_TABLE;
  else if (name == "csv") out = AP_REPORT_CSV;
  else if (name == "json-lines") out = AP_REPORT_JSON_LINES;
  else return false;
  return true;
}

std::string report_of(const ap_sim* sim, ap_report_format fmt)
{
  return fetch([&](char* b, size_t c, size_t* n) { return ap_sim_report(sim, fmt, b, c, n); });
}

std::string trace_of(const ap_sim* sim)
{
  return fetch([&](char* b, size_t c, size_t* n) { return ap_sim_trace(sim, b, c, n); });
}

int cmd_run(const std::string& path, const std::string& format, const std::string& trace_path)
{
  ap_report_format fmt{};
  if (!parse_format(format, fmt)) {
    std::cerr << "unknown report format '" << format << "'\n";
    return k_exit_parse;
  }
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "cannot read " << path << "\n";
    return k_exit_parse;
  }
  ap_sim* sim = nullptr;
  if (const auto st = ap_sim_create_from_scenario(text.c_str(), &sim); st != AP_OK) {
    std::cerr << path << ": " << ap_status_string(st) << ": " << ap_last_error() << "\n";
    return k_exit_parse;
  }
  const auto st = ap_sim_run_to_completion(sim);
  std::cout << report_of(sim, fmt);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    out << trace_of(sim);
  }
  const auto violations = ap_sim_violation_count(sim);
  ap_sim_destroy(sim);
  if (st != AP_OK || violations > 0) {
    std::cerr << violations << " invariant violation(s); first: " << ap_last_error() << "\n";
    return k_exit_violation;
  }
  return k_exit_ok;
}

void repl_help()
{
  std::cout << "event lines:  [t=<s>] kind=<arrival|sms_in|payment|irradiance|fault|fault_cleared> key=value...\n"
               "tick <s>      advance the clock by s seconds\n"
               "run           dispatch every pending event\n"
               "report [fmt]  table (default), csv or json-lines\n"
               "trace         print the trace so far\n"
               "at            print the modem transcript\n"
               "now           print the clock\n"
               "quit\n";
}

int cmd_repl(const std::string& config_path)
{
  std::string config;
  if (!config_path.empty() && !read_file(config_path, config)) {
    std::cerr << "cannot read " << config_path << "\n";
    return k_exit_parse;
  }
  ap_sim* sim = nullptr;
  if (const auto st = ap_sim_create(config.c_str(), &sim); st != AP_OK) {
    std::cerr << ap_status_string(st) << ": " << ap_last_error() << "\n";
    return k_exit_parse;
  }
  const bool interactive = ::isatty(STDIN_FILENO) != 0;
  std::string line;
  while (true) {
    if (interactive) std::cout << "autopark> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    std::istringstream words(line);
    std::string cmd;
    words >> cmd;
    if (cmd.empty() || cmd.front() == '#') continue;
    if (cmd == "quit" || cmd == "exit") break;
    ap_status st = AP_OK;
    if (cmd == "help") {
      repl_help();
    } else if (cmd == "tick") {
      double s = 0.0;
      if (!(words >> s) || s < 0.0) {
        std::cout << "error: tick needs a non-negative number of seconds\n";
        continue;
      }
      st = ap_sim_advance(sim, ap_sim_now_ms(sim) + std::llround(s * 1000.0));
    } else if (cmd == "run") {
      st = ap_sim_run_to_completion(sim);
    } else if (cmd == "report") {
      std::string name = "table";
      words >> name;
      ap_report_format fmt{};
      if (!parse_format(name, fmt)) {
        std::cout << "error: unknown report format '" << name << "'\n";
        continue;
      }
      std::cout << report_of(sim, fmt);
    } else if (cmd == "trace") {
      std::cout << trace_of(sim);
    } else if (cmd == "at") {
      std::cout << fetch([&](char* b, size_t c, size_t* n) { return ap_sim_at_log(sim, b, c, n); });
    } else if (cmd == "now") {
      std::cout << "t=" << static_cast<double>(ap_sim_now_ms(sim)) / 1000.0 << " s\n";
    } else {
      st = ap_sim_push_event(sim, line.c_str());
    }
    if (st != AP_OK) {
      std::cout << "error: " << ap_status_string(st) << ": " << ap_last_error() << "\n";
    }
  }
  const auto violations = ap_sim_violation_count(sim);
  ap_sim_destroy(sim);
  return violations > 0 ? k_exit_violation : k_exit_ok;
}

int cmd_check(std::uint64_t seed, std::size_t count)
{
  size_t scenarios = 0;
  size_t failures = 0;
  const auto text = fetch(
    [&](char* b, size_t c, size_t* n) { return ap_self_check(seed, count, &scenarios, &failures, b, c, n); });
  std::cout << text;
  std::cout << scenarios << " scenarios, " << failures << " failed\n";
  return failures > 0 ? k_exit_violation : k_exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "autopark: automated parking garage simulator" };
  app.require_subcommand(1);

  std::string scenario_path;
  std::string format = "table";
  std::string trace_path;
  auto* run = app.add_subcommand("run", "Run a scenario file and print the report");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--report", format, "table, csv or json-lines")->check(CLI::IsMember({ "table", "csv", "json-lines" }));
  run->add_option("--trace", trace_path, "Write the event trace to this file");

  std::string config_path;
  auto* repl = app.add_subcommand("repl", "Interactive shell over the same event grammar");
  repl->add_option("--config", config_path, "File of key=value configuration overrides");

  std::uint64_t seed = 1;
  std::size_t count = 200;
  auto* check = app.add_subcommand("check", "Invariant self-test on the built-in and random scenarios");
  check->add_option("--seed", seed, "First seed of the random scenarios");
  check->add_option("--count", count, "Number of random scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? k_exit_ok : k_exit_parse;
  }

  if (*run) return cmd_run(scenario_path, format, trace_path);
  if (*repl) return cmd_repl(config_path);
  return cmd_check(seed, count);
}
