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

#include "autopark/power.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace autopark {

PvMeasuredCurve::PvMeasuredCurve()
  : PvMeasuredCurve({ { 0.0, 0.601 }, { 18.36, 0.540 }, { 22.31, 0.0 } })
{
}

PvMeasuredCurve::PvMeasuredCurve(std::vector<PvPoint> anchors)
  : m_anchors(std::move(anchors))
{
  if (m_anchors.size() < 2) {
    throw Error(ErrorCode::invalid_config, "a V-I curve needs at least two points");
  }
  for (std::size_t i = 1; i < m_anchors.size(); ++i) {
    if (!(m_anchors[i].voltage_v > m_anchors[i - 1].voltage_v) ||
        m_anchors[i].current_a > m_anchors[i - 1].current_a) {
      throw Error(ErrorCode::invalid_config, "V-I anchors must rise in voltage and not rise in current");
    }
  }
}

double PvMeasuredCurve::current_at(double voltage_v) const
{
  if (voltage_v <= m_anchors.front().voltage_v) {
    return m_anchors.front().current_a;
  }
  if (voltage_v >= m_anchors.back().voltage_v) {
    return 0.0;
  }
  const auto hi = std::upper_bound(m_anchors.begin(), m_anchors.end(), voltage_v,
                                   [](double v, const PvPoint& p) { return v < p.voltage_v; });
  const auto lo = hi - 1;
  if (voltage_v == lo->voltage_v) {
    return lo->current_a;
  }
  const double f = (voltage_v - lo->voltage_v) / (hi->voltage_v - lo->voltage_v);
  return lo->current_a + f * (hi->current_a - lo->current_a);
}

double pv_current_at(double voltage_v, double irradiance_scale, const PvMeasuredCurve& curve)
{
  if (voltage_v < 0.0 || irradiance_scale < 0.0 || irradiance_scale > 1.0) {
    throw Error(ErrorCode::invalid_config,
                fmt::format("pv_current_at({}, {}) outside the module's range", voltage_v, irradiance_scale));
  }
  return curve.current_at(voltage_v) * irradiance_scale;
}

MaxPowerPoint pv_max_power(double irradiance_scale, const PvMeasuredCurve& curve)
{
  MaxPowerPoint best;
  const auto n = static_cast<long>(std::ceil(curve.open_circuit_v() / 0.01));
  for (long i = 0; i <= n; ++i) {
    const double v = static_cast<double>(i) / 100.0;
    const double a = pv_current_at(v, irradiance_scale, curve);
    if (v * a > best.power_w) {
      best = { v, a, v * a };
    }
  }
  return best;
}

double required_battery_current(int motors, double motor_power_w, double bus_voltage_v)
{
  if (motors < 0 || !(motor_power_w > 0.0) || !(bus_voltage_v > 0.0)) {
    throw Error(ErrorCode::invalid_config, "motor count, power and bus voltage must be positive");
  }
  return motors * motor_power_w / bus_voltage_v;
}

PowerTickRecord power_tick(BatteryState& battery,
                           double irradiance_scale,
                           std::size_t powered_motors,
                           double motor_power_w,
                           double dt_s,
                           const PvMeasuredCurve& curve,
                           ChargeControllerSpec controller)
{
  if (!(dt_s > 0.0)) {
    throw Error(ErrorCode::internal, "power_tick needs dt > 0");
  }
  const double v = battery.bus_voltage_v;
  const double dt_h = dt_s / 3600.0;

  PowerTickRecord rec;
  rec.dt_s = dt_s;
  rec.charge_current_a = std::min(pv_current_at(v, irradiance_scale, curve), controller.max_charge_current_a);
  rec.load_current_a = static_cast<double>(powered_motors) * motor_power_w / v;
  rec.load_wh = rec.load_current_a * dt_h * v;

  const double net_a = rec.charge_current_a - rec.load_current_a;
  if (net_a >= 0.0) {
    const double headroom_ah = (1.0 - battery.soc) * battery.capacity_ah;
    const double stored_ah = std::min(net_a * dt_h, headroom_ah);
    battery.soc = std::min(1.0, battery.soc + stored_ah / battery.capacity_ah);
    rec.battery_delta_wh = stored_ah * v;
    rec.pv_wh = rec.load_wh + rec.battery_delta_wh;
  } else {
    const double deficit_ah = -net_a * dt_h;
    const double from_battery_ah = std::min(deficit_ah, battery.soc * battery.capacity_ah);
    battery.soc = std::max(0.0, battery.soc - from_battery_ah / battery.capacity_ah);
    rec.battery_delta_wh = -from_battery_ah * v;
    rec.grid_wh = (deficit_ah - from_battery_ah) * v;
    rec.pv_wh = rec.charge_current_a * dt_h * v;
  }
  return rec;
}

PowerModel::PowerModel(PowerConfig config, double bus_voltage_v, double motor_power_w)
  : m_battery{ config.battery_capacity_ah, config.initial_soc, bus_voltage_v }
  , m_controller{ config.charge_limit_a }
  , m_motor_power_w(motor_power_w)
  , m_scale(0.0)
{
  if (!(config.battery_capacity_ah > 0.0) || config.initial_soc < 0.0 || config.initial_soc > 1.0 ||
      !(config.charge_limit_a > 0.0)) {
    throw Error(ErrorCode::invalid_config, "battery capacity, initial soc or charge limit out of range");
  }
  set_irradiance(config.irradiance_w_per_m2);
  m_report.min_soc = m_battery.soc;
}

void PowerModel::set_irradiance(double w_per_m2)
{
  if (w_per_m2 < 0.0 || w_per_m2 > 1000.0) {
    throw Error(ErrorCode::invalid_config, fmt::format("irradiance {} W/m2 outside [0, 1000]", w_per_m2));
  }
  m_scale = w_per_m2 / 1000.0;
}

void PowerModel::advance(SimTime now, std::size_t powered_motors)
{
  if (now > m_last) {
    const auto rec = power_tick(m_battery, m_scale, powered_motors, m_motor_power_w, to_seconds(now - m_last), m_curve,
                                m_controller);
    m_report.pv_wh += rec.pv_wh;
    m_report.grid_wh += rec.grid_wh;
    m_report.load_wh += rec.load_wh;
    m_report.min_soc = std::min(m_report.min_soc, m_battery.soc);
    m_last = now;
  }
  m_report.max_concurrent_motors = std::max(m_report.max_concurrent_motors, powered_motors);
}

}  // namespace autopark
