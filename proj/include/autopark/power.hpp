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
#include <span>
#include <vector>

#include "autopark/core_model.hpp"

namespace autopark {

/// Nameplate of the 10 W polycrystalline test module (STC, AM1.5 1000 W/m2).
struct PvModuleSpec
{
  double pm_w = 10.0;
  double vmp_v = 18.0;
  double imp_a = 0.56;
  double voc_v = 21.24;
  double isc_a = 0.61;

  [[nodiscard]] bool valid() const { return 0.0 < vmp_v && vmp_v < voc_v && 0.0 < imp_a && imp_a < isc_a; }
};

struct PvPoint
{
  double voltage_v = 0.0;
  double current_a = 0.0;
};

/// Piecewise-linear V-I curve through bench measurements, ordered by voltage.
class PvMeasuredCurve
{
public:
  /// Short circuit, maximum power and open circuit as measured at full sun.
  PvMeasuredCurve();
  explicit PvMeasuredCurve(std::vector<PvPoint> anchors);

  [[nodiscard]] std::span<const PvPoint> anchors() const { return m_anchors; }
  [[nodiscard]] double open_circuit_v() const { return m_anchors.back().voltage_v; }

  /// Current at `voltage_v` for full sun; 0 beyond open circuit.
  [[nodiscard]] double current_at(double voltage_v) const;

private:
  std::vector<PvPoint> m_anchors;
};

/// Measured curve scaled linearly by irradiance (1 = 1000 W/m2).
double pv_current_at(double voltage_v, double irradiance_scale, const PvMeasuredCurve& curve = PvMeasuredCurve{});

struct MaxPowerPoint
{
  double voltage_v = 0.0;
  double current_a = 0.0;
  double power_w = 0.0;
};

/// Grid search over [0, Voc] at 10 mV resolution.
MaxPowerPoint pv_max_power(double irradiance_scale, const PvMeasuredCurve& curve = PvMeasuredCurve{});

/// n motors of `motor_power_w` each on a `bus_voltage_v` bus: n * P / V.
double required_battery_current(int motors, double motor_power_w, double bus_voltage_v);

struct BatteryState
{
  double capacity_ah = 7.0;
  double soc = 1.0;
  double bus_voltage_v = 12.0;
};

struct ChargeControllerSpec
{
  double max_charge_current_a = 3.0;
};

struct PowerTickRecord
{
  double dt_s = 0.0;
  double charge_current_a = 0.0;  // PV current offered at the bus
  double load_current_a = 0.0;
  double pv_wh = 0.0;             // PV energy actually used (surplus is curtailed when full)
  double grid_wh = 0.0;
  double load_wh = 0.0;
  double battery_delta_wh = 0.0;
};

/// Advances the battery by dt_s with a constant load. The PV module works at
/// bus voltage; its current is capped by the charge controller. An empty
/// battery hands the deficit to the grid meter.
PowerTickRecord power_tick(BatteryState& battery,
                           double irradiance_scale,
                           std::size_t powered_motors,
                           double motor_power_w,
                           double dt_s,
                           const PvMeasuredCurve& curve = PvMeasuredCurve{},
                           ChargeControllerSpec controller = {});

struct EnergyReport
{
  double pv_wh = 0.0;
  double grid_wh = 0.0;
  double load_wh = 0.0;
  double min_soc = 1.0;
  std::size_t max_concurrent_motors = 0;
};

struct PowerConfig
{
  double battery_capacity_ah = 7.0;
  double initial_soc = 1.0;
  double irradiance_w_per_m2 = 1000.0;
  double charge_limit_a = 3.0;
};

/// Battery and meters advanced from event to event.
class PowerModel
{
public:
  PowerModel(PowerConfig config, double bus_voltage_v, double motor_power_w);

  /// Integrates from the last call up to `now` with `powered_motors` running.
  void advance(SimTime now, std::size_t powered_motors);
  /// Takes effect from the last advance() on.
  void set_irradiance(double w_per_m2);

  [[nodiscard]] const BatteryState& battery() const { return m_battery; }
  [[nodiscard]] const EnergyReport& report() const { return m_report; }
  [[nodiscard]] double irradiance_scale() const { return m_scale; }

private:
  BatteryState m_battery;
  ChargeControllerSpec m_controller;
  PvMeasuredCurve m_curve;
  double m_motor_power_w;
  double m_scale;
  SimTime m_last{ 0 };
  EnergyReport m_report;
};

}  // namespace autopark
