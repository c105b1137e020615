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

#include <cmath>
#include <random>

#include "autopark/power.hpp"

using namespace autopark;
using namespace std::chrono_literals;

namespace {

// current by hand from the three bench points
double oracle_current(double v)
{
  if (v <= 18.36) return 0.601 + (v / 18.36) * (0.540 - 0.601);
  if (v >= 22.31) return 0.0;
  return 0.540 + ((v - 18.36) / (22.31 - 18.36)) * (0.0 - 0.540);
}

}  // namespace

TEST_CASE("measured anchors are reproduced exactly")
{
  CHECK(pv_current_at(0.0, 1.0) == 0.601);
  CHECK(pv_current_at(18.36, 1.0) == 0.540);
  CHECK(pv_current_at(22.31, 1.0) == 0.0);
  CHECK(pv_current_at(30.0, 1.0) == 0.0);
  CHECK_THROWS_AS((void)pv_current_at(-1.0, 1.0), Error);
  CHECK_THROWS_AS((void)pv_current_at(5.0, 1.5), Error);
}

TEST_CASE("interpolation agrees with a hand oracle")
{
  for (int i = 0; i <= 2300; ++i) {
    const double v = i / 100.0;
    REQUIRE(pv_current_at(v, 1.0) == doctest::Approx(oracle_current(v)).epsilon(1e-12));
  }
}

TEST_CASE("current is non-increasing in voltage and linear in irradiance")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> volts(0.0, 23.0);
  std::uniform_real_distribution<double> scale(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const double a = volts(rng);
    const double b = volts(rng);
    const double k = scale(rng);
    REQUIRE(pv_current_at(std::min(a, b), 1.0) >= pv_current_at(std::max(a, b), 1.0));
    REQUIRE(pv_current_at(a, k) == k * pv_current_at(a, 1.0));
  }
}

TEST_CASE("maximum power point sits on the middle anchor")
{
  const auto mpp = pv_max_power(1.0);
  CHECK(mpp.voltage_v == doctest::Approx(18.36).epsilon(1e-12));
  CHECK(mpp.power_w == doctest::Approx(18.36 * 0.540).epsilon(1e-12));
  CHECK(mpp.power_w >= 9.8);
  CHECK(mpp.power_w <= 10.0);
  CHECK(mpp.power_w <= PvModuleSpec{}.pm_w + 0.2);
  CHECK(PvModuleSpec{}.valid());
  CHECK(pv_max_power(0.0).power_w == 0.0);
}

TEST_CASE("battery current for concurrent motors")
{
  CHECK(required_battery_current(9, 10.0, 12.0) == 7.5);
  CHECK(std::abs(required_battery_current(2, 10.0, 12.0) - 5.0 / 3.0) < 1e-12);
  CHECK(required_battery_current(0, 10.0, 12.0) == 0.0);
  CHECK_THROWS_AS((void)required_battery_current(-1, 10.0, 12.0), Error);
}

TEST_CASE("an hour of full sun with no load charges at the bus operating point")
{
  BatteryState b{ 7.0, 0.5, 12.0 };
  const auto rec = power_tick(b, 1.0, 0, 10.0, 3600.0);
  const double expected = oracle_current(12.0) / 7.0;
  CHECK(rec.charge_current_a == doctest::Approx(oracle_current(12.0)).epsilon(1e-12));
  CHECK(b.soc - 0.5 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(b.soc - 0.5 == doctest::Approx(0.080163).epsilon(1e-5));
}

TEST_CASE("two motors with no sun drain (20/12)/7 per hour")
{
  BatteryState b{ 7.0, 1.0, 12.0 };
  const auto rec = power_tick(b, 0.0, 2, 10.0, 3600.0);
  CHECK(1.0 - b.soc == doctest::Approx((20.0 / 12.0) / 7.0).epsilon(1e-12));
  CHECK(1.0 - b.soc == doctest::Approx(0.238).epsilon(1e-3));
  CHECK(rec.load_wh == doctest::Approx(20.0));
  CHECK(rec.grid_wh == 0.0);
}

TEST_CASE("an empty battery hands the load to the grid")
{
  BatteryState b{ 7.0, 0.0, 12.0 };
  const auto rec = power_tick(b, 0.0, 2, 10.0, 3600.0);
  CHECK(b.soc == 0.0);
  CHECK(rec.grid_wh == doctest::Approx(20.0));
}

TEST_CASE("the controller caps the charge current")
{
  const PvMeasuredCurve big({ { 0.0, 10.0 }, { 20.0, 9.0 }, { 25.0, 0.0 } });
  BatteryState b{ 7.0, 0.0, 12.0 };
  const auto rec = power_tick(b, 1.0, 0, 10.0, 60.0, big, ChargeControllerSpec{ 3.0 });
  CHECK(rec.charge_current_a == 3.0);
}

TEST_CASE("energy balances on every tick")
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    BatteryState b{ 7.0, u(rng), 12.0 };
    const double before = b.soc;
    const auto rec = power_tick(b, u(rng), rng() % 3, 10.0, 1.0 + u(rng) * 7200.0);
    const double battery_wh = (b.soc - before) * b.capacity_ah * b.bus_voltage_v;
    const double lhs = rec.pv_wh + rec.grid_wh;
    const double rhs = battery_wh + rec.load_wh;
    REQUIRE(std::abs(lhs - rhs) <= 1e-9 * std::max({ 1.0, std::abs(lhs), std::abs(rhs) }));
    REQUIRE(b.soc >= 0.0);
    REQUIRE(b.soc <= 1.0);
    REQUIRE(rec.charge_current_a <= 3.0);
  }
}

TEST_CASE("power model meters between events")
{
  PowerModel m(PowerConfig{ 7.0, 1.0, 0.0, 3.0 }, 12.0, 10.0);
  m.advance(0ms, 0);
  m.advance(3600s, 2);
  CHECK(m.report().load_wh == doctest::Approx(20.0));
  CHECK(m.report().max_concurrent_motors == 2);
  CHECK(m.report().min_soc == doctest::Approx(1.0 - (20.0 / 12.0) / 7.0));
  m.set_irradiance(1000.0);
  CHECK(m.irradiance_scale() == 1.0);
  CHECK_THROWS_AS(m.set_irradiance(1200.0), Error);
}
