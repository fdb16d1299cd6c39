#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fsev/drivetrain.hpp"

using namespace fsev;
using Catch::Approx;

namespace {
const MotorSpec kMotor{};
InverterState fresh() {
    InverterState inv;
    inv.dc_link_v = 600.0;
    return inv;
}
}  // namespace

TEST_CASE("envelope pins the data-sheet points at 600 V") {
    CHECK(max_torque(10000.0, 600.0, fresh(), kMotor) == Approx(21.0));
    CHECK(max_torque(20000.0, 600.0, fresh(), kMotor) ==
          Approx(35000.0 / rpm_to_rad_s(20000.0)).margin(1e-9));
    CHECK(max_torque(20000.0, 600.0, fresh(), kMotor) == Approx(16.71).margin(0.01));
    CHECK(max_torque(20001.0, 600.0, fresh(), kMotor) == 0.0);
    CHECK_THROWS_AS(max_torque(-1.0, 600.0, fresh(), kMotor), Error);
}

TEST_CASE("exhausted peak window clamps to rated torque at rated power") {
    InverterState inv = fresh();
    inv.peak_exhausted = true;
    inv.peak_window_used_s = kMotor.peak_window_s;
    const double t = max_torque(12000.0, 600.0, inv, kMotor);
    CHECK(t == Approx(9.8));
    const double p = t * rpm_to_rad_s(12000.0);
    CHECK(p == Approx(12315.0).margin(10.0));  // Table-rated 12.3 kW point
    CHECK(p == Approx(kMotor.rated_power_w).epsilon(0.005));
}

TEST_CASE("envelope is continuous at base speed") {
    const double base_rpm = rad_s_to_rpm(kMotor.max_power_w / kMotor.max_torque_nm);
    CHECK(base_rpm == Approx(15915.5).margin(0.1));
    const double below = max_torque(base_rpm - 0.01, 600.0, fresh(), kMotor);
    const double above = max_torque(base_rpm + 0.01, 600.0, fresh(), kMotor);
    CHECK(below == Approx(above).margin(1e-4));
}

TEST_CASE("envelope is monotone in speed and voltage") {
    double prev = 1e9;
    for (double rpm = 0.0; rpm <= 20000.0; rpm += 500.0) {
        const double t = max_torque(rpm, 600.0, fresh(), kMotor);
        REQUIRE(t <= prev + 1e-12);
        prev = t;
    }
    prev = 0.0;
    for (double vdc = 100.0; vdc <= 600.0; vdc += 50.0) {
        const double t = max_torque(18000.0, vdc, fresh(), kMotor);
        REQUIRE(t >= prev - 1e-12);
        prev = t;
    }
}

TEST_CASE("peak window engages at 1.24 s within one tick") {
    const double dt = 0.001;
    InverterState inv = fresh();
    long clamp_tick = -1;
    for (long tick = 0; tick < 2000; ++tick) {
        const double allowed = max_torque(10000.0, 600.0, inv, kMotor);
        if (allowed < 21.0) {
            clamp_tick = tick;
            CHECK(allowed == Approx(9.8));
            break;
        }
        inv = step_peak_window(inv, allowed, dt, kMotor);
    }
    REQUIRE(clamp_tick > 0);
    CHECK(std::abs(clamp_tick * dt - 1.24) <= dt + 1e-9);
}

TEST_CASE("torque at or below rated never consumes the window") {
    InverterState inv = fresh();
    for (int i = 0; i < 5000; ++i) inv = step_peak_window(inv, 9.8, 0.001, kMotor);
    CHECK(inv.peak_window_used_s == 0.0);
    CHECK_FALSE(inv.peak_exhausted);
}

TEST_CASE("symmetric decay restores the full window") {
    const double dt = 0.001;
    InverterState inv = fresh();
    for (int i = 0; i < 620; ++i) inv = step_peak_window(inv, 21.0, dt, kMotor);
    CHECK(inv.peak_window_used_s == Approx(0.62).margin(1e-9));
    for (int i = 0; i < 620; ++i) inv = step_peak_window(inv, 9.8, dt, kMotor);
    CHECK(inv.peak_window_used_s == Approx(0.0).margin(1e-9));
    // Full 1.24 s available again on re-entry.
    long ticks = 0;
    while (!inv.peak_exhausted && ticks < 5000) {
        inv = step_peak_window(inv, 21.0, dt, kMotor);
        ++ticks;
    }
    CHECK(std::abs(ticks * dt - 1.24) <= dt + 1e-9);
}

TEST_CASE("exhaustion latches until the window fully recovers") {
    const double dt = 0.001;
    InverterState inv = fresh();
    for (int i = 0; i < 1250; ++i) inv = step_peak_window(inv, 21.0, dt, kMotor);
    REQUIRE(inv.peak_exhausted);
    // A short recovery is not enough to re-arm.
    for (int i = 0; i < 100; ++i) inv = step_peak_window(inv, 9.8, dt, kMotor);
    CHECK(inv.peak_exhausted);
    for (int i = 0; i < 1200; ++i) inv = step_peak_window(inv, 9.8, dt, kMotor);
    CHECK_FALSE(inv.peak_exhausted);
}

TEST_CASE("power conversion matches P = T*w and I = P/V") {
    const DrivePower rated = apply_torque(9.8, 12000.0, 600.0, kMotor);
    CHECK(rated.mech_w == Approx(12315.0).margin(5.0));
    CHECK(rated.dc_w * kMotor.efficiency == Approx(rated.mech_w));  // exact by construction
    CHECK(rated.dc_current_a == Approx(rated.mech_w / 0.9 / 600.0));
    CHECK(rated.dc_current_a == Approx(22.8).margin(0.05));

    const DrivePower idle = apply_torque(0.0, 15000.0, 600.0, kMotor);
    CHECK(idle.mech_w == 0.0);
    CHECK(idle.dc_current_a == 0.0);
    CHECK_THROWS_AS(apply_torque(5.0, 1000.0, 0.0, kMotor), Error);
}

TEST_CASE("inverter safety check derates and disables on temperature") {
    InverterState inv = fresh();
    inv.motor_temp_c = 40.0;
    inv.igbt_temp_c = 40.0;
    CHECK(inverter_safety_check(inv, kMotor).status == InverterStatus::accept);

    inv.motor_temp_c = 101.0;
    CHECK(inverter_safety_check(inv, kMotor).status == InverterStatus::disable);
    CHECK(max_torque(5000.0, 600.0, inv, kMotor) == 0.0);

    inv.motor_temp_c = 92.5;
    const InverterCheck c = inverter_safety_check(inv, kMotor);
    CHECK(c.status == InverterStatus::derate);
    CHECK(c.factor == Approx(0.5));
    CHECK(max_torque(5000.0, 600.0, inv, kMotor) == Approx(10.5));

    inv.motor_temp_c = 40.0;
    inv.igbt_temp_c = 111.0;
    CHECK(inverter_safety_check(inv, kMotor).status == InverterStatus::disable);
}

TEST_CASE("disabled inverter produces no torque") {
    InverterState inv = fresh();
    inv.enabled = false;
    CHECK(max_torque(5000.0, 600.0, inv, kMotor) == 0.0);
}

TEST_CASE("drive thermal model relaxes toward the loss steady state") {
    InverterState inv = fresh();
    // 2 kW of loss -> +40 C motor steady-state rise over ambient.
    for (int i = 0; i < 400000; ++i)
        inv = step_drive_thermal(inv, 2000.0, 25.0, 0.001, kMotor);
    CHECK(inv.motor_temp_c == Approx(65.0).margin(0.5));
    CHECK(inv.igbt_temp_c == Approx(55.0).margin(0.5));
}
