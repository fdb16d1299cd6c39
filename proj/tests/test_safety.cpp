#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fsev/safety.hpp"

using namespace fsev;
using Catch::Approx;

namespace {

const SafetyParams kParams{};

ShutdownInputs idle_inputs(double pack_v = 600.0) {
    ShutdownInputs in;
    in.pack_voltage = pack_v;
    return in;
}

ShutdownState activate_to_active(ShutdownState s, double dt = 0.001) {
    ShutdownInputs in = idle_inputs();
    in.activate = true;
    s = step_shutdown(s, in, dt, kParams);
    in.activate = false;
    for (int i = 0; i < 10000 && s.state != TsState::ts_active; ++i)
        s = step_shutdown(s, in, dt, kParams);
    return s;
}

void check_invariants(const ShutdownState& s, double pack_v) {
    REQUIRE_FALSE((s.precharge_relay && s.air_plus));
    if (s.state == TsState::fault) {
        REQUIRE_FALSE(s.air_minus);
        REQUIRE_FALSE(s.air_plus);
    }
    if (s.air_plus) {
        REQUIRE(s.state == TsState::ts_active);
        REQUIRE(s.v_link >= kParams.precharge_threshold * pack_v - 1e-6);
    }
}

}  // namespace

TEST_CASE("precharge reaches 95% of 600 V at 0.404 s within two ticks") {
    const double dt = 0.001;
    ShutdownState s;
    ShutdownInputs in = idle_inputs();
    in.activate = true;
    s = step_shutdown(s, in, dt, kParams);
    REQUIRE(s.state == TsState::precharge);
    REQUIRE(s.air_minus);
    REQUIRE(s.precharge_relay);
    REQUIRE_FALSE(s.air_plus);

    in.activate = false;
    long tick = 1;
    while (s.state == TsState::precharge && tick < 2000) {
        s = step_shutdown(s, in, dt, kParams);
        ++tick;
    }
    REQUIRE(s.state == TsState::ts_active);
    REQUIRE(s.air_plus);
    REQUIRE_FALSE(s.precharge_relay);
    // RC oracle: t = -tau * ln(1 - 0.95), tau = 270 ohm * 0.5 mF.
    const double expected = -270.0 * 0.5e-3 * std::log(1.0 - 0.95);
    CHECK(expected == Approx(0.404).margin(0.001));
    CHECK(std::abs(tick * dt - expected) <= 2.0 * dt + 1e-9);
}

TEST_CASE("loop opening in TS_ACTIVE opens the AIRs on the next tick") {
    ShutdownState s = activate_to_active(ShutdownState{});
    REQUIRE(s.state == TsState::ts_active);
    ShutdownInputs in = idle_inputs();
    in.loop_closed = false;
    s = step_shutdown(s, in, 0.001, kParams);
    CHECK(s.state == TsState::discharge);
    CHECK_FALSE(s.air_minus);
    CHECK_FALSE(s.air_plus);
}

TEST_CASE("discharge from 600 V crosses 60 V at tau*ln(10) and beats the budget") {
    const double dt = 0.001;
    ShutdownState s = activate_to_active(ShutdownState{});
    ShutdownInputs in = idle_inputs();
    // Let the link settle to the full pack voltage before pulling the plug.
    for (int i = 0; i < 5; ++i) s = step_shutdown(s, in, dt, kParams);
    REQUIRE(s.v_link == 600.0);
    in.loop_closed = false;
    long tick = 0;
    while (s.v_link >= kParams.safe_voltage_v && tick < 10000) {
        s = step_shutdown(s, in, dt, kParams);
        ++tick;
    }
    const double expected = 1.0 * std::log(10.0);  // tau = 2 kohm * 0.5 mF = 1 s
    CHECK(expected == Approx(2.303).margin(0.001));
    CHECK(std::abs(tick * dt - expected) <= 2.0 * dt + 1e-9);
    CHECK(tick * dt < kParams.discharge_budget_s);
    CHECK(s.state == TsState::ts_off);
}

TEST_CASE("BSPD latches after the persistence window and not before") {
    const double dt = 0.001;
    SECTION("12 kW under 35 bar for 0.5 s latches within a tick") {
        BspdState b;
        BspdInputs in{35.0, 20.0, 600.0};
        long tick = 0;
        while (!b.latched && tick < 1000) {
            b = bspd_evaluate(b, in, dt, kParams);
            ++tick;
        }
        REQUIRE(b.latched);
        CHECK(std::abs(tick * dt - 0.5) <= dt + 1e-9);
    }
    SECTION("1 kW never latches") {
        BspdState b;
        BspdInputs in{35.0, 20.0, 50.0};
        for (int i = 0; i < 2000; ++i) b = bspd_evaluate(b, in, dt, kParams);
        CHECK_FALSE(b.latched);
    }
    SECTION("0.4 s exposure does not latch") {
        BspdState b;
        BspdInputs on{35.0, 20.0, 600.0};
        BspdInputs off{0.0, 20.0, 600.0};
        for (int i = 0; i < 400; ++i) b = bspd_evaluate(b, on, dt, kParams);
        CHECK_FALSE(b.latched);
        b = bspd_evaluate(b, off, dt, kParams);
        CHECK(b.window_s == 0.0);
        for (int i = 0; i < 400; ++i) b = bspd_evaluate(b, on, dt, kParams);
        CHECK_FALSE(b.latched);
    }
}

TEST_CASE("BSPD latch routes the machine to FAULT and survives until reset") {
    ShutdownState s = activate_to_active(ShutdownState{});
    ShutdownInputs in = idle_inputs();
    in.bspd_latch = true;
    s = step_shutdown(s, in, 0.001, kParams);
    REQUIRE(s.state == TsState::discharge);
    in.bspd_latch = false;
    for (int i = 0; i < 6000; ++i) s = step_shutdown(s, in, 0.001, kParams);
    REQUIRE(s.state == TsState::fault);

    // No activation can leave FAULT without a reset.
    in.activate = true;
    for (int i = 0; i < 100; ++i) {
        s = step_shutdown(s, in, 0.001, kParams);
        REQUIRE(s.state == TsState::fault);
    }
    in.reset = true;
    s = step_shutdown(s, in, 0.001, kParams);
    in.reset = false;
    in.activate = false;
    CHECK(s.state == TsState::ts_off);
    CHECK_FALSE(s.bspd_latch);
}

TEST_CASE("TSAL is red whenever HV can be present") {
    ShutdownState s = activate_to_active(ShutdownState{});
    CHECK(tsal_state(s, kParams) == TsalColour::red);

    ShutdownState off;
    off.v_link = 0.0;
    CHECK(tsal_state(off, kParams) == TsalColour::green);

    ShutdownState draining;
    draining.state = TsState::discharge;
    draining.v_link = 200.0;
    CHECK(tsal_state(draining, kParams) == TsalColour::red);
}

TEST_CASE("HVD removal drops a live system into discharge the same tick") {
    ShutdownState s = activate_to_active(ShutdownState{});
    s = hvd_remove(s);
    CHECK(s.state == TsState::discharge);
    CHECK_FALSE(s.air_minus);
    CHECK_FALSE(s.air_plus);
    CHECK_FALSE(s.hvd_present);
}

TEST_CASE("HVD removal with TS off only clears the flag") {
    ShutdownState s;
    s = hvd_remove(s);
    CHECK(s.state == TsState::ts_off);
    CHECK_FALSE(s.hvd_present);
}

TEST_CASE("activation is refused while the HVD is absent") {
    ShutdownState s = hvd_remove(ShutdownState{});
    ShutdownInputs in = idle_inputs();
    in.activate = true;
    s = step_shutdown(s, in, 0.001, kParams);
    CHECK(s.state == TsState::ts_off);
    CHECK_FALSE(s.air_minus);
}

TEST_CASE("random input exploration never violates the safety invariants") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ShutdownState s;
    const double pack_v = 600.0;
    for (int step = 0; step < 20000; ++step) {
        ShutdownInputs in = idle_inputs(pack_v);
        in.activate = unit(rng) < 0.05;
        in.reset = unit(rng) < 0.02;
        in.loop_closed = unit(rng) >= 0.01;
        in.bms_fault = unit(rng) < 0.005;
        in.bspd_latch = unit(rng) < 0.005;
        if (unit(rng) < 0.003) s = hvd_remove(s);
        if (unit(rng) < 0.003) s.hvd_present = true;  // re-insert between sessions
        s = step_shutdown(s, in, 0.001, kParams);
        check_invariants(s, pack_v);
    }
}

TEST_CASE("discharge guarantee holds from any live state") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        ShutdownState s = activate_to_active(ShutdownState{});
        ShutdownInputs in = idle_inputs();
        // Run live for a random while, then force shutdown.
        const int live = static_cast<int>(unit(rng) * 500);
        for (int i = 0; i < live; ++i) s = step_shutdown(s, in, 0.001, kParams);
        in.loop_closed = false;
        double t = 0.0;
        while (s.v_link >= kParams.safe_voltage_v) {
            s = step_shutdown(s, in, 0.001, kParams);
            t += 0.001;
            REQUIRE(t <= kParams.discharge_budget_s);
        }
    }
}
