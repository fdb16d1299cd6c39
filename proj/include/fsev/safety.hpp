#pragma once

// Shutdown-circuit and HV-interlock state machine: AIRs, precharge and
// discharge RC paths, BSPD latch, TSAL indication and the HVD.

#include <cmath>

#include "fsev/codec.hpp"

namespace fsev {

enum class TsState { ts_off = 0, precharge = 1, ts_active = 2, discharge = 3, fault = 4 };

inline const char* ts_state_name(TsState s) {
    switch (s) {
        case TsState::ts_off: return "TS_OFF";
        case TsState::precharge: return "PRECHARGE";
        case TsState::ts_active: return "TS_ACTIVE";
        case TsState::discharge: return "DISCHARGE";
        case TsState::fault: return "FAULT";
    }
    return "?";
}

struct SafetyParams {
    double precharge_r_ohm = 270.0;
    double precharge_c_f = 0.5e-3;
    double discharge_r_ohm = 2000.0;
    double precharge_threshold = 0.95;  // of pack voltage
    double safe_voltage_v = 60.0;
    double discharge_budget_s = 5.0;
    double bspd_brake_bar = 30.0;
    double bspd_power_w = 5000.0;
    double bspd_window_s = 0.5;

    void validate() const {
        if (precharge_r_ohm <= 0.0 || precharge_c_f <= 0.0 || discharge_r_ohm <= 0.0)
            throw Error("safety: RC values must be positive");
        if (precharge_threshold <= 0.0 || precharge_threshold >= 1.0)
            throw Error("safety: precharge threshold must be in (0,1)");
        if (safe_voltage_v <= 0.0) throw Error("safety: safe voltage must be positive");
        if (bspd_window_s <= 0.0) throw Error("safety: BSPD window must be positive");
    }
};

struct ShutdownState {
    TsState state = TsState::ts_off;
    bool air_minus = false;
    bool air_plus = false;
    bool precharge_relay = false;
    double v_link = 0.0;
    bool bspd_latch = false;
    bool bms_latch = false;
    bool hvd_present = true;
    bool loop_closed = true;
};

struct ShutdownInputs {
    bool activate = false;
    bool reset = false;
    bool loop_closed = true;
    bool bms_fault = false;
    bool bspd_latch = false;
    double pack_voltage = 0.0;
};

struct BspdInputs {
    double brake_bar = 0.0;
    double hecs_current_a = 0.0;
    double dc_link_v = 0.0;
};

struct BspdState {
    double window_s = 0.0;
    bool latched = false;
};

// Latches when power is applied under hard braking for the full persistence
// window; the latch survives until an explicit reset.
inline BspdState bspd_evaluate(const BspdState& state, const BspdInputs& in, double dt,
                               const SafetyParams& params) {
    if (dt <= 0.0) throw Error("bspd_evaluate: dt must be positive");
    BspdState next = state;
    const double power_w = in.dc_link_v * in.hecs_current_a;
    if (in.brake_bar > params.bspd_brake_bar && power_w > params.bspd_power_w) {
        next.window_s = state.window_s + dt;
        if (next.window_s + 1e-12 >= params.bspd_window_s) next.latched = true;
    } else {
        next.window_s = 0.0;
    }
    return next;
}

namespace detail {

inline void open_all(ShutdownState& s) {
    s.air_minus = false;
    s.air_plus = false;
    s.precharge_relay = false;
}

}  // namespace detail

// One tick of the shutdown circuit. Activation closes AIR- and the precharge
// relay; AIR+ closes only once the DC link has reached the precharge
// threshold; any loop-open / HVD-removed / BMS / BSPD event opens the AIRs
// and drains the link, with BMS and BSPD faults latching until reset.
inline ShutdownState step_shutdown(const ShutdownState& state, const ShutdownInputs& in,
                                   double dt, const SafetyParams& params) {
    if (dt <= 0.0) throw Error("step_shutdown: dt must be positive");
    ShutdownState s = state;
    s.loop_closed = in.loop_closed;
    if (in.bspd_latch) s.bspd_latch = true;
    if (in.bms_fault) s.bms_latch = true;
    if (in.reset) {
        s.bspd_latch = false;
        s.bms_latch = false;
    }
    const bool latched = s.bspd_latch || s.bms_latch;
    const bool shutdown_event = !s.loop_closed || !s.hvd_present || latched;

    const double pre_tau = params.precharge_r_ohm * params.precharge_c_f;
    const double dis_tau = params.discharge_r_ohm * params.precharge_c_f;

    switch (s.state) {
        case TsState::ts_off:
            s.v_link *= std::exp(-dt / dis_tau);
            if (latched) {
                detail::open_all(s);
                s.state = TsState::fault;
            } else if (in.activate && s.loop_closed && s.hvd_present) {
                s.air_minus = true;
                s.precharge_relay = true;
                s.state = TsState::precharge;
            }
            break;
        case TsState::precharge:
            if (shutdown_event) {
                detail::open_all(s);
                s.state = TsState::discharge;
                break;
            }
            s.v_link += (in.pack_voltage - s.v_link) * (1.0 - std::exp(-dt / pre_tau));
            if (s.v_link >= params.precharge_threshold * in.pack_voltage &&
                in.pack_voltage > 0.0) {
                s.precharge_relay = false;
                s.air_plus = true;
                s.state = TsState::ts_active;
            }
            break;
        case TsState::ts_active:
            if (shutdown_event) {
                detail::open_all(s);
                s.state = TsState::discharge;
                break;
            }
            s.v_link = in.pack_voltage;  // link tied to the pack while both AIRs closed
            break;
        case TsState::discharge:
            s.v_link *= std::exp(-dt / dis_tau);
            if (s.v_link < params.safe_voltage_v)
                s.state = latched ? TsState::fault : TsState::ts_off;
            break;
        case TsState::fault:
            s.v_link *= std::exp(-dt / dis_tau);
            if (in.reset)
                s.state = s.v_link < params.safe_voltage_v ? TsState::ts_off
                                                           : TsState::discharge;
            break;
    }
    return s;
}

enum class TsalColour { green, red };

// RED while HV can be present: any AIR closed or residual link voltage.
inline TsalColour tsal_state(const ShutdownState& s, const SafetyParams& params) {
    if (s.air_minus || s.air_plus || s.v_link >= params.safe_voltage_v)
        return TsalColour::red;
    return TsalColour::green;
}

// Pulling the HVD drops HV immediately if the system was live.
inline ShutdownState hvd_remove(const ShutdownState& state) {
    ShutdownState s = state;
    s.hvd_present = false;
    if (s.state == TsState::precharge || s.state == TsState::ts_active) {
        detail::open_all(s);
        s.state = TsState::discharge;
    }
    return s;
}

}  // namespace fsev
