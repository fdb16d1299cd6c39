#pragma once

// One in-hub motor + inverter unit: torque/speed/voltage envelope, the
// peak-torque time window, thermal limits and DC<->mechanical conversion.

#include <algorithm>
#include <cmath>

#include "fsev/codec.hpp"

namespace fsev {

inline constexpr double kPi = 3.141592653589793;

inline double rpm_to_rad_s(double rpm) { return rpm * 2.0 * kPi / 60.0; }
inline double rad_s_to_rpm(double w) { return w * 60.0 / (2.0 * kPi); }

struct MotorSpec {
    double rated_power_w = 12300.0;
    double max_power_w = 35000.0;  // at reference DC-link voltage
    double rated_torque_nm = 9.8;
    double max_torque_nm = 21.0;
    double rated_speed_rpm = 12000.0;
    double max_speed_rpm = 20000.0;
    double rated_current_a = 41.0;  // rms
    double max_current_a = 105.0;   // rms
    double voltage_ref_v = 600.0;
    double efficiency = 0.9;  // combined inverter+motor, DC to mechanical
    double peak_window_s = 1.24;

    // Thermal handling (config values; the mechanism is the contract).
    double motor_temp_limit_c = 100.0;
    double igbt_temp_limit_c = 110.0;
    double derate_band_c = 15.0;
    double thermal_tau_s = 60.0;
    double motor_rise_c_per_kw = 20.0;  // steady-state rise per kW of loss
    double igbt_rise_c_per_kw = 15.0;

    void validate() const {
        if (max_power_w < rated_power_w || max_torque_nm < rated_torque_nm ||
            max_speed_rpm < rated_speed_rpm || max_current_a < rated_current_a)
            throw Error("motor: maximum ratings must be >= rated values");
        if (efficiency <= 0.0 || efficiency > 1.0)
            throw Error("motor: efficiency must be in (0,1]");
        if (peak_window_s <= 0.0) throw Error("motor: peak window must be positive");
        // Base speed must sit inside the speed range.
        const double base = rad_s_to_rpm(max_power_w / max_torque_nm);
        if (base > max_speed_rpm)
            throw Error("motor: max power / max torque exceeds max speed");
        if (derate_band_c <= 0.0 || thermal_tau_s <= 0.0)
            throw Error("motor: thermal parameters must be positive");
    }
};

struct InverterState {
    double peak_window_used_s = 0.0;  // time spent above rated torque
    bool peak_exhausted = false;      // latched until the window fully recovers
    double motor_temp_c = 25.0;
    double igbt_temp_c = 25.0;
    bool enabled = true;
    double dc_link_v = 600.0;
};

enum class InverterStatus { accept, derate, disable };

struct InverterCheck {
    InverterStatus status = InverterStatus::accept;
    double factor = 1.0;  // torque multiplier in [0,1]
};

// Disables above either temperature limit; linearly derates over the band
// below each limit.
inline InverterCheck inverter_safety_check(const InverterState& inv,
                                           const MotorSpec& spec) {
    if (inv.motor_temp_c > spec.motor_temp_limit_c ||
        inv.igbt_temp_c > spec.igbt_temp_limit_c)
        return {InverterStatus::disable, 0.0};
    auto band_factor = [&](double temp, double limit) {
        return std::clamp((limit - temp) / spec.derate_band_c, 0.0, 1.0);
    };
    const double f = std::min(band_factor(inv.motor_temp_c, spec.motor_temp_limit_c),
                              band_factor(inv.igbt_temp_c, spec.igbt_temp_limit_c));
    if (f < 1.0) return {InverterStatus::derate, f};
    return {InverterStatus::accept, 1.0};
}

// Largest torque the unit will produce right now. Constant-torque branch up
// to base speed, then power-limited with P_max scaling linearly in DC-link
// voltage; rated-torque clamp while the peak window is exhausted; thermal
// derate factor on top. Zero above max speed or when disabled.
inline double max_torque(double speed_rpm, double vdc, const InverterState& inv,
                         const MotorSpec& spec) {
    if (speed_rpm < 0.0) throw Error("max_torque: negative speed");
    if (!inv.enabled || vdc <= 0.0) return 0.0;
    if (speed_rpm > spec.max_speed_rpm) return 0.0;
    const double p_max = spec.max_power_w * vdc / spec.voltage_ref_v;
    const double w = rpm_to_rad_s(speed_rpm);
    double envelope = spec.max_torque_nm;
    if (w > 0.0) envelope = std::min(envelope, p_max / w);
    if (inv.peak_exhausted) envelope = std::min(envelope, spec.rated_torque_nm);
    const InverterCheck check = inverter_safety_check(inv, spec);
    return envelope * check.factor;
}

// Peak-window bookkeeping: accumulates while torque is above rated, decays at
// the same rate at or below rated. Exhaustion latches until fully decayed so
// the clamp does not chatter at the boundary.
inline InverterState step_peak_window(const InverterState& inv, double torque_nm,
                                      double dt, const MotorSpec& spec) {
    if (dt <= 0.0) throw Error("step_peak_window: dt must be positive");
    InverterState next = inv;
    if (std::abs(torque_nm) > spec.rated_torque_nm) {
        next.peak_window_used_s = std::min(spec.peak_window_s,
                                           inv.peak_window_used_s + dt);
        if (next.peak_window_used_s >= spec.peak_window_s) next.peak_exhausted = true;
    } else {
        next.peak_window_used_s = std::max(0.0, inv.peak_window_used_s - dt);
        if (next.peak_window_used_s <= 0.0) next.peak_exhausted = false;
    }
    return next;
}

struct DrivePower {
    double mech_w = 0.0;
    double dc_w = 0.0;
    double dc_current_a = 0.0;
};

// DC power is mechanical power over the combined efficiency.
inline DrivePower apply_torque(double torque_nm, double speed_rpm, double vdc,
                               const MotorSpec& spec) {
    if (vdc <= 0.0) throw Error("apply_torque: DC-link voltage must be positive");
    DrivePower p;
    p.mech_w = torque_nm * rpm_to_rad_s(speed_rpm);
    p.dc_w = p.mech_w / spec.efficiency;
    p.dc_current_a = p.dc_w / vdc;
    return p;
}

// First-order lag toward a loss-dependent steady state.
inline InverterState step_drive_thermal(const InverterState& inv, double loss_w,
                                        double ambient_c, double dt,
                                        const MotorSpec& spec) {
    InverterState next = inv;
    const double motor_ss = ambient_c + spec.motor_rise_c_per_kw * loss_w / 1000.0;
    const double igbt_ss = ambient_c + spec.igbt_rise_c_per_kw * loss_w / 1000.0;
    const double a = dt / spec.thermal_tau_s;
    next.motor_temp_c = inv.motor_temp_c + (motor_ss - inv.motor_temp_c) * a;
    next.igbt_temp_c = inv.igbt_temp_c + (igbt_ss - inv.igbt_temp_c) * a;
    return next;
}

}  // namespace fsev
