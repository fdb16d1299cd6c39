#pragma once

// Supervisory torque arbitration: input validation with the pedal
// plausibility latch, the 80 kW cap, thermal derating, steering-based
// left/right split and per-wheel envelope clamping.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fsev/drivetrain.hpp"

namespace fsev {

enum class Wheel { fl = 0, fr = 1, rl = 2, rr = 3 };
inline constexpr int kWheelCount = 4;
inline const char* wheel_name(int w) {
    static const char* names[] = {"fl", "fr", "rl", "rr"};
    return names[w];
}

enum class VectoringMode { equal, proportional };

struct ControlParams {
    double power_cap_w = 80000.0;          // summed DC power at the accumulator side
    VectoringMode vectoring_mode = VectoringMode::equal;
    double vectoring_k = 0.5;              // outer-wheel bias gain, [0,1]
    double steer_max_deg = 100.0;
    double derate_start_c = 50.0;          // cell temperature derate band
    double derate_end_c = 60.0;
    double plausibility_brake_bar = 10.0;  // brake/pedal cut thresholds
    double plausibility_pedal_on = 0.25;
    double plausibility_pedal_off = 0.05;

    void validate() const {
        if (power_cap_w <= 0.0) throw Error("control: power cap must be positive");
        if (vectoring_k < 0.0 || vectoring_k > 1.0)
            throw Error("control: vectoring k must be in [0,1]");
        if (steer_max_deg <= 0.0) throw Error("control: steer max must be positive");
        if (derate_end_c <= derate_start_c)
            throw Error("control: derate band must have positive width");
        if (plausibility_pedal_off >= plausibility_pedal_on)
            throw Error("control: plausibility release must be below trigger");
    }
};

struct DriverInputs {
    double pedal = 0.0;      // accelerator position, clamped to [0,1]
    double brake_bar = 0.0;
    double steer_deg = 0.0;
    bool sensor_fault = false;
    bool torque_cut = false;  // plausibility latch active
};

struct PlausibilityLatch {
    bool latched = false;
};

// Clamps the pedal, flags implausible raw readings and maintains the
// brake/pedal cut latch: trips above both thresholds, releases once the
// pedal falls below the release point.
inline DriverInputs validate_inputs(double raw_pedal, double raw_brake_bar,
                                    double raw_steer_deg, PlausibilityLatch& latch,
                                    const ControlParams& params) {
    DriverInputs in;
    const bool fault = !std::isfinite(raw_pedal) || !std::isfinite(raw_brake_bar) ||
                       !std::isfinite(raw_steer_deg) || raw_pedal < -0.2 ||
                       raw_pedal > 1.2 || raw_brake_bar < 0.0 ||
                       raw_brake_bar > 300.0 || std::abs(raw_steer_deg) > 270.0;
    if (fault) {
        in.sensor_fault = true;
        in.torque_cut = latch.latched;
        return in;
    }
    in.pedal = std::clamp(raw_pedal, 0.0, 1.0);
    in.brake_bar = raw_brake_bar;
    in.steer_deg = raw_steer_deg;
    if (in.brake_bar > params.plausibility_brake_bar &&
        in.pedal > params.plausibility_pedal_on)
        latch.latched = true;
    else if (latch.latched && in.pedal < params.plausibility_pedal_off)
        latch.latched = false;
    in.torque_cut = latch.latched;
    return in;
}

// 1 below the band, 0 at the cell temperature limit, linear in between.
inline double thermal_derate(double hottest_cell_c, const ControlParams& params) {
    return std::clamp((params.derate_end_c - hottest_cell_c) /
                          (params.derate_end_c - params.derate_start_c),
                      0.0, 1.0);
}

struct AxleSplit {
    double left = 0.5;
    double right = 0.5;
};

// Positive steering angle turns left, so the right wheels are the outer
// side. Shares always sum to 1 per axle.
inline AxleSplit torque_vectoring(double steer_deg, const ControlParams& params) {
    if (params.vectoring_mode == VectoringMode::equal) return {0.5, 0.5};
    const double bias = std::clamp(params.vectoring_k *
                                       std::abs(steer_deg) / params.steer_max_deg,
                                   0.0, 1.0);
    const double outer = std::clamp((1.0 + bias) / 2.0, 0.0, 1.0);
    const double inner = 1.0 - outer;
    if (steer_deg >= 0.0) return {inner, outer};
    return {outer, inner};
}

// The full limit chain that produced a command; recomputing
//   min(2 * driver_request * share * cap_factor * thermal_factor, envelope)
// in that multiplication order reproduces wheel_nm exactly.
struct TorqueCommand {
    std::array<double, kWheelCount> wheel_nm{};
    double driver_request_nm = 0.0;  // per-wheel base request before vectoring
    std::array<double, kWheelCount> share{};
    double cap_factor = 1.0;
    double thermal_factor = 1.0;
    std::array<double, kWheelCount> envelope_nm{};
};

inline double recompute_from_chain(const TorqueCommand& cmd, int wheel) {
    double t = 2.0 * cmd.driver_request_nm * cmd.share[static_cast<std::size_t>(wheel)];
    t *= cmd.cap_factor;
    t *= cmd.thermal_factor;
    return std::min(t, cmd.envelope_nm[static_cast<std::size_t>(wheel)]);
}

// Per-tick arbitration. The cap factor is the single scale that keeps the
// summed DC electrical power at or below the cap for the given wheel speeds;
// derating and the envelope clamp afterwards only lower it further.
inline TorqueCommand arbitrate_torque(const DriverInputs& in,
                                      const std::array<double, kWheelCount>& wheel_speed_rpm,
                                      double vdc, double hottest_cell_c,
                                      const MotorSpec& spec,
                                      const ControlParams& params) {
    TorqueCommand cmd;
    const bool cut = in.torque_cut || in.sensor_fault;
    cmd.driver_request_nm = cut ? 0.0 : in.pedal * spec.max_torque_nm;

    const AxleSplit split = torque_vectoring(in.steer_deg, params);
    cmd.share = {split.left, split.right, split.left, split.right};

    const InverterState fresh{.dc_link_v = vdc};
    double total_dc_w = 0.0;
    std::array<double, kWheelCount> base{};
    for (int w = 0; w < kWheelCount; ++w) {
        base[static_cast<std::size_t>(w)] =
            2.0 * cmd.driver_request_nm * cmd.share[static_cast<std::size_t>(w)];
        cmd.envelope_nm[static_cast<std::size_t>(w)] =
            max_torque(wheel_speed_rpm[static_cast<std::size_t>(w)], vdc, fresh, spec);
        total_dc_w += base[static_cast<std::size_t>(w)] *
                      rpm_to_rad_s(wheel_speed_rpm[static_cast<std::size_t>(w)]) /
                      spec.efficiency;
    }
    cmd.cap_factor = total_dc_w > params.power_cap_w ? params.power_cap_w / total_dc_w
                                                     : 1.0;
    cmd.thermal_factor = thermal_derate(hottest_cell_c, params);

    for (int w = 0; w < kWheelCount; ++w)
        cmd.wheel_nm[static_cast<std::size_t>(w)] = recompute_from_chain(cmd, w);
    return cmd;
}

}  // namespace fsev
