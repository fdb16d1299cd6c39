#pragma once

// Minimal longitudinal vehicle model closing the loop between wheel torque
// and motor speed. Straight-line only; steering affects the torque split,
// not the path.

#include <algorithm>
#include <array>

#include "fsev/drivetrain.hpp"

namespace fsev {

struct VehicleParams {
    double mass_kg = 300.0;  // including driver
    double wheel_radius_m = 0.2;
    double gear_ratio = 12.5;  // motor to wheel
    double cda_m2 = 1.2;       // drag coefficient x frontal area
    double air_density = 1.2;
    double brake_gain_n_per_bar = 100.0;

    void validate() const {
        if (mass_kg <= 0.0 || wheel_radius_m <= 0.0 || gear_ratio <= 0.0 ||
            cda_m2 <= 0.0 || air_density <= 0.0 || brake_gain_n_per_bar <= 0.0)
            throw Error("vehicle: all parameters must be positive");
    }
};

struct VehicleState {
    double speed_mps = 0.0;
    double distance_m = 0.0;
    double motor_speed_rpm = 0.0;  // same for all four wheels
};

inline double motor_rpm_from_speed(double speed_mps, const VehicleParams& p) {
    return rad_s_to_rpm(speed_mps / p.wheel_radius_m * p.gear_ratio);
}

// Forward Euler over one tick. Brake force opposes motion and vanishes at
// standstill; speed never goes negative.
inline VehicleState vehicle_step(const VehicleState& state,
                                 const std::array<double, 4>& wheel_torque_nm,
                                 double brake_bar, double dt,
                                 const VehicleParams& p) {
    if (dt <= 0.0) throw Error("vehicle_step: dt must be positive");
    double traction_n = 0.0;
    for (double t : wheel_torque_nm) traction_n += t * p.gear_ratio / p.wheel_radius_m;
    const double drag_n = 0.5 * p.air_density * p.cda_m2 * state.speed_mps * state.speed_mps;
    const double brake_n = state.speed_mps > 0.0 ? p.brake_gain_n_per_bar * brake_bar : 0.0;
    const double accel = (traction_n - drag_n - brake_n) / p.mass_kg;

    VehicleState next = state;
    next.speed_mps = std::max(0.0, state.speed_mps + accel * dt);
    next.distance_m = state.distance_m + next.speed_mps * dt;
    next.motor_speed_rpm = motor_rpm_from_speed(next.speed_mps, p);
    return next;
}

}  // namespace fsev
