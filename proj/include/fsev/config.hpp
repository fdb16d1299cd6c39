#pragma once

// Vehicle configuration file: `section.key = value` lines with # comments.
// Every value lands in one of the module parameter structs and is validated
// against that module's invariants at load time.

#include <map>
#include <sstream>
#include <string>

#include "fsev/accumulator.hpp"
#include "fsev/safety.hpp"
#include "fsev/vcu.hpp"
#include "fsev/vehicle.hpp"

namespace fsev {

struct SimParams {
    double tick_s = 0.001;
    std::string msgdb_path = "default.msgdb";  // relative to the config file
    int staleness_ticks = 4;  // worst-case age of CAN speed feedback at the VCU
    double sensor_noise_frac = 0.0;  // opt-in gaussian noise on driver sensors

    void validate() const {
        if (tick_s <= 0.0) throw Error("sim: tick must be positive");
        if (staleness_ticks < 0) throw Error("sim: staleness must be non-negative");
        if (sensor_noise_frac < 0.0) throw Error("sim: noise must be non-negative");
    }
};

struct VehicleConfig {
    PackConfig pack;
    CellSpec cell;
    MotorSpec motor;
    SafetyParams safety;
    ControlParams control;
    VehicleParams vehicle;
    SimParams sim;

    void validate() const {
        pack.validate();
        cell.validate();
        motor.validate();
        safety.validate();
        control.validate();
        vehicle.validate();
        sim.validate();
    }
};

namespace detail {

struct ConfigEntry {
    std::string value;
    int line = 0;
};

inline double cfg_double(const std::string& v, int line) { return parse_double(v, line); }
inline int cfg_int(const std::string& v, int line) {
    return static_cast<int>(parse_int(v, line));
}

}  // namespace detail

inline VehicleConfig parse_config(std::string_view text) {
    VehicleConfig cfg;
    std::map<std::string, detail::ConfigEntry> entries;

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;
        if (eq == std::string::npos)
            throw ParseError(line_no, "expected section.key = value");
        std::string key;
        for (auto t : detail::split_ws(line.substr(0, eq))) key += t;
        auto value_tokens = detail::split_ws(line.substr(eq + 1));
        if (key.empty() || value_tokens.size() != 1)
            throw ParseError(line_no, "expected section.key = value");
        if (entries.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
        entries[key] = {value_tokens[0], line_no};
    }

    auto take = [&](const std::string& key, auto&& apply) {
        auto it = entries.find(key);
        if (it == entries.end()) return;
        apply(it->second.value, it->second.line);
        entries.erase(it);
    };
    auto dbl = [&](const std::string& key, double& target) {
        take(key, [&](const std::string& v, int l) { target = detail::cfg_double(v, l); });
    };
    auto integer = [&](const std::string& key, int& target) {
        take(key, [&](const std::string& v, int l) { target = detail::cfg_int(v, l); });
    };

    integer("pack.parallel", cfg.pack.parallel);
    integer("pack.series", cfg.pack.series);
    integer("pack.segment_series", cfg.pack.segment_series);
    dbl("pack.nominal_cell_v", cfg.pack.nominal_cell_v);
    dbl("pack.cell_resistance_ohm", cfg.pack.cell_resistance_ohm);
    dbl("pack.full_charge_pack_v", cfg.pack.full_charge_pack_v);
    dbl("pack.thermal_capacity_j_per_k", cfg.pack.thermal_capacity_j_per_k);
    dbl("pack.thermal_resistance_k_per_w", cfg.pack.thermal_resistance_k_per_w);
    dbl("pack.ambient_c", cfg.pack.ambient_c);

    dbl("cell.max_continuous_discharge_a", cfg.cell.max_continuous_discharge_a);
    dbl("cell.peak_discharge_a", cfg.cell.peak_discharge_a);
    dbl("cell.peak_window_s", cfg.cell.peak_window_s);
    dbl("cell.max_charge_a", cfg.cell.max_charge_a);
    dbl("cell.cutoff_v", cfg.cell.cutoff_v);
    dbl("cell.charge_v", cfg.cell.charge_v);
    dbl("cell.max_discharge_temp_c", cfg.cell.max_discharge_temp_c);
    dbl("cell.capacity_ah", cfg.cell.capacity_ah);
    dbl("cell.mass_kg", cfg.cell.mass_kg);

    dbl("motor.rated_power_w", cfg.motor.rated_power_w);
    dbl("motor.max_power_w", cfg.motor.max_power_w);
    dbl("motor.rated_torque_nm", cfg.motor.rated_torque_nm);
    dbl("motor.max_torque_nm", cfg.motor.max_torque_nm);
    dbl("motor.rated_speed_rpm", cfg.motor.rated_speed_rpm);
    dbl("motor.max_speed_rpm", cfg.motor.max_speed_rpm);
    dbl("motor.rated_current_a", cfg.motor.rated_current_a);
    dbl("motor.max_current_a", cfg.motor.max_current_a);
    dbl("motor.voltage_ref_v", cfg.motor.voltage_ref_v);
    dbl("motor.efficiency", cfg.motor.efficiency);
    dbl("motor.peak_window_s", cfg.motor.peak_window_s);
    dbl("motor.motor_temp_limit_c", cfg.motor.motor_temp_limit_c);
    dbl("motor.igbt_temp_limit_c", cfg.motor.igbt_temp_limit_c);
    dbl("motor.derate_band_c", cfg.motor.derate_band_c);
    dbl("motor.thermal_tau_s", cfg.motor.thermal_tau_s);
    dbl("motor.motor_rise_c_per_kw", cfg.motor.motor_rise_c_per_kw);
    dbl("motor.igbt_rise_c_per_kw", cfg.motor.igbt_rise_c_per_kw);

    dbl("safety.precharge_r_ohm", cfg.safety.precharge_r_ohm);
    dbl("safety.precharge_c_f", cfg.safety.precharge_c_f);
    dbl("safety.discharge_r_ohm", cfg.safety.discharge_r_ohm);
    dbl("safety.precharge_threshold", cfg.safety.precharge_threshold);
    dbl("safety.safe_voltage_v", cfg.safety.safe_voltage_v);
    dbl("safety.discharge_budget_s", cfg.safety.discharge_budget_s);
    dbl("safety.bspd_brake_bar", cfg.safety.bspd_brake_bar);
    dbl("safety.bspd_power_w", cfg.safety.bspd_power_w);
    dbl("safety.bspd_window_s", cfg.safety.bspd_window_s);

    dbl("control.power_cap_w", cfg.control.power_cap_w);
    take("control.vectoring_mode", [&](const std::string& v, int l) {
        if (v == "equal")
            cfg.control.vectoring_mode = VectoringMode::equal;
        else if (v == "proportional")
            cfg.control.vectoring_mode = VectoringMode::proportional;
        else
            throw ParseError(l, "unknown vectoring mode '" + v + "'");
    });
    dbl("control.vectoring_k", cfg.control.vectoring_k);
    dbl("control.steer_max_deg", cfg.control.steer_max_deg);
    dbl("control.derate_start_c", cfg.control.derate_start_c);
    dbl("control.derate_end_c", cfg.control.derate_end_c);
    dbl("control.plausibility_brake_bar", cfg.control.plausibility_brake_bar);
    dbl("control.plausibility_pedal_on", cfg.control.plausibility_pedal_on);
    dbl("control.plausibility_pedal_off", cfg.control.plausibility_pedal_off);

    dbl("vehicle.mass_kg", cfg.vehicle.mass_kg);
    dbl("vehicle.wheel_radius_m", cfg.vehicle.wheel_radius_m);
    dbl("vehicle.gear_ratio", cfg.vehicle.gear_ratio);
    dbl("vehicle.cda_m2", cfg.vehicle.cda_m2);
    dbl("vehicle.air_density", cfg.vehicle.air_density);
    dbl("vehicle.brake_gain_n_per_bar", cfg.vehicle.brake_gain_n_per_bar);

    dbl("sim.tick_s", cfg.sim.tick_s);
    take("sim.msgdb", [&](const std::string& v, int) { cfg.sim.msgdb_path = v; });
    integer("sim.staleness_ticks", cfg.sim.staleness_ticks);
    dbl("sim.sensor_noise_frac", cfg.sim.sensor_noise_frac);

    if (!entries.empty()) {
        const auto& [key, entry] = *entries.begin();
        throw ParseError(entry.line, "unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

}  // namespace fsev
