#pragma once

// Electrical and thermal model of the accumulator: a 2P144S pack of pouch
// cells split into six 2P24S segments, with coulomb-counting state of charge,
// BMS limit monitoring and the segment/pack rule checks.

#include <cmath>
#include <string>
#include <vector>

#include "fsev/codec.hpp"

namespace fsev {

struct CellSpec {
    double max_continuous_discharge_a = 110.0;
    double peak_discharge_a = 137.5;  // allowed for at most peak_window_s
    double peak_window_s = 3.0;
    double max_charge_a = 11.0;
    double cutoff_v = 3.0;  // discharge cutoff
    double charge_v = 4.2;  // also the per-cell over-voltage threshold
    double min_discharge_temp_c = -20.0;
    double max_discharge_temp_c = 60.0;
    double min_charge_temp_c = 10.0;
    double max_charge_temp_c = 45.0;
    double capacity_ah = 5.5;
    double mass_kg = 0.116;

    void validate() const {
        if (peak_discharge_a < max_continuous_discharge_a)
            throw Error("cell: peak current below continuous current");
        if (cutoff_v >= charge_v)
            throw Error("cell: cutoff voltage must be below charge voltage");
        if (capacity_ah <= 0.0) throw Error("cell: capacity must be positive");
    }
};

struct PackConfig {
    int parallel = 2;
    int series = 144;
    int segment_series = 24;
    double nominal_cell_v = 3.7;
    double cell_resistance_ohm = 0.0025;
    double full_charge_pack_v = 600.0;  // pack OCV at SoC 1
    // Lumped thermal model for the hottest cell.
    double thermal_capacity_j_per_k = 5000.0;
    double thermal_resistance_k_per_w = 0.5;
    double ambient_c = 25.0;

    int cell_count() const { return parallel * series; }
    int segment_count() const { return series / segment_series; }
    double pack_resistance_ohm() const {
        return static_cast<double>(series) * cell_resistance_ohm /
               static_cast<double>(parallel);
    }
    double full_charge_cell_v() const {
        return full_charge_pack_v / static_cast<double>(series);
    }

    void validate() const {
        if (parallel <= 0 || series <= 0 || segment_series <= 0)
            throw Error("pack: cell counts must be positive");
        if (series % segment_series != 0)
            throw Error("pack: series count not divisible by segment series count");
        if (nominal_cell_v <= 0.0 || cell_resistance_ohm < 0.0 ||
            full_charge_pack_v <= 0.0)
            throw Error("pack: electrical parameters must be positive");
        if (thermal_capacity_j_per_k <= 0.0 || thermal_resistance_k_per_w <= 0.0)
            throw Error("pack: thermal parameters must be positive");
    }
};

struct PackState {
    double soc = 1.0;             // fraction of usable capacity
    double current_a = 0.0;       // + is discharge
    double terminal_v = 0.0;
    double min_group_v = 0.0;     // worst cell-group voltage across segments
    double max_group_v = 0.0;
    double hottest_cell_c = 25.0;
    double charge_out_ah = 0.0;
    double energy_out_wh = 0.0;       // terminal energy, integral of V*I
    double energy_stored_delta_wh = 0.0;  // OCV-basis energy withdrawn
    double over_current_s = 0.0;  // time spent above 2x continuous current
    bool under_voltage_fault = false;
};

// Eq. Q = N_cells * V_nom * Q_cell, in watt-hours.
inline double pack_nominal_capacity_wh(const PackConfig& config, const CellSpec& cell) {
    return static_cast<double>(config.cell_count()) * config.nominal_cell_v *
           cell.capacity_ah;
}

// Maximum continuous current over nominal capacity.
inline double c_rate(const CellSpec& cell) {
    if (cell.capacity_ah <= 0.0) throw Error("c_rate: zero capacity");
    return cell.max_continuous_discharge_a / cell.capacity_ah;
}

inline double ohmic_loss_w(double resistance_ohm, double current_a) {
    return resistance_ohm * current_a * current_a;
}

// Open-circuit voltage of one cell group, linear in SoC between the
// discharge cutoff and the full-charge point.
inline double cell_group_ocv(double soc, const PackConfig& config,
                             const CellSpec& cell) {
    return cell.cutoff_v + (config.full_charge_cell_v() - cell.cutoff_v) * soc;
}

inline double terminal_voltage(const PackState& state, double current_a,
                               const PackConfig& config, const CellSpec& cell) {
    return cell_group_ocv(state.soc, config, cell) *
               static_cast<double>(config.series) -
           current_a * config.pack_resistance_ohm();
}

// Advances SoC, the energy/charge accumulators, group voltages and the lumped
// thermal state over one step of dt seconds at the given pack current.
inline PackState step_pack(const PackState& state, double current_a, double dt,
                           const PackConfig& config, const CellSpec& cell) {
    if (dt <= 0.0) throw Error("step_pack: dt must be positive");
    PackState next = state;
    next.current_a = current_a;

    const double pack_capacity_ah = static_cast<double>(config.parallel) * cell.capacity_ah;
    next.soc = state.soc - current_a * dt / (pack_capacity_ah * 3600.0);
    if (next.soc < 0.0) {
        next.soc = 0.0;
        next.under_voltage_fault = true;
    }

    next.terminal_v = terminal_voltage(state, current_a, config, cell);
    const double group_v = cell_group_ocv(state.soc, config, cell) -
                           current_a * config.cell_resistance_ohm /
                               static_cast<double>(config.parallel);
    next.min_group_v = group_v;
    next.max_group_v = group_v;

    next.charge_out_ah = state.charge_out_ah + current_a * dt / 3600.0;
    next.energy_out_wh = state.energy_out_wh + next.terminal_v * current_a * dt / 3600.0;
    next.energy_stored_delta_wh =
        state.energy_stored_delta_wh +
        cell_group_ocv(state.soc, config, cell) * static_cast<double>(config.series) *
            current_a * dt / 3600.0;

    const double loss_w = ohmic_loss_w(config.pack_resistance_ohm(), current_a);
    const double c_th = config.thermal_capacity_j_per_k;
    const double r_th = config.thermal_resistance_k_per_w;
    next.hottest_cell_c =
        state.hottest_cell_c +
        dt * (loss_w / c_th - (state.hottest_cell_c - config.ambient_c) / (r_th * c_th));

    if (std::abs(current_a) >
        2.0 * cell.max_continuous_discharge_a)
        next.over_current_s = state.over_current_s + dt;
    else
        next.over_current_s = 0.0;

    return next;
}

enum class BmsFault {
    none,
    under_voltage,
    over_voltage,
    over_temperature,
    over_current,
};

struct BmsDecision {
    bool open_airs = false;
    BmsFault fault = BmsFault::none;
};

inline const char* bms_fault_name(BmsFault f) {
    switch (f) {
        case BmsFault::none: return "none";
        case BmsFault::under_voltage: return "under-voltage";
        case BmsFault::over_voltage: return "over-voltage";
        case BmsFault::over_temperature: return "over-temperature";
        case BmsFault::over_current: return "over-current";
    }
    return "?";
}

// Pure decision over the current state; idempotent. Current limits scale by
// the parallel count: up to 2x peak for at most the cell's peak window.
inline BmsDecision bms_monitor(const PackState& state, const PackConfig& config,
                               const CellSpec& cell) {
    const double continuous_limit = cell.max_continuous_discharge_a *
                                    static_cast<double>(config.parallel);
    const double peak_limit = cell.peak_discharge_a * static_cast<double>(config.parallel);
    if (state.min_group_v < cell.cutoff_v || state.under_voltage_fault)
        return {true, BmsFault::under_voltage};
    if (state.max_group_v > cell.charge_v)
        return {true, BmsFault::over_voltage};
    if (state.hottest_cell_c > cell.max_discharge_temp_c)
        return {true, BmsFault::over_temperature};
    if (std::abs(state.current_a) > peak_limit)
        return {true, BmsFault::over_current};
    if (std::abs(state.current_a) > continuous_limit &&
        state.over_current_s > cell.peak_window_s + 1e-9)
        return {true, BmsFault::over_current};
    return {false, BmsFault::none};
}

struct RuleCheck {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
};

struct RuleReport {
    std::vector<RuleCheck> checks;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

inline bool within_limit(double value, double limit) {
    // Guard against representation noise on exact-limit configurations.
    return value <= limit + std::max(1e-9, 1e-12 * std::abs(limit));
}

// Segment energy (at nominal voltage) and voltage limits, plus the pack
// voltage ceiling.
inline RuleReport check_segment_rules(const PackConfig& config, const CellSpec& cell) {
    RuleReport report;
    const int cells_per_segment = config.parallel * config.segment_series;
    const double segment_energy_j = static_cast<double>(cells_per_segment) *
                                    config.nominal_cell_v * cell.capacity_ah * 3600.0;
    const double segment_max_v = static_cast<double>(config.segment_series) * cell.charge_v;
    const double pack_max_v =
        static_cast<double>(config.series) * config.full_charge_cell_v();
    report.checks.push_back({"EV5.3.2 segment energy [J]", segment_energy_j, 6.0e6,
                             within_limit(segment_energy_j, 6.0e6)});
    report.checks.push_back({"EV5.3.2 segment voltage [V]", segment_max_v, 120.0,
                             within_limit(segment_max_v, 120.0)});
    report.checks.push_back({"EV4.1.1 pack voltage [V]", pack_max_v, 600.0,
                             within_limit(pack_max_v, 600.0)});
    return report;
}

}  // namespace fsev
