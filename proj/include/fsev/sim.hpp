#pragma once

// Fixed-step scenario runner: PDM/sensor, VCU, inverter, BMS and safety
// nodes wired to the four virtual CAN buses around the pack, drivetrain and
// vehicle models. Step order per tick:
//   events -> sensors -> VCU -> buses -> inverters -> pack -> safety ->
//   vehicle -> logger
// Frames transmitted at tick t enter delivery at tick t+1; a node picks its
// inbox up the next time it runs after delivery.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fsev/accumulator.hpp"
#include "fsev/bus.hpp"
#include "fsev/codec.hpp"
#include "fsev/config.hpp"
#include "fsev/drivetrain.hpp"
#include "fsev/safety.hpp"
#include "fsev/scenario.hpp"
#include "fsev/vcu.hpp"
#include "fsev/vehicle.hpp"

namespace fsev {

// Pack current drawn by constant-power loads: the consistent solution of
// (OCV - I*R) * I = P. Clamped at the maximum-deliverable-power point.
inline double pack_current_for_power(double ocv_v, double resistance_ohm,
                                     double power_w) {
    if (power_w <= 0.0 || ocv_v <= 0.0) return 0.0;
    if (resistance_ohm <= 0.0) return power_w / ocv_v;
    const double disc = ocv_v * ocv_v - 4.0 * resistance_ohm * power_w;
    if (disc <= 0.0) return ocv_v / (2.0 * resistance_ohm);
    return (ocv_v - std::sqrt(disc)) / (2.0 * resistance_ohm);
}

struct Violation {
    double t = 0.0;
    std::string what;
};

struct SimReport {
    std::string scenario_name;
    double duration_s = 0.0;
    double energy_delivered_wh = 0.0;      // terminal, integral of V*I
    double energy_from_cells_wh = 0.0;     // OCV basis
    double mech_work_wh = 0.0;
    double drivetrain_loss_wh = 0.0;
    double pack_ohmic_loss_wh = 0.0;
    double peak_dc_power_w = 0.0;
    double peak_wheel_torque_nm = 0.0;
    double peak_motor_speed_rpm = 0.0;
    double final_soc = 1.0;
    double distance_m = 0.0;
    TsState final_ts_state = TsState::ts_off;
    std::vector<Violation> violations;
    std::string can_log_path;
    std::string trace_path;
};

struct SimOptions {
    std::string out_dir;
    bool write_outputs = true;
    bool logger_first = false;  // sample the trace row before physics instead of after
    unsigned seed = 0;          // only used when sensor noise is enabled
};

inline std::string format_report_text(const SimReport& r) {
    char buf[512];
    std::string out;
    out += "scenario: " + r.scenario_name + "\n";
    std::snprintf(buf, sizeof buf,
                  "duration_s: %.3f\ndistance_m: %.2f\nfinal_soc: %.6f\n"
                  "energy_delivered_wh: %.3f\nenergy_from_cells_wh: %.3f\n"
                  "mech_work_wh: %.3f\ndrivetrain_loss_wh: %.3f\n"
                  "pack_ohmic_loss_wh: %.3f\npeak_dc_power_w: %.1f\n"
                  "peak_wheel_torque_nm: %.3f\npeak_motor_speed_rpm: %.1f\n",
                  r.duration_s, r.distance_m, r.final_soc, r.energy_delivered_wh,
                  r.energy_from_cells_wh, r.mech_work_wh, r.drivetrain_loss_wh,
                  r.pack_ohmic_loss_wh, r.peak_dc_power_w, r.peak_wheel_torque_nm,
                  r.peak_motor_speed_rpm);
    out += buf;
    out += std::string("final_ts_state: ") + ts_state_name(r.final_ts_state) + "\n";
    out += "violations: " + std::to_string(r.violations.size()) + "\n";
    for (const auto& v : r.violations) {
        std::snprintf(buf, sizeof buf, "violation: t=%.6f %s\n", v.t, v.what.c_str());
        out += buf;
    }
    return out;
}

inline std::string format_report_csv(const SimReport& r) {
    char buf[256];
    std::string out = "key,value\n";
    auto row = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s,%.6f\n", key, v);
        out += buf;
    };
    out += "scenario," + r.scenario_name + "\n";
    row("duration_s", r.duration_s);
    row("distance_m", r.distance_m);
    row("final_soc", r.final_soc);
    row("energy_delivered_wh", r.energy_delivered_wh);
    row("energy_from_cells_wh", r.energy_from_cells_wh);
    row("mech_work_wh", r.mech_work_wh);
    row("drivetrain_loss_wh", r.drivetrain_loss_wh);
    row("pack_ohmic_loss_wh", r.pack_ohmic_loss_wh);
    row("peak_dc_power_w", r.peak_dc_power_w);
    row("peak_wheel_torque_nm", r.peak_wheel_torque_nm);
    row("peak_motor_speed_rpm", r.peak_motor_speed_rpm);
    out += std::string("final_ts_state,") + ts_state_name(r.final_ts_state) + "\n";
    out += "violation_count," + std::to_string(r.violations.size()) + "\n";
    return out;
}

namespace detail {

inline int signal_index(const MessageDef& def, std::string_view name) {
    for (std::size_t i = 0; i < def.signals.size(); ++i)
        if (def.signals[i].name == name) return static_cast<int>(i);
    throw Error("message '" + def.name + "' lacks signal '" + std::string(name) + "'");
}

struct MsgIo {
    const MessageDef* def = nullptr;
    std::string bus;
    std::vector<double> values;

    void bind(const MessageDb& db, const std::string& name, std::string bus_name) {
        def = db.by_name(name);
        if (!def) throw Error("message db is missing '" + name + "'");
        bus = std::move(bus_name);
        values.assign(def->signals.size(), 0.0);
    }
    // Values saturate at the signal's physical bounds, like a real
    // transducer at the end of its range.
    void set(std::string_view signal, double v) {
        const int i = signal_index(*def, signal);
        const SignalDef& s = def->signals[static_cast<std::size_t>(i)];
        values[static_cast<std::size_t>(i)] = std::clamp(v, s.min_value, s.max_value);
    }
    double get(std::string_view signal) const {
        return values[static_cast<std::size_t>(signal_index(*def, signal))];
    }
    bool due(long tick) const { return tick % def->period_ticks == 0; }
};

}  // namespace detail

class Simulation {
public:
    Simulation(Scenario scenario, VehicleConfig config, MessageDb db,
               SimOptions options = {})
        : scn_(std::move(scenario)),
          cfg_(std::move(config)),
          db_(std::move(db)),
          opts_(std::move(options)),
          bus_(make_topology(), cfg_.sim.tick_s),
          rng_(opts_.seed) {
        cfg_.validate();
        bind_messages();
        pack_.hottest_cell_c = cfg_.pack.ambient_c;
        for (auto& inv : inv_state_) {
            inv.motor_temp_c = cfg_.pack.ambient_c;
            inv.igbt_temp_c = cfg_.pack.ambient_c;
        }
        // Worst one-tick speed gain, used for the cap margin and the
        // ceiling guard.
        const double a_max = 4.0 * cfg_.motor.max_torque_nm * cfg_.vehicle.gear_ratio /
                             (cfg_.vehicle.wheel_radius_m * cfg_.vehicle.mass_kg);
        tick_gain_rpm_ = rad_s_to_rpm(a_max * cfg_.sim.tick_s *
                                      cfg_.vehicle.gear_ratio /
                                      cfg_.vehicle.wheel_radius_m);
        cap_margin_rpm_ = cfg_.sim.staleness_ticks * tick_gain_rpm_ + 1.0;
        bus_.set_logging(opts_.write_outputs);
    }

    SimReport run() {
        const double dt = cfg_.sim.tick_s;
        const long ticks = std::lround(scn_.duration_s / dt);
        SimReport& r = report_;
        r.scenario_name = scn_.name;
        r.duration_s = scn_.duration_s;

        const RuleReport segment = check_segment_rules(cfg_.pack, cfg_.cell);
        for (const auto& check : segment.checks)
            if (!check.pass)
                r.violations.push_back(
                    {0.0, check.name + ": " + detail::format_double(check.value) +
                              " exceeds " + detail::format_double(check.limit)});

        std::string trace;
        if (opts_.write_outputs) {
            trace.reserve(static_cast<std::size_t>(ticks) * 160);
            trace += trace_header();
        }
        std::size_t next_event = 0;

        for (long tick = 0; tick < ticks; ++tick) {
            const double t = static_cast<double>(tick) * dt;
            bus_.begin_tick(tick);
            while (next_event < scn_.events.size() &&
                   std::lround(scn_.events[next_event].t / dt) <= tick)
                apply_event(scn_.events[next_event++]);

            if (opts_.write_outputs && opts_.logger_first) trace += trace_row(t);
            step_sensors(tick, t);
            step_vcu(tick);
            route_deliveries(bus_.step());
            step_drives(tick, dt);
            step_pack_node(tick, dt);
            step_safety(tick, dt);
            vehicle_ = vehicle_step(vehicle_, applied_nm_, true_brake_bar_, dt,
                                    cfg_.vehicle);
            audit_tick(t);
            if (opts_.write_outputs && !opts_.logger_first) trace += trace_row(t);
        }

        r.final_soc = pack_.soc;
        r.distance_m = vehicle_.distance_m;
        r.final_ts_state = safety_.state;
        if (opts_.write_outputs && !opts_.out_dir.empty()) write_outputs(trace);
        return r;
    }

    // Exposed for tests.
    const PackState& pack_state() const { return pack_; }
    const ShutdownState& shutdown_state() const { return safety_; }
    const VehicleState& vehicle_state() const { return vehicle_; }
    const TorqueCommand& last_command() const { return last_cmd_; }
    const VirtualBus& bus() const { return bus_; }

private:
    BusTopology make_topology() {
        BusTopology topo;
        topo.attach("vcu", "can1");
        topo.attach("vcu", "can2");
        topo.attach("vcu", "can3");
        topo.attach("vcu", "can4");
        topo.attach("inv_fl", "can1");
        topo.attach("inv_fr", "can1");
        topo.attach("inv_rl", "can2");
        topo.attach("inv_rr", "can2");
        topo.attach("pdm", "can3");
        topo.attach("safety", "can3");
        topo.attach("bms", "can4");
        for (const auto& bus : {"can1", "can2", "can3", "can4"})
            topo.attach("logger", bus);
        return topo;
    }

    void bind_messages() {
        static const char* wheel_bus[kWheelCount] = {"can1", "can1", "can2", "can2"};
        for (int w = 0; w < kWheelCount; ++w) {
            setpoint_[w].bind(db_, std::string("vcu_setpoint_") + wheel_name(w),
                              wheel_bus[w]);
            inv_status_[w].bind(db_, std::string("inv_status_") + wheel_name(w),
                                wheel_bus[w]);
        }
        driver_msg_.bind(db_, "driver_inputs", "can3");
        hecs_msg_.bind(db_, "hecs", "can3");
        bms_status_.bind(db_, "bms_status", "can4");
        bms_cells_.bind(db_, "bms_cells", "can4");
        safety_msg_.bind(db_, "safety_status", "can3");
    }

    void apply_event(const ScenarioEvent& ev) {
        switch (ev.kind) {
            case EventKind::activate_ts: activate_request_ = true; break;
            case EventKind::reset_fault: reset_request_ = true; break;
            case EventKind::open_loop: loop_closed_ = false; break;
            case EventKind::remove_hvd: safety_ = hvd_remove(safety_); break;
            case EventKind::sensor_dropout: {
                const double dt = cfg_.sim.tick_s;
                dropout_until_[ev.channel] =
                    std::lround((ev.t + ev.duration_s) / dt);
                break;
            }
            case EventKind::force_cell_temp: pack_.hottest_cell_c = ev.value; break;
        }
    }

    double sensor_value(const std::string& channel, double live, long tick) {
        auto it = dropout_until_.find(channel);
        if (it != dropout_until_.end() && tick < it->second) {
            auto last = last_sent_.find(channel);
            return last == last_sent_.end() ? 0.0 : last->second;
        }
        last_sent_[channel] = live;
        return live;
    }

    double with_noise(double v, double span) {
        if (cfg_.sim.sensor_noise_frac <= 0.0) return v;
        return v + cfg_.sim.sensor_noise_frac * span * noise_(rng_);
    }

    void step_sensors(long tick, double t) {
        const TraceRow row = scn_.sample(t);
        true_brake_bar_ = row.brake_bar;  // BSPD taps the sensor line directly
        if (driver_msg_.due(tick)) {
            driver_msg_.set("apps", sensor_value("apps", with_noise(row.pedal, 1.0), tick));
            driver_msg_.set("brake_bar",
                            sensor_value("brake_bar", with_noise(row.brake_bar, 10.0), tick));
            driver_msg_.set("steer_deg",
                            sensor_value("steer_deg", with_noise(row.steer_deg, 10.0), tick));
            transmit("pdm", driver_msg_);
        }
        if (hecs_msg_.due(tick)) {
            hecs_msg_.set("current_a",
                          sensor_value("current_a", pack_.current_a, tick));
            transmit("pdm", hecs_msg_);
        }
    }

    void step_vcu(long tick) {
        for (const auto& frame : inbox_["vcu"]) {
            const MessageDef* def = db_.by_id(frame.id);
            if (!def) continue;
            if (def->name == "driver_inputs") {
                vcu_pedal_ = unpack_signal(*def->find_signal("apps"), frame);
                vcu_brake_ = unpack_signal(*def->find_signal("brake_bar"), frame);
                vcu_steer_ = unpack_signal(*def->find_signal("steer_deg"), frame);
            } else if (def->name == "bms_status") {
                vcu_vdc_ = unpack_signal(*def->find_signal("pack_voltage"), frame);
                vcu_hottest_ = unpack_signal(*def->find_signal("hottest_cell_c"), frame);
            } else {
                for (int w = 0; w < kWheelCount; ++w)
                    if (def->name == inv_status_[w].def->name)
                        vcu_speed_rpm_[static_cast<std::size_t>(w)] =
                            unpack_signal(*def->find_signal("speed_rpm"), frame);
            }
        }
        inbox_["vcu"].clear();

        const DriverInputs in =
            validate_inputs(vcu_pedal_, vcu_brake_, vcu_steer_, latch_, cfg_.control);
        std::array<double, kWheelCount> cap_speed = vcu_speed_rpm_;
        for (double& s : cap_speed) s += cap_margin_rpm_;
        last_cmd_ = arbitrate_torque(in, cap_speed, vcu_vdc_, vcu_hottest_, cfg_.motor,
                                     cfg_.control);
        for (int w = 0; w < kWheelCount; ++w)
            if (setpoint_[w].due(tick)) {
                setpoint_[w].set("torque_req",
                                 last_cmd_.wheel_nm[static_cast<std::size_t>(w)]);
                transmit("vcu", setpoint_[w]);
            }
    }

    void step_drives(long tick, double dt) {
        const bool enabled = safety_.state == TsState::ts_active;
        const double vdc = safety_.v_link;
        const double speed = vehicle_.motor_speed_rpm;
        total_dc_w_ = 0.0;
        for (int w = 0; w < kWheelCount; ++w) {
            auto& inv = inv_state_[static_cast<std::size_t>(w)];
            const std::string node = std::string("inv_") + wheel_name(w);
            for (const auto& frame : inbox_[node]) {
                const MessageDef* def = db_.by_id(frame.id);
                if (def && def->name == setpoint_[w].def->name)
                    cmd_nm_[static_cast<std::size_t>(w)] =
                        unpack_signal(*def->find_signal("torque_req"), frame);
            }
            inbox_[node].clear();

            inv.enabled = enabled;
            inv.dc_link_v = vdc;
            double applied = 0.0;
            DrivePower power;
            if (enabled && vdc > 0.0) {
                const double allowed = max_torque(speed, vdc, inv, cfg_.motor);
                applied = std::min(cmd_nm_[static_cast<std::size_t>(w)], allowed);
                // Ceiling guard: stop driving shortly below max speed so one
                // tick of acceleration cannot cross it.
                if (speed >= cfg_.motor.max_speed_rpm - 2.0 * tick_gain_rpm_)
                    applied = 0.0;
                power = apply_torque(applied, speed, vdc, cfg_.motor);
            }
            applied_nm_[static_cast<std::size_t>(w)] = applied;
            total_dc_w_ += power.dc_w;
            report_.mech_work_wh += power.mech_w * dt / 3600.0;
            report_.drivetrain_loss_wh += (power.dc_w - power.mech_w) * dt / 3600.0;
            report_.peak_wheel_torque_nm =
                std::max(report_.peak_wheel_torque_nm, applied);

            inv = step_peak_window(inv, applied, dt, cfg_.motor);
            inv = step_drive_thermal(inv, power.dc_w - power.mech_w,
                                     cfg_.pack.ambient_c, dt, cfg_.motor);

            if (inv_status_[w].due(tick)) {
                inv_status_[w].set("speed_rpm", speed);
                inv_status_[w].set("torque_nm", applied);
                inv_status_[w].set("motor_temp_c", inv.motor_temp_c);
                inv_status_[w].set("igbt_temp_c", inv.igbt_temp_c);
                transmit(std::string("inv_") + wheel_name(w), inv_status_[w]);
            }
        }
    }

    void step_pack_node(long tick, double dt) {
        const double ocv = cell_group_ocv(pack_.soc, cfg_.pack, cfg_.cell) *
                           static_cast<double>(cfg_.pack.series);
        const double current = pack_current_for_power(
            ocv, cfg_.pack.pack_resistance_ohm(), total_dc_w_);
        pack_ = step_pack(pack_, current, dt, cfg_.pack, cfg_.cell);
        report_.pack_ohmic_loss_wh +=
            ohmic_loss_w(cfg_.pack.pack_resistance_ohm(), current) * dt / 3600.0;
        report_.energy_delivered_wh = pack_.energy_out_wh;
        report_.energy_from_cells_wh = pack_.energy_stored_delta_wh;
        bms_decision_ = bms_monitor(pack_, cfg_.pack, cfg_.cell);

        if (bms_status_.due(tick)) {
            bms_status_.set("pack_voltage", pack_.terminal_v);
            bms_status_.set("pack_current", pack_.current_a);
            bms_status_.set("soc_pct", pack_.soc * 100.0);
            bms_status_.set("hottest_cell_c", pack_.hottest_cell_c);
            transmit("bms", bms_status_);
        }
        if (bms_cells_.due(tick)) {
            bms_cells_.set("min_cell_v", pack_.min_group_v);
            bms_cells_.set("max_cell_v", pack_.max_group_v);
            bms_cells_.set("min_cell_temp_c", cfg_.pack.ambient_c);
            bms_cells_.set("max_cell_temp_c", pack_.hottest_cell_c);
            transmit("bms", bms_cells_);
        }
    }

    void step_safety(long tick, double dt) {
        bspd_ = bspd_evaluate(
            bspd_,
            BspdInputs{true_brake_bar_, pack_.current_a, safety_.v_link}, dt,
            cfg_.safety);
        ShutdownInputs in;
        in.activate = activate_request_;
        in.reset = reset_request_;
        in.loop_closed = loop_closed_;
        in.bms_fault = bms_decision_.open_airs;
        in.bspd_latch = bspd_.latched;
        in.pack_voltage = pack_.terminal_v;
        if (reset_request_) bspd_ = BspdState{};
        safety_ = step_shutdown(safety_, in, dt, cfg_.safety);
        activate_request_ = false;
        reset_request_ = false;

        if (safety_msg_.due(tick)) {
            safety_msg_.set("state", static_cast<double>(safety_.state));
            safety_msg_.set("v_link", std::min(safety_.v_link, 650.0));
            safety_msg_.set("tsal_red",
                            tsal_state(safety_, cfg_.safety) == TsalColour::red ? 1.0 : 0.0);
            safety_msg_.set("air_minus", safety_.air_minus ? 1.0 : 0.0);
            safety_msg_.set("air_plus", safety_.air_plus ? 1.0 : 0.0);
            safety_msg_.set("precharge", safety_.precharge_relay ? 1.0 : 0.0);
            safety_msg_.set("hvd_present", safety_.hvd_present ? 1.0 : 0.0);
            safety_msg_.set("loop_closed", safety_.loop_closed ? 1.0 : 0.0);
            transmit("safety", safety_msg_);
        }
    }

    void audit_tick(double t) {
        report_.peak_dc_power_w = std::max(report_.peak_dc_power_w, total_dc_w_);
        report_.peak_motor_speed_rpm =
            std::max(report_.peak_motor_speed_rpm, vehicle_.motor_speed_rpm);
        if (total_dc_w_ > cfg_.control.power_cap_w * 1.001)
            report_.violations.push_back(
                {t, "power cap exceeded: " + detail::format_double(total_dc_w_) +
                        " W > " + detail::format_double(cfg_.control.power_cap_w) + " W"});
        if (!within_limit(pack_.terminal_v, 600.0))
            report_.violations.push_back(
                {t, "EV4.1.1 pack voltage [V]: " +
                        detail::format_double(pack_.terminal_v) + " exceeds 600"});
        if (vehicle_.motor_speed_rpm > cfg_.motor.max_speed_rpm)
            report_.violations.push_back(
                {t, "motor speed exceeds " +
                        detail::format_double(cfg_.motor.max_speed_rpm) + " rpm"});
    }

    void transmit(const std::string& node, const detail::MsgIo& msg) {
        bus_.transmit(node, msg.bus, encode_signals(*msg.def, msg.values));
    }

    // Only the nodes that act on CAN data keep an inbox; the BMS, PDM and
    // safety nodes are driven by their hardwired inputs.
    void route_deliveries(const std::map<std::string, std::vector<BusDelivery>>& delivered) {
        static const char* consumers[] = {"vcu", "inv_fl", "inv_fr", "inv_rl", "inv_rr"};
        for (const char* node : consumers) {
            auto frames = frames_for_node(bus_.topology(), node, delivered);
            auto& box = inbox_[node];
            box.insert(box.end(), std::make_move_iterator(frames.begin()),
                       std::make_move_iterator(frames.end()));
        }
    }

    std::string trace_header() const {
        return "t,pedal,brake_bar,steer_deg,speed_mps,distance_m,motor_rpm,"
               "torque_fl_nm,torque_fr_nm,torque_rl_nm,torque_rr_nm,dc_power_w,"
               "pack_v,pack_current_a,soc,hottest_cell_c,motor_temp_c,igbt_temp_c,"
               "ts_state,v_link_v,tsal\n";
    }

    std::string trace_row(double t) const {
        char buf[512];
        std::snprintf(
            buf, sizeof buf,
            "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,"
            "%.6f,%.6f,%.6f,%.6f,%.6f,%s,%.6f,%s\n",
            t, scn_.sample(t).pedal, scn_.sample(t).brake_bar, scn_.sample(t).steer_deg,
            vehicle_.speed_mps, vehicle_.distance_m, vehicle_.motor_speed_rpm,
            applied_nm_[0], applied_nm_[1], applied_nm_[2], applied_nm_[3],
            total_dc_w_, pack_.terminal_v, pack_.current_a, pack_.soc,
            pack_.hottest_cell_c, inv_state_[0].motor_temp_c, inv_state_[0].igbt_temp_c,
            ts_state_name(safety_.state), safety_.v_link,
            tsal_state(safety_, cfg_.safety) == TsalColour::red ? "RED" : "GREEN");
        return buf;
    }

    void write_outputs(const std::string& trace) {
        namespace fs = std::filesystem;
        fs::create_directories(opts_.out_dir);
        const fs::path dir{opts_.out_dir};
        report_.can_log_path = (dir / "can.log").string();
        report_.trace_path = (dir / "trace.csv").string();
        std::ofstream log(report_.can_log_path, std::ios::binary);
        log << bus_.log_text();
        std::ofstream tr(report_.trace_path, std::ios::binary);
        tr << trace;
        std::ofstream rep(dir / "report.txt", std::ios::binary);
        rep << format_report_text(report_);
        std::ofstream csv(dir / "report.csv", std::ios::binary);
        csv << format_report_csv(report_);
    }

    Scenario scn_;
    VehicleConfig cfg_;
    MessageDb db_;
    SimOptions opts_;
    VirtualBus bus_;
    SimReport report_;

    detail::MsgIo setpoint_[kWheelCount], inv_status_[kWheelCount];
    detail::MsgIo driver_msg_, hecs_msg_, bms_status_, bms_cells_, safety_msg_;
    std::map<std::string, std::vector<CanFrame>> inbox_;

    PackState pack_;
    ShutdownState safety_;
    BspdState bspd_;
    BmsDecision bms_decision_;
    VehicleState vehicle_;
    std::array<InverterState, kWheelCount> inv_state_{};
    PlausibilityLatch latch_;

    std::array<double, kWheelCount> cmd_nm_{};      // latest received setpoints
    std::array<double, kWheelCount> applied_nm_{};  // torque actually produced
    double total_dc_w_ = 0.0;
    double true_brake_bar_ = 0.0;

    // VCU caches of the latest CAN values.
    double vcu_pedal_ = 0.0, vcu_brake_ = 0.0, vcu_steer_ = 0.0;
    double vcu_vdc_ = 0.0, vcu_hottest_ = 25.0;
    std::array<double, kWheelCount> vcu_speed_rpm_{};
    TorqueCommand last_cmd_;

    bool activate_request_ = false;
    bool reset_request_ = false;
    bool loop_closed_ = true;
    std::map<std::string, long> dropout_until_;
    std::map<std::string, double> last_sent_;

    double tick_gain_rpm_ = 0.0;
    double cap_margin_rpm_ = 0.0;
    std::mt19937 rng_;
    std::normal_distribution<double> noise_{0.0, 1.0};
};

inline SimReport run_scenario(const Scenario& scenario, const VehicleConfig& config,
                              const MessageDb& db, const SimOptions& options = {}) {
    Simulation sim(scenario, config, db, options);
    return sim.run();
}

}  // namespace fsev
