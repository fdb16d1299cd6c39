#pragma once

// Offline rule audit: recomputes the DC power and pack voltage series from a
// CAN log and checks them against the competition limits, together with the
// static segment checks from the configuration.

#include <string>
#include <vector>

#include "fsev/accumulator.hpp"
#include "fsev/bus.hpp"
#include "fsev/codec.hpp"
#include "fsev/config.hpp"

namespace fsev {

struct LogAudit {
    bool has_data = false;
    double max_power_w = 0.0;
    double max_power_t = 0.0;
    double max_voltage_v = 0.0;
    double max_voltage_t = 0.0;
    std::size_t sample_count = 0;
    RuleReport report;
    std::vector<std::string> failures;  // one line per violating sample
    bool pass() const { return report.pass() && failures.empty(); }
};

// Power is metered at the accumulator side: logged pack voltage times logged
// pack current. The cap check allows the same 0.1% headroom as the live
// audit.
inline LogAudit check_rules(const std::string& log_text, const MessageDb& db,
                            const VehicleConfig& cfg) {
    LogAudit audit;
    audit.report = check_segment_rules(cfg.pack, cfg.cell);

    const MessageDef* bms = db.by_name("bms_status");
    if (!bms) throw Error("message db is missing 'bms_status'");
    const SignalDef* v_sig = bms->find_signal("pack_voltage");
    const SignalDef* i_sig = bms->find_signal("pack_current");
    if (!v_sig || !i_sig)
        throw Error("bms_status must carry pack_voltage and pack_current");

    const double cap_w = cfg.control.power_cap_w;
    const double cap_tol = cap_w * 1.001;
    for (const CanFrame& frame : read_log(log_text)) {
        if (frame.id != bms->id) continue;
        const double v = unpack_signal(*v_sig, frame);
        const double i = unpack_signal(*i_sig, frame);
        const double p = v * i;
        audit.has_data = true;
        ++audit.sample_count;
        if (p > audit.max_power_w) {
            audit.max_power_w = p;
            audit.max_power_t = frame.timestamp;
        }
        if (v > audit.max_voltage_v) {
            audit.max_voltage_v = v;
            audit.max_voltage_t = frame.timestamp;
        }
        char buf[160];
        if (p > cap_tol) {
            std::snprintf(buf, sizeof buf,
                          "power cap exceeded at t=%.6f: %.1f W > %.1f W",
                          frame.timestamp, p, cap_w);
            audit.failures.push_back(buf);
        }
        if (!within_limit(v, 600.0)) {
            std::snprintf(buf, sizeof buf,
                          "EV4.1.1 pack voltage exceeded at t=%.6f: %.2f V > 600 V",
                          frame.timestamp, v);
            audit.failures.push_back(buf);
        }
    }
    return audit;
}

}  // namespace fsev
