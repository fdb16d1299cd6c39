#pragma once

// Scenario files: a driver trace plus timed events (activation, resets,
// fault injection). Format:
//   name: <scenario name>
//   duration: <seconds>
//   trace:
//   <t>,<pedal>,<brake_bar>,<steer_deg>
//   events:
//   <t>,<event>[,<args>...]

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsev/codec.hpp"

namespace fsev {

enum class EventKind {
    activate_ts,
    reset_fault,
    remove_hvd,
    open_loop,
    sensor_dropout,
    force_cell_temp,
};

inline std::optional<EventKind> event_kind_from_name(std::string_view name) {
    if (name == "activate_ts") return EventKind::activate_ts;
    if (name == "reset_fault") return EventKind::reset_fault;
    if (name == "remove_hvd") return EventKind::remove_hvd;
    if (name == "open_loop") return EventKind::open_loop;
    if (name == "sensor_dropout") return EventKind::sensor_dropout;
    if (name == "force_cell_temp") return EventKind::force_cell_temp;
    return std::nullopt;
}

struct ScenarioEvent {
    double t = 0.0;
    EventKind kind = EventKind::activate_ts;
    std::string channel;     // sensor_dropout
    double duration_s = 0.0; // sensor_dropout
    double value = 0.0;      // force_cell_temp
};

struct TraceRow {
    double t = 0.0;
    double pedal = 0.0;
    double brake_bar = 0.0;
    double steer_deg = 0.0;
};

struct Scenario {
    std::string name;
    double duration_s = 0.0;
    std::vector<TraceRow> trace;
    std::vector<ScenarioEvent> events;

    // Linear interpolation between rows, held flat outside the trace.
    TraceRow sample(double t) const {
        if (trace.empty()) return TraceRow{t, 0.0, 0.0, 0.0};
        if (t <= trace.front().t) return trace.front();
        if (t >= trace.back().t) return trace.back();
        auto hi = std::upper_bound(trace.begin(), trace.end(), t,
                                   [](double v, const TraceRow& r) { return v < r.t; });
        auto lo = hi - 1;
        const double span = hi->t - lo->t;
        const double a = span > 0.0 ? (t - lo->t) / span : 0.0;
        TraceRow out;
        out.t = t;
        out.pedal = lo->pedal + (hi->pedal - lo->pedal) * a;
        out.brake_bar = lo->brake_bar + (hi->brake_bar - lo->brake_bar) * a;
        out.steer_deg = lo->steer_deg + (hi->steer_deg - lo->steer_deg) * a;
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string field(line.substr(start, comma == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : comma - start));
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.erase(field.begin());
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
            field.pop_back();
        out.push_back(std::move(field));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text) {
    Scenario scn;
    enum class Section { header, trace, events } section = Section::header;
    bool have_duration = false;

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\t' ||
                                    trimmed.back() == '\r'))
            trimmed.pop_back();
        while (!trimmed.empty() && (trimmed.front() == ' ' || trimmed.front() == '\t'))
            trimmed.erase(trimmed.begin());
        if (trimmed.empty()) continue;

        if (trimmed == "trace:") {
            section = Section::trace;
            continue;
        }
        if (trimmed == "events:") {
            section = Section::events;
            continue;
        }
        if (section == Section::header) {
            if (trimmed.rfind("name:", 0) == 0) {
                scn.name = trimmed.substr(5);
                while (!scn.name.empty() && scn.name.front() == ' ')
                    scn.name.erase(scn.name.begin());
            } else if (trimmed.rfind("duration:", 0) == 0) {
                scn.duration_s = detail::parse_double(
                    detail::split_ws(trimmed.substr(9)).at(0), line_no);
                have_duration = true;
            } else {
                throw ParseError(line_no, "expected name:/duration:/trace:/events:");
            }
            continue;
        }
        auto fields = detail::split_csv(trimmed);
        if (section == Section::trace) {
            if (fields.size() != 4)
                throw ParseError(line_no, "trace row needs t,pedal,brake_bar,steer_deg");
            TraceRow row;
            row.t = detail::parse_double(fields[0], line_no);
            row.pedal = detail::parse_double(fields[1], line_no);
            row.brake_bar = detail::parse_double(fields[2], line_no);
            row.steer_deg = detail::parse_double(fields[3], line_no);
            if (!scn.trace.empty() && row.t < scn.trace.back().t)
                throw ParseError(line_no, "trace rows must be time-sorted");
            scn.trace.push_back(row);
        } else {
            if (fields.size() < 2) throw ParseError(line_no, "event row needs t,event");
            ScenarioEvent ev;
            ev.t = detail::parse_double(fields[0], line_no);
            auto kind = event_kind_from_name(fields[1]);
            if (!kind) throw ParseError(line_no, "unknown event '" + fields[1] + "'");
            ev.kind = *kind;
            if (ev.kind == EventKind::sensor_dropout) {
                if (fields.size() != 4)
                    throw ParseError(line_no, "sensor_dropout needs channel,duration");
                ev.channel = fields[2];
                ev.duration_s = detail::parse_double(fields[3], line_no);
            } else if (ev.kind == EventKind::force_cell_temp) {
                if (fields.size() != 3)
                    throw ParseError(line_no, "force_cell_temp needs a temperature");
                ev.value = detail::parse_double(fields[2], line_no);
            } else if (fields.size() != 2) {
                throw ParseError(line_no, "event '" + fields[1] + "' takes no arguments");
            }
            if (!scn.events.empty() && ev.t < scn.events.back().t)
                throw ParseError(line_no, "events must be time-sorted");
            scn.events.push_back(std::move(ev));
        }
    }
    if (!have_duration || scn.duration_s <= 0.0)
        throw ParseError(line_no, "scenario needs a positive duration");
    return scn;
}

}  // namespace fsev
