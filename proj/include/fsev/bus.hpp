#pragma once

// Virtual CAN buses: node attachment, per-tick transmission with id-priority
// arbitration, one-tick delivery and candump-style logging.

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fsev/codec.hpp"

namespace fsev {

struct BusTopology {
    std::vector<std::string> bus_names{"can1", "can2", "can3", "can4"};
    std::map<std::string, std::set<std::string>> node_buses;

    void attach(const std::string& node, const std::string& bus) {
        node_buses[node].insert(bus);
    }
    bool attached(const std::string& node, const std::string& bus) const {
        auto it = node_buses.find(node);
        return it != node_buses.end() && it->second.count(bus) > 0;
    }
};

struct BusDelivery {
    std::string sender;
    CanFrame frame;
};

// Frames a node receives out of a delivery batch: everything on its attached
// buses except its own transmissions (no self-reception).
inline std::vector<CanFrame> frames_for_node(
    const BusTopology& topo, const std::string& node,
    const std::map<std::string, std::vector<BusDelivery>>& delivered) {
    std::vector<CanFrame> out;
    for (const auto& [bus_name, list] : delivered) {
        if (!topo.attached(node, bus_name)) continue;
        for (const auto& d : list)
            if (d.sender != node) out.push_back(d.frame);
    }
    return out;
}

// One line per frame: (SSSSSS.mmmuuu) <bus> <ID-hex-3>#<DATA-hex>
inline std::string format_log_line(const CanFrame& f) {
    char head[64];
    std::snprintf(head, sizeof head, "(%.6f) %s %03X#", f.timestamp,
                  f.bus.c_str(), f.id);
    std::string line = head;
    static const char* hex = "0123456789ABCDEF";
    for (int i = 0; i < f.dlc; ++i) {
        line += hex[f.data[static_cast<std::size_t>(i)] >> 4];
        line += hex[f.data[static_cast<std::size_t>(i)] & 0xF];
    }
    return line;
}

inline std::string write_log(const std::vector<CanFrame>& frames) {
    std::string out;
    for (const auto& f : frames) {
        out += format_log_line(f);
        out += '\n';
    }
    return out;
}

// Parses lines produced by format_log_line back into frames.
inline std::vector<CanFrame> read_log(std::string_view text) {
    std::vector<CanFrame> frames;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t endl = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, endl == std::string_view::npos ? text.size() - pos : endl - pos);
        pos = endl == std::string_view::npos ? text.size() + 1 : endl + 1;
        ++line_no;
        if (line.empty()) continue;
        auto tok = detail::split_ws(line);
        if (tok.size() != 3 || tok[0].size() < 3 || tok[0].front() != '(' ||
            tok[0].back() != ')')
            throw ParseError(line_no, "malformed log line");
        CanFrame f;
        f.timestamp = detail::parse_double(tok[0].substr(1, tok[0].size() - 2), line_no);
        f.bus = tok[1];
        auto hash = tok[2].find('#');
        if (hash == std::string::npos)
            throw ParseError(line_no, "missing '#' in frame field");
        f.id = static_cast<std::uint16_t>(
            detail::parse_int(tok[2].substr(0, hash), line_no, 16));
        std::string data = tok[2].substr(hash + 1);
        if (data.size() % 2 != 0 || data.size() > 16)
            throw ParseError(line_no, "bad data length");
        f.dlc = static_cast<std::uint8_t>(data.size() / 2);
        for (std::size_t i = 0; i < f.dlc; ++i)
            f.data[i] = static_cast<std::uint8_t>(
                detail::parse_int(data.substr(2 * i, 2), line_no, 16));
        if (!frame_well_formed(f)) throw ParseError(line_no, "malformed frame");
        frames.push_back(std::move(f));
    }
    return frames;
}

// All buses of the vehicle. Frames transmitted during tick t are delivered
// (in arbitration order: ascending id, ties by sender name) to every other
// attached node at tick t+1. Queues are unbounded; no loss, no self-reception.
class VirtualBus {
public:
    explicit VirtualBus(BusTopology topology, double tick_seconds)
        : topo_(std::move(topology)), dt_(tick_seconds) {}

    const BusTopology& topology() const { return topo_; }

    void set_logging(bool on) { logging_ = on; }

    // Marks the start of tick `tick`; transmissions are stamped with it.
    void begin_tick(long tick) { tick_ = tick; }
    long current_tick() const { return tick_; }

    void transmit(const std::string& node, const std::string& bus, CanFrame frame) {
        if (!topo_.attached(node, bus))
            throw Error("node '" + node + "' is not attached to bus '" + bus + "'");
        if (!frame_well_formed(frame))
            throw Error("malformed frame (id 0x" + MessageDb::to_hex(frame.id) +
                        ", dlc " + std::to_string(frame.dlc) + ")");
        frame.bus = bus;
        frame.timestamp = static_cast<double>(tick_) * dt_;
        queue_.push_back(Pending{tick_, node, std::move(frame)});
    }

    // Returns everything queued before the current tick, per bus, in
    // arbitration order. Frames queued at tick t come out at tick t+1.
    std::map<std::string, std::vector<BusDelivery>> step() {
        const long tick = tick_;
        std::map<std::string, std::vector<BusDelivery>> delivered;
        std::vector<Pending> keep;
        keep.reserve(queue_.size());
        for (auto& p : queue_) {
            if (p.tick < tick)
                delivered[p.frame.bus].push_back(BusDelivery{p.node, std::move(p.frame)});
            else
                keep.push_back(std::move(p));
        }
        queue_ = std::move(keep);
        for (const auto& bus_name : topo_.bus_names) {
            auto it = delivered.find(bus_name);
            if (it == delivered.end()) continue;
            std::stable_sort(it->second.begin(), it->second.end(),
                             [](const BusDelivery& a, const BusDelivery& b) {
                                 if (a.frame.id != b.frame.id)
                                     return a.frame.id < b.frame.id;
                                 return a.sender < b.sender;
                             });
            if (logging_)
                for (const auto& d : it->second) {
                    log_ += format_log_line(d.frame);
                    log_ += '\n';
                }
        }
        return delivered;
    }

    // Remaining queued frames are dropped; log is kept.
    const std::string& log_text() const { return log_; }

private:
    struct Pending {
        long tick;
        std::string node;
        CanFrame frame;
    };

    BusTopology topo_;
    double dt_;
    long tick_ = 0;
    bool logging_ = true;
    std::vector<Pending> queue_;
    std::string log_;
};

}  // namespace fsev
