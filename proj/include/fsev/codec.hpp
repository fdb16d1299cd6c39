#pragma once

// CAN frame type, message database and bit-exact signal packing.
//
// The database is a line-oriented text format:
//   msg <name> <id-hex> <dlc> <sender> <period_ticks>
//     sig <name> <start_bit> <bit_len> <LE|BE> <scale> <offset> <min> <max> <unit>
// Comments start with '#'. See docs/formats.md.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fsev {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

enum class ByteOrder { little_endian, big_endian };

// Classical CAN only: 11-bit identifier, up to 8 data bytes.
struct CanFrame {
    std::uint16_t id = 0;
    std::uint8_t dlc = 0;
    std::array<std::uint8_t, 8> data{};
    std::string bus;
    double timestamp = 0.0;  // simulation seconds
};

inline constexpr std::uint16_t kMaxCanId = 0x7FF;

inline bool frame_well_formed(const CanFrame& f) {
    return f.id <= kMaxCanId && f.dlc <= 8;
}

struct SignalDef {
    std::string name;
    int start_bit = 0;   // LE: LSB position, LSB-first numbering.
                         // BE: MSB position, MSB-first numbering.
    int bit_length = 1;  // 1..64
    ByteOrder order = ByteOrder::little_endian;
    double scale = 1.0;  // physical units per raw count, > 0
    double offset = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    std::string unit;
};

// Absolute payload-bit mask (LSB-first numbering) occupied by a signal.
// Used for overlap and dlc-fit checks; both byte orders map into the
// same coordinate system here.
inline std::uint64_t signal_bit_mask(const SignalDef& s) {
    std::uint64_t mask = 0;
    for (int i = 0; i < s.bit_length; ++i) {
        int byte, bit;
        if (s.order == ByteOrder::little_endian) {
            const int p = s.start_bit + i;
            byte = p >> 3;
            bit = p & 7;
        } else {
            const int p = s.start_bit + i;
            byte = p >> 3;
            bit = 7 - (p & 7);
        }
        mask |= std::uint64_t{1} << (byte * 8 + bit);
    }
    return mask;
}

inline std::uint64_t raw_ceiling(const SignalDef& s) {
    return s.bit_length >= 64 ? ~std::uint64_t{0}
                              : (std::uint64_t{1} << s.bit_length) - 1;
}

// Physical -> raw counts. Rejects values outside [min,max]; saturates at the
// representable raw range (never wraps).
inline std::uint64_t pack_signal(const SignalDef& def, double physical) {
    if (!(physical >= def.min_value && physical <= def.max_value))
        throw Error("signal '" + def.name + "': value " + std::to_string(physical) +
                    " outside [" + std::to_string(def.min_value) + ", " +
                    std::to_string(def.max_value) + "]");
    const double raw_real = (physical - def.offset) / def.scale;
    if (raw_real <= 0.0) return 0;
    const double ceiling = static_cast<double>(raw_ceiling(def));
    if (raw_real >= ceiling) return raw_ceiling(def);
    return static_cast<std::uint64_t>(raw_real + 0.5);
}

inline void place_signal(const SignalDef& def, std::uint64_t raw,
                         std::span<std::uint8_t> payload) {
    for (int i = 0; i < def.bit_length; ++i) {
        int byte, bit, value_bit;
        if (def.order == ByteOrder::little_endian) {
            const int p = def.start_bit + i;
            byte = p >> 3;
            bit = p & 7;
            value_bit = i;
        } else {
            const int p = def.start_bit + i;
            byte = p >> 3;
            bit = 7 - (p & 7);
            value_bit = def.bit_length - 1 - i;
        }
        if ((raw >> value_bit) & 1)
            payload[static_cast<std::size_t>(byte)] |= std::uint8_t(1u << bit);
        else
            payload[static_cast<std::size_t>(byte)] &= std::uint8_t(~(1u << bit));
    }
}

inline std::uint64_t extract_signal(const SignalDef& def,
                                    std::span<const std::uint8_t> payload) {
    std::uint64_t raw = 0;
    for (int i = 0; i < def.bit_length; ++i) {
        int byte, bit, value_bit;
        if (def.order == ByteOrder::little_endian) {
            const int p = def.start_bit + i;
            byte = p >> 3;
            bit = p & 7;
            value_bit = i;
        } else {
            const int p = def.start_bit + i;
            byte = p >> 3;
            bit = 7 - (p & 7);
            value_bit = def.bit_length - 1 - i;
        }
        if ((payload[static_cast<std::size_t>(byte)] >> bit) & 1)
            raw |= std::uint64_t{1} << value_bit;
    }
    return raw;
}

inline double raw_to_physical(const SignalDef& def, std::uint64_t raw) {
    return static_cast<double>(raw) * def.scale + def.offset;
}

inline double unpack_signal(const SignalDef& def, const CanFrame& frame) {
    if (def.start_bit + def.bit_length > frame.dlc * 8)
        throw Error("signal '" + def.name + "': frame too short (dlc " +
                    std::to_string(frame.dlc) + ")");
    return raw_to_physical(def, extract_signal(def, frame.data));
}

struct MessageDef {
    std::string name;
    std::uint16_t id = 0;
    int dlc = 8;
    std::string sender;
    int period_ticks = 1;
    std::vector<SignalDef> signals;

    const SignalDef* find_signal(std::string_view n) const {
        for (const auto& s : signals)
            if (s.name == n) return &s;
        return nullptr;
    }
};

class MessageDb {
public:
    void add(MessageDef def) {
        if (by_id_.count(def.id))
            throw Error("duplicate message id 0x" + to_hex(def.id) + " ('" +
                        def.name + "' vs '" + by_id_.at(def.id)->name + "')");
        if (by_name_.count(def.name))
            throw Error("duplicate message name '" + def.name + "'");
        messages_.push_back(std::move(def));
        reindex();
    }

    const MessageDef* by_id(std::uint16_t id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : it->second;
    }
    const MessageDef* by_name(std::string_view name) const {
        auto it = by_name_.find(std::string(name));
        return it == by_name_.end() ? nullptr : it->second;
    }
    const std::vector<MessageDef>& messages() const { return messages_; }
    bool empty() const { return messages_.empty(); }

    static std::string to_hex(std::uint16_t id) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "%03X", id);
        return buf;
    }

private:
    void reindex() {
        by_id_.clear();
        by_name_.clear();
        for (const auto& m : messages_) {
            by_id_[m.id] = &m;
            by_name_[m.name] = &m;
        }
    }

    std::vector<MessageDef> messages_;
    std::map<std::uint16_t, const MessageDef*> by_id_;
    std::map<std::string, const MessageDef*> by_name_;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_double(const std::string& tok, int line) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError(line, "bad number '" + tok + "'");
    return v;
}

inline long parse_int(const std::string& tok, int line, int base = 10) {
    long v = 0;
    std::string_view sv = tok;
    if (base == 16 && sv.size() > 2 && sv[0] == '0' && (sv[1] == 'x' || sv[1] == 'X'))
        sv.remove_prefix(2);
    auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v, base);
    if (ec != std::errc{} || p != sv.data() + sv.size())
        throw ParseError(line, "bad integer '" + tok + "'");
    return v;
}

// Shortest round-trip decimal form, so serialize(parse(.)) is a fixpoint.
inline std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline void validate_message(const MessageDef& m, int line) {
    if (m.id > kMaxCanId)
        throw ParseError(line, "message '" + m.name + "': id exceeds 11 bits");
    if (m.dlc < 0 || m.dlc > 8)
        throw ParseError(line, "message '" + m.name + "': dlc must be 0..8");
    if (m.period_ticks <= 0)
        throw ParseError(line, "message '" + m.name + "': period must be positive");
    std::uint64_t used = 0;
    const std::uint64_t frame_mask =
        m.dlc == 8 ? ~std::uint64_t{0} : (std::uint64_t{1} << (m.dlc * 8)) - 1;
    for (std::size_t i = 0; i < m.signals.size(); ++i) {
        const auto& s = m.signals[i];
        if (s.bit_length < 1 || s.bit_length > 64)
            throw ParseError(line, "signal '" + s.name + "': bit length must be 1..64");
        if (s.start_bit < 0 || s.start_bit + s.bit_length > 64)
            throw ParseError(line, "signal '" + s.name + "': bit range outside frame");
        if (s.scale <= 0.0)
            throw ParseError(line, "signal '" + s.name + "': scale must be positive");
        if (s.min_value > s.max_value)
            throw ParseError(line, "signal '" + s.name + "': min exceeds max");
        const std::uint64_t mask = signal_bit_mask(s);
        if (mask & ~frame_mask)
            throw ParseError(line, "signal '" + s.name + "' exceeds dlc " +
                                       std::to_string(m.dlc) + " of message '" +
                                       m.name + "'");
        if (mask & used) {
            std::string other;
            for (std::size_t j = 0; j < i; ++j)
                if (signal_bit_mask(m.signals[j]) & mask) other = m.signals[j].name;
            throw ParseError(line, "signals '" + other + "' and '" + s.name +
                                       "' overlap in message '" + m.name + "'");
        }
        used |= mask;
        // Both bounds must be representable so pack/unpack round-trips on
        // the whole [min,max] interval.
        const double lo = (s.min_value - s.offset) / s.scale;
        const double hi = (s.max_value - s.offset) / s.scale;
        if (lo < -0.5 || hi > static_cast<double>(raw_ceiling(s)) + 0.5)
            throw ParseError(line, "signal '" + s.name +
                                       "': [min,max] not representable in " +
                                       std::to_string(s.bit_length) + " bits");
        for (std::size_t j = 0; j < i; ++j)
            if (m.signals[j].name == s.name)
                throw ParseError(line, "duplicate signal name '" + s.name +
                                           "' in message '" + m.name + "'");
    }
}

}  // namespace detail

// Parses the message-db text format. Any violation rejects the whole file.
inline MessageDb load_message_db(std::string_view text) {
    MessageDb db;
    MessageDef current;
    bool have_msg = false;
    int msg_line = 0;
    int line_no = 0;

    std::istringstream in{std::string(text)};
    std::string line;
    auto flush = [&] {
        if (!have_msg) return;
        detail::validate_message(current, msg_line);
        try {
            db.add(std::move(current));
        } catch (const Error& e) {
            throw ParseError(msg_line, e.what());
        }
        current = MessageDef{};
        have_msg = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "msg") {
            flush();
            if (tok.size() != 6)
                throw ParseError(line_no,
                                 "expected: msg <name> <id-hex> <dlc> <sender> <period_ticks>");
            current.name = tok[1];
            current.id = static_cast<std::uint16_t>(detail::parse_int(tok[2], line_no, 16));
            current.dlc = static_cast<int>(detail::parse_int(tok[3], line_no));
            current.sender = tok[4];
            current.period_ticks = static_cast<int>(detail::parse_int(tok[5], line_no));
            have_msg = true;
            msg_line = line_no;
        } else if (tok[0] == "sig") {
            if (!have_msg)
                throw ParseError(line_no, "sig line before any msg line");
            if (tok.size() != 10)
                throw ParseError(line_no,
                                 "expected: sig <name> <start_bit> <bit_len> <LE|BE> "
                                 "<scale> <offset> <min> <max> <unit>");
            SignalDef s;
            s.name = tok[1];
            s.start_bit = static_cast<int>(detail::parse_int(tok[2], line_no));
            s.bit_length = static_cast<int>(detail::parse_int(tok[3], line_no));
            if (tok[4] == "LE")
                s.order = ByteOrder::little_endian;
            else if (tok[4] == "BE")
                s.order = ByteOrder::big_endian;
            else
                throw ParseError(line_no, "byte order must be LE or BE, got '" + tok[4] + "'");
            s.scale = detail::parse_double(tok[5], line_no);
            s.offset = detail::parse_double(tok[6], line_no);
            s.min_value = detail::parse_double(tok[7], line_no);
            s.max_value = detail::parse_double(tok[8], line_no);
            s.unit = tok[9];
            current.signals.push_back(std::move(s));
        } else {
            throw ParseError(line_no, "unknown keyword '" + tok[0] + "'");
        }
    }
    flush();
    return db;
}

// Canonical form: messages sorted by id, signals by start bit, shortest
// round-trip number formatting. serialize(parse(.)) is idempotent.
inline std::string serialize_message_db(const MessageDb& db) {
    std::vector<const MessageDef*> msgs;
    for (const auto& m : db.messages()) msgs.push_back(&m);
    std::sort(msgs.begin(), msgs.end(),
              [](const MessageDef* a, const MessageDef* b) { return a->id < b->id; });
    std::string out;
    for (const MessageDef* m : msgs) {
        out += "msg " + m->name + " 0x" + MessageDb::to_hex(m->id) + " " +
               std::to_string(m->dlc) + " " + m->sender + " " +
               std::to_string(m->period_ticks) + "\n";
        std::vector<const SignalDef*> sigs;
        for (const auto& s : m->signals) sigs.push_back(&s);
        std::sort(sigs.begin(), sigs.end(), [](const SignalDef* a, const SignalDef* b) {
            return a->start_bit < b->start_bit;
        });
        for (const SignalDef* s : sigs) {
            out += "  sig " + s->name + " " + std::to_string(s->start_bit) + " " +
                   std::to_string(s->bit_length) + " " +
                   (s->order == ByteOrder::little_endian ? "LE" : "BE") + " " +
                   detail::format_double(s->scale) + " " +
                   detail::format_double(s->offset) + " " +
                   detail::format_double(s->min_value) + " " +
                   detail::format_double(s->max_value) + " " + s->unit + "\n";
        }
    }
    return out;
}

// Positional encode for hot paths: values ordered as def.signals.
inline CanFrame encode_signals(const MessageDef& def, std::span<const double> values) {
    if (values.size() != def.signals.size())
        throw Error("message '" + def.name + "': expected " +
                    std::to_string(def.signals.size()) + " values");
    CanFrame f;
    f.id = def.id;
    f.dlc = static_cast<std::uint8_t>(def.dlc);
    for (std::size_t i = 0; i < values.size(); ++i)
        place_signal(def.signals[i], pack_signal(def.signals[i], values[i]), f.data);
    return f;
}

inline CanFrame encode_message(const MessageDb& db, std::string_view name,
                               const std::map<std::string, double>& values) {
    const MessageDef* def = db.by_name(name);
    if (!def) throw Error("unknown message '" + std::string(name) + "'");
    std::vector<double> ordered;
    ordered.reserve(def->signals.size());
    for (const auto& s : def->signals) {
        auto it = values.find(s.name);
        if (it == values.end())
            throw Error("message '" + def->name + "': missing signal '" + s.name + "'");
        ordered.push_back(it->second);
    }
    for (const auto& [k, v] : values)
        if (!def->find_signal(k))
            throw Error("message '" + def->name + "': unknown signal '" + k + "'");
    return encode_signals(*def, ordered);
}

struct DecodedMessage {
    std::string name;
    std::map<std::string, double> values;
};

// Unknown id is an unmapped frame, not an error.
inline std::optional<DecodedMessage> decode_frame(const MessageDb& db,
                                                  const CanFrame& frame) {
    const MessageDef* def = db.by_id(frame.id);
    if (!def) return std::nullopt;
    DecodedMessage out;
    out.name = def->name;
    for (const auto& s : def->signals)
        out.values[s.name] = unpack_signal(s, frame);
    return out;
}

}  // namespace fsev
