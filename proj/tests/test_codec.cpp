#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fsev/codec.hpp"
#include "test_util.hpp"

using namespace fsev;
using Catch::Approx;

namespace {

SignalDef sig16le(double scale = 1.0, double offset = 0.0, double min = 0.0,
                  double max = 65535.0) {
    SignalDef s;
    s.name = "x";
    s.start_bit = 0;
    s.bit_length = 16;
    s.order = ByteOrder::little_endian;
    s.scale = scale;
    s.offset = offset;
    s.min_value = min;
    s.max_value = max;
    return s;
}

}  // namespace

TEST_CASE("message db parses the smallest legal input") {
    const auto db = load_message_db("msg m1 0x100 2 vcu 10\n  sig s1 0 16 LE 1 0 0 65535 raw\n");
    REQUIRE(db.messages().size() == 1);
    REQUIRE(db.by_name("m1") != nullptr);
    REQUIRE(db.by_id(0x100) != nullptr);
    REQUIRE(db.by_name("m1")->signals.size() == 1);
}

TEST_CASE("overlapping signals are rejected naming both") {
    const char* text =
        "msg m1 0x100 4 vcu 10\n"
        "  sig a 0 16 LE 1 0 0 65535 raw\n"
        "  sig b 8 16 LE 1 0 0 65535 raw\n";
    REQUIRE_THROWS_WITH(load_message_db(text),
                        Catch::Matchers::ContainsSubstring("a") &&
                            Catch::Matchers::ContainsSubstring("b") &&
                            Catch::Matchers::ContainsSubstring("overlap"));
}

TEST_CASE("signal exceeding dlc is rejected") {
    REQUIRE_THROWS_WITH(
        load_message_db("msg m1 0x100 1 vcu 10\n  sig a 0 16 LE 1 0 0 65535 raw\n"),
        Catch::Matchers::ContainsSubstring("exceeds dlc"));
}

TEST_CASE("duplicate message id is rejected") {
    const char* text =
        "msg m1 0x100 2 vcu 10\n  sig a 0 8 LE 1 0 0 255 raw\n"
        "msg m2 0x100 2 vcu 10\n  sig b 0 8 LE 1 0 0 255 raw\n";
    REQUIRE_THROWS_WITH(load_message_db(text),
                        Catch::Matchers::ContainsSubstring("duplicate message id"));
}

TEST_CASE("syntax errors carry the line number") {
    try {
        load_message_db("msg m1 0x100 2 vcu 10\n  sig broken\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.line() == 2);
    }
}

TEST_CASE("pack_signal rounds through scale and offset") {
    auto s = sig16le(0.1, 0.0, 0.0, 100.0);
    CHECK(pack_signal(s, 9.8) == 98);
    CHECK(pack_signal(s, 0.0) == 0);
    CHECK_THROWS_AS(pack_signal(s, 101.0), Error);
    CHECK_THROWS_AS(pack_signal(s, -1.0), Error);
}

TEST_CASE("16-bit little-endian placement matches hand-packed bytes") {
    auto s = sig16le(1.0, 0.0, 0.0, 20000.0);
    CanFrame f;
    f.dlc = 2;
    place_signal(s, pack_signal(s, 12000.0), f.data);
    CHECK(f.data[0] == 0xE0);
    CHECK(f.data[1] == 0x2E);
    CHECK(unpack_signal(s, f) == 12000.0);
}

TEST_CASE("big-endian placement puts the MSB first") {
    SignalDef s = sig16le(0.01, 0.0, 0.0, 650.0);
    s.order = ByteOrder::big_endian;
    CanFrame f;
    f.dlc = 2;
    place_signal(s, pack_signal(s, 137.5), f.data);  // raw 13750 = 0x35B6
    CHECK(f.data[0] == 0x35);
    CHECK(f.data[1] == 0xB6);
    CHECK(unpack_signal(s, f) == Approx(137.5).margin(1e-9));
}

TEST_CASE("unpack of an all-zero payload with zero offset is zero") {
    auto s = sig16le(0.25);
    CanFrame f;
    f.dlc = 8;
    CHECK(unpack_signal(s, f) == 0.0);
}

TEST_CASE("unpack rejects frames shorter than the signal") {
    auto s = sig16le();
    CanFrame f;
    f.dlc = 1;
    CHECK_THROWS_AS(unpack_signal(s, f), Error);
}

TEST_CASE("saturation never wraps") {
    auto s = sig16le(1.0, 0.0, 0.0, 1e6);  // bounds wider than 16 bits on purpose
    SignalDef narrow = s;
    narrow.bit_length = 8;
    narrow.start_bit = 0;
    CHECK(pack_signal(narrow, 300.0) == 255);
    CHECK(pack_signal(narrow, 1e6) == 255);
}

TEST_CASE("pack/unpack round-trips within half a scale step on random signals") {
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> start_dist(0, 47);
    std::uniform_int_distribution<int> len_dist(1, 16);
    std::uniform_real_distribution<double> scale_dist(0.001, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int i = 0; i < 2000; ++i) {
        SignalDef s;
        s.name = "r";
        s.start_bit = start_dist(rng);
        s.bit_length = len_dist(rng);
        s.order = unit(rng) < 0.5 ? ByteOrder::little_endian : ByteOrder::big_endian;
        s.scale = scale_dist(rng);
        s.offset = (unit(rng) - 0.5) * 100.0;
        const double raw_max = static_cast<double>(raw_ceiling(s));
        s.min_value = s.offset;
        s.max_value = s.offset + raw_max * s.scale;

        const double x = s.min_value + (s.max_value - s.min_value) * unit(rng);
        CanFrame f;
        f.dlc = 8;
        place_signal(s, pack_signal(s, x), f.data);
        const double back = unpack_signal(s, f);
        REQUIRE(std::abs(back - x) <= s.scale / 2.0 + 1e-12);

        // Exactly representable values come back exactly.
        const std::uint64_t raw = pack_signal(s, x);
        const double snapped = raw_to_physical(s, raw);
        place_signal(s, pack_signal(s, snapped), f.data);
        REQUIRE(unpack_signal(s, f) == snapped);
    }
}

TEST_CASE("encode/decode of the inverter status message round-trips") {
    const auto db = test_util::default_db();
    std::map<std::string, double> values{{"speed_rpm", 12000.0},
                                         {"torque_nm", 9.8},
                                         {"motor_temp_c", 40.0},
                                         {"igbt_temp_c", 40.0}};
    const CanFrame f = encode_message(db, "inv_status_fl", values);
    const auto decoded = decode_frame(db, f);
    REQUIRE(decoded.has_value());
    REQUIRE(decoded->name == "inv_status_fl");
    for (const auto& [name, v] : values) {
        const SignalDef* s = db.by_name("inv_status_fl")->find_signal(name);
        REQUIRE(s != nullptr);
        CHECK(decoded->values.at(name) == Approx(v).margin(s->scale / 2.0 + 1e-12));
    }
}

TEST_CASE("decode of an id absent from the db yields the unmapped marker") {
    const auto db = test_util::default_db();
    CanFrame f;
    f.id = 0x7FF;
    f.dlc = 2;
    CHECK_FALSE(decode_frame(db, f).has_value());
}

TEST_CASE("encode with a missing signal names it") {
    const auto db = test_util::default_db();
    std::map<std::string, double> values{{"speed_rpm", 100.0}};
    REQUIRE_THROWS_WITH(encode_message(db, "inv_status_fl", values),
                        Catch::Matchers::ContainsSubstring("torque_nm"));
}

TEST_CASE("encode leaves unset bits zero") {
    const auto db = test_util::default_db();
    std::map<std::string, double> values{{"state", 4.0},    {"v_link", 0.0},
                                         {"tsal_red", 0.0}, {"air_minus", 0.0},
                                         {"air_plus", 0.0}, {"precharge", 0.0},
                                         {"hvd_present", 0.0}, {"loop_closed", 0.0}};
    const CanFrame f = encode_message(db, "safety_status", values);
    CHECK(f.data[0] == 4);
    for (int i = 1; i < 8; ++i) CHECK(f.data[static_cast<std::size_t>(i)] == 0);
}

TEST_CASE("shipped db parses and serialization is a fixpoint") {
    const std::string text = test_util::read_file(test_util::source_path("data/default.msgdb"));
    const auto db = load_message_db(text);
    const std::string once = serialize_message_db(db);
    const std::string twice = serialize_message_db(load_message_db(once));
    REQUIRE(once == twice);
    REQUIRE_FALSE(once.empty());
}

TEST_CASE("encode/decode round-trips on every message of the shipped db") {
    const auto db = test_util::default_db();
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& m : db.messages()) {
        std::map<std::string, double> values;
        for (const auto& s : m.signals)
            values[s.name] = s.min_value + (s.max_value - s.min_value) * unit(rng);
        const CanFrame f = encode_message(db, m.name, values);
        const auto decoded = decode_frame(db, f);
        REQUIRE(decoded.has_value());
        for (const auto& s : m.signals)
            REQUIRE(std::abs(decoded->values.at(s.name) - values.at(s.name)) <=
                    s.scale / 2.0 + 1e-12);
    }
}
