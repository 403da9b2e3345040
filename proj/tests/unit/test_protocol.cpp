#include <doctest.h>

#include <random>
#include <stdexcept>

#include "dragonboat/protocol.hpp"

using namespace dragonboat;
using namespace dragonboat::protocol;
using Bytes = std::vector<std::uint8_t>;

namespace {

// Bitwise CRC-16/CCITT-FALSE, written independently of the table-free
// implementation under test.
std::uint16_t reference_crc(const Bytes& data) {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t byte : data) {
        for (int bit = 7; bit >= 0; --bit) {
            const bool in = (byte >> bit) & 1;
            const bool top = crc & 0x8000;
            crc = static_cast<std::uint16_t>(crc << 1);
            if (in != top) crc ^= 0x1021;
        }
    }
    return crc;
}

DeviceFrame random_frame(std::mt19937_64& g) {
    const std::uint8_t seq = static_cast<std::uint8_t>(g());
    switch (g() % 3) {
        case 0: {
            EncoderSample s;
            s.side = g() % 2 ? Side::left : Side::right;
            s.angle_centideg = static_cast<std::uint16_t>(g() % 36000);
            s.omega_decideg_s = static_cast<std::int16_t>(static_cast<std::uint16_t>(g()));
            return make_encoder_report(seq, s);
        }
        case 1:
            return make_resistance_cmd(seq, {g() % 2 ? Side::left : Side::right,
                                             g() % 2 ? ResistanceCommand::on : ResistanceCommand::off});
        default:
            return make_heartbeat(seq);
    }
}

}  // namespace

TEST_CASE("crc matches the catalogue check value") {
    const Bytes check = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
    CHECK(crc16_ccitt_false(check) == 0x29B1);
    CHECK(reference_crc(check) == 0x29B1);
}

TEST_CASE("frozen frame encodings") {
    CHECK(encode_frame(make_heartbeat(0)) == Bytes{0xAA, 0x55, 0x03, 0x00, 0x48, 0x5C});
    CHECK(encode_frame(make_encoder_report(1, {Side::left, 33700, 0})) ==
          Bytes{0xAA, 0x55, 0x01, 0x01, 0x00, 0xA4, 0x83, 0x00, 0x00, 0x4E, 0x82});
}

TEST_CASE("encode rejects a mismatched payload") {
    DeviceFrame f = make_heartbeat(0);
    f.payload = {1};
    CHECK_THROWS_AS(encode_frame(f), std::invalid_argument);
}

TEST_CASE("payload typing") {
    CHECK(payload_size(0x01) == 5u);
    CHECK(payload_size(0x02) == 2u);
    CHECK(payload_size(0x03) == 0u);
    CHECK_FALSE(payload_size(0x04));
    CHECK_FALSE(as_encoder_report(make_heartbeat(0)));
    const auto cmd = as_resistance_cmd(make_resistance_cmd(5, {Side::right, ResistanceCommand::on}));
    REQUIRE(cmd);
    CHECK(cmd->side == Side::right);
    CHECK(cmd->level == 255);
}

TEST_CASE("decode examples") {
    SUBCASE("garbage then a heartbeat") {
        Bytes buf = {0x01, 0xAA, 0x02, 0x55, 0xFF, 0x00, 0xAA};
        const auto hb = encode_frame(make_heartbeat(0));
        buf.insert(buf.end(), hb.begin(), hb.end());
        const auto r = decode_stream(buf);
        REQUIRE(r.frames.size() == 1);
        CHECK(r.frames[0] == make_heartbeat(0));
        CHECK(r.diagnostics.skipped_bytes == 7);
        CHECK(r.consumed == buf.size());
    }
    SUBCASE("flipped crc byte") {
        auto buf = encode_frame(make_encoder_report(3, {Side::right, 100, 5}));
        buf.back() ^= 0x01;
        const auto r = decode_stream(buf);
        CHECK(r.frames.empty());
        CHECK(r.diagnostics.crc_mismatches == 1);
    }
    SUBCASE("frames split across calls") {
        auto a = encode_frame(make_encoder_report(0, {Side::left, 1000, 10}));
        const auto b = encode_frame(make_resistance_cmd(0, {Side::left, ResistanceCommand::on}));
        a.insert(a.end(), b.begin(), b.end());
        StreamParser p;
        const std::size_t cut = 8;
        auto first = p.feed(std::span(a).first(cut));
        CHECK(first.empty());
        CHECK(p.pending() == cut);
        auto second = p.feed(std::span(a).subspan(cut));
        REQUIRE(second.size() == 2);
        CHECK(as_encoder_report(second[0])->angle_centideg == 1000);
        CHECK(as_resistance_cmd(second[1])->level == 255);
        CHECK(p.diagnostics().truncated == 1);
    }
    SUBCASE("partial frame is never consumed") {
        const auto f = encode_frame(make_encoder_report(0, {Side::left, 1000, 10}));
        const auto r = decode_stream(std::span(f).first(f.size() - 1));
        CHECK(r.frames.empty());
        CHECK(r.consumed == 0);
        CHECK(r.diagnostics.truncated == 1);
    }
    SUBCASE("unknown type resyncs") {
        Bytes buf = {0xAA, 0x55, 0x07, 0x00, 0x00};
        const auto hb = encode_frame(make_heartbeat(9));
        buf.insert(buf.end(), hb.begin(), hb.end());
        const auto r = decode_stream(buf);
        REQUIRE(r.frames.size() == 1);
        CHECK(r.diagnostics.unknown_types == 1);
    }
}

TEST_CASE("sequence gaps are reported per type") {
    Bytes buf;
    for (std::uint8_t s : {0, 1, 2, 4}) {
        const auto f = encode_frame(make_heartbeat(s));
        buf.insert(buf.end(), f.begin(), f.end());
    }
    for (std::uint8_t s : {10, 11}) {
        const auto f = encode_frame(make_resistance_cmd(s, {Side::left, 0}));
        buf.insert(buf.end(), f.begin(), f.end());
    }
    StreamParser p;
    CHECK(p.feed(buf).size() == 6);
    CHECK(p.diagnostics().seq_gaps == 1);
    const auto wrap = encode_frame(make_heartbeat(5));
    p.feed(wrap);
    CHECK(p.diagnostics().seq_gaps == 1);

    SequenceCounter c;
    for (int i = 0; i < 256; ++i) c.next(FrameType::heartbeat);
    CHECK(c.next(FrameType::heartbeat) == 0);
    CHECK(c.next(FrameType::encoder_report) == 0);
}

TEST_CASE("property: random frames round-trip") {
    std::mt19937_64 g(2024);
    for (int i = 0; i < 10000; ++i) {
        const DeviceFrame f = random_frame(g);
        const auto bytes = encode_frame(f);
        Bytes body(bytes.begin() + 2, bytes.end() - 2);
        REQUIRE(crc16_ccitt_false(body) == reference_crc(body));
        const auto r = decode_stream(bytes);
        REQUIRE(r.frames.size() == 1);
        REQUIRE(r.frames[0] == f);
        REQUIRE(r.consumed == bytes.size());
    }
}

TEST_CASE("property: arbitrary bytes never over-consume") {
    std::mt19937_64 g(77);
    for (int i = 0; i < 20000; ++i) {
        Bytes buf(g() % 64);
        for (auto& b : buf) b = static_cast<std::uint8_t>(g() % 4 == 0 ? (g() % 2 ? 0xAA : 0x55) : g());
        const auto r = decode_stream(buf);
        REQUIRE(r.consumed <= buf.size());
        for (const auto& f : r.frames) REQUIRE(f.payload.size() == *payload_size(static_cast<std::uint8_t>(f.type)));
    }
}

TEST_CASE("property: valid frames survive interleaved noise") {
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 500; ++trial) {
        Bytes buf;
        std::vector<DeviceFrame> sent;
        for (int k = 0; k < 8; ++k) {
            for (std::size_t n = g() % 5; n > 0; --n) buf.push_back(static_cast<std::uint8_t>(g() % 0xAA));
            sent.push_back(random_frame(g));
            const auto f = encode_frame(sent.back());
            buf.insert(buf.end(), f.begin(), f.end());
        }
        StreamParser p;
        std::vector<DeviceFrame> got;
        std::size_t pos = 0;
        while (pos < buf.size()) {
            const std::size_t n = std::min<std::size_t>(1 + g() % 9, buf.size() - pos);
            for (auto& f : p.feed(std::span(buf).subspan(pos, n))) got.push_back(f);
            pos += n;
        }
        REQUIRE(got == sent);
    }
}

TEST_CASE("handle script holds values piecewise") {
    HandleScript s;
    s.append(0.0, 100.0, 50.0);
    s.append(2.0, 0.0, 10.0);
    CHECK(s.rate_at(-1.0) == std::array<double, 2>{0.0, 0.0});
    CHECK(s.rate_at(1.99) == std::array<double, 2>{100.0, 50.0});
    CHECK(s.rate_at(2.0) == std::array<double, 2>{0.0, 10.0});
    CHECK_THROWS_AS(s.append(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("simulated device kinematics") {
    HandleScript script;
    script.append(0.0, 360.0, 360.0);
    SUBCASE("free handle") {
        SimulatedDevice d(script);
        const auto out = d.advance(0.5);
        CHECK(out[0].angle_centideg == 18000);
        CHECK(d.angle(Side::left) == doctest::Approx(180.0));
    }
    SUBCASE("braked handle") {
        SimulatedDevice d(script, {100.0, 0.25});
        d.receive(encode_frame(make_resistance_cmd(0, {Side::left, ResistanceCommand::on})));
        const auto out = d.advance(0.5);
        CHECK(d.angle(Side::left) == doctest::Approx(135.0));
        CHECK(d.angle(Side::right) == doctest::Approx(180.0));
        CHECK(out[0].omega_decideg_s == 2700);
    }
    SUBCASE("command applies from the next tick") {
        SimulatedDevice d(script);
        d.advance(0.01);
        d.receive(encode_frame(make_resistance_cmd(0, {Side::right, ResistanceCommand::on})));
        CHECK_FALSE(d.resistance(Side::right));
        d.advance(0.01);
        CHECK(d.resistance(Side::right));
        CHECK(d.angle(Side::right) == doctest::Approx(3.6 + 2.7));
        CHECK(d.angle(Side::left) == doctest::Approx(7.2));
    }
    CHECK_THROWS_AS(SimulatedDevice(script, {100.0, 1.0}), std::invalid_argument);
}

TEST_CASE("property: simulated device is deterministic") {
    auto run = [] {
        HandleScript script;
        script.append(0.0, 250.0, 180.0);
        script.append(1.3, -40.0, 300.0);
        SimulatedDevice d(script);
        Bytes all;
        for (int i = 0; i < 500; ++i) {
            if (i % 37 == 0) d.receive(encode_frame(make_resistance_cmd(static_cast<std::uint8_t>(i / 37),
                                                                        {Side::left, static_cast<std::uint8_t>(i % 2 ? 255 : 0)})));
            const auto b = d.tick();
            all.insert(all.end(), b.begin(), b.end());
        }
        return all;
    };
    CHECK(run() == run());
}
