#include "dragonboat/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dragonboat::protocol {

std::optional<std::size_t> payload_size(std::uint8_t type) {
    switch (type) {
        case 0x01: return 5;
        case 0x02: return 2;
        case 0x03: return 0;
        default: return std::nullopt;
    }
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int b = 0; b < 8; ++b)
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

DeviceFrame make_encoder_report(std::uint8_t seq, const EncoderSample& s) {
    const auto angle = s.angle_centideg;
    const auto omega = static_cast<std::uint16_t>(s.omega_decideg_s);
    return {FrameType::encoder_report, seq,
            {static_cast<std::uint8_t>(s.side), static_cast<std::uint8_t>(angle & 0xFF),
             static_cast<std::uint8_t>(angle >> 8), static_cast<std::uint8_t>(omega & 0xFF),
             static_cast<std::uint8_t>(omega >> 8)}};
}

DeviceFrame make_resistance_cmd(std::uint8_t seq, const ResistanceCommand& c) {
    return {FrameType::resistance_cmd, seq, {static_cast<std::uint8_t>(c.side), c.level}};
}

DeviceFrame make_heartbeat(std::uint8_t seq) { return {FrameType::heartbeat, seq, {}}; }

namespace {

std::optional<Side> side_from_byte(std::uint8_t b) {
    if (b == 0) return Side::left;
    if (b == 1) return Side::right;
    return std::nullopt;
}

}  // namespace

std::optional<EncoderSample> as_encoder_report(const DeviceFrame& f) {
    if (f.type != FrameType::encoder_report || f.payload.size() != 5) return std::nullopt;
    const auto side = side_from_byte(f.payload[0]);
    if (!side) return std::nullopt;
    EncoderSample s;
    s.side = *side;
    s.angle_centideg = static_cast<std::uint16_t>(f.payload[1] | (f.payload[2] << 8));
    s.omega_decideg_s = static_cast<std::int16_t>(
        static_cast<std::uint16_t>(f.payload[3] | (f.payload[4] << 8)));
    return s;
}

std::optional<ResistanceCommand> as_resistance_cmd(const DeviceFrame& f) {
    if (f.type != FrameType::resistance_cmd || f.payload.size() != 2) return std::nullopt;
    const auto side = side_from_byte(f.payload[0]);
    if (!side) return std::nullopt;
    const std::uint8_t level = f.payload[1];
    if (level != ResistanceCommand::off && level != ResistanceCommand::on) return std::nullopt;
    return ResistanceCommand{*side, level};
}

std::vector<std::uint8_t> encode_frame(const DeviceFrame& f) {
    const auto type = static_cast<std::uint8_t>(f.type);
    const auto expected = payload_size(type);
    if (!expected) throw std::invalid_argument("unknown frame type");
    if (f.payload.size() != *expected) throw std::invalid_argument("payload length does not match frame type");

    std::vector<std::uint8_t> out;
    out.reserve(header_size + f.payload.size() + crc_size);
    out.push_back(magic0);
    out.push_back(magic1);
    out.push_back(type);
    out.push_back(f.seq);
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    const std::uint16_t crc = crc16_ccitt_false(std::span(out).subspan(2));
    out.push_back(static_cast<std::uint8_t>(crc >> 8));
    out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    return out;
}

Diagnostics& Diagnostics::operator+=(const Diagnostics& o) {
    skipped_bytes += o.skipped_bytes;
    crc_mismatches += o.crc_mismatches;
    unknown_types += o.unknown_types;
    truncated += o.truncated;
    seq_gaps += o.seq_gaps;
    return *this;
}

namespace {

DecodeResult decode_impl(std::span<const std::uint8_t> buf,
                         std::array<std::optional<std::uint8_t>, 4>& last_seq) {
    DecodeResult r;
    const std::size_t n = buf.size();
    std::size_t i = 0;
    while (i < n) {
        if (buf[i] != magic0) {
            ++i;
            ++r.diagnostics.skipped_bytes;
            continue;
        }
        if (i + 1 == n) {
            ++r.diagnostics.truncated;
            break;
        }
        if (buf[i + 1] != magic1) {
            ++i;
            ++r.diagnostics.skipped_bytes;
            continue;
        }
        if (i + 3 > n) {
            ++r.diagnostics.truncated;
            break;
        }
        const std::uint8_t type = buf[i + 2];
        const auto len = payload_size(type);
        if (!len) {
            ++r.diagnostics.unknown_types;
            r.diagnostics.skipped_bytes += 2;
            i += 2;
            continue;
        }
        const std::size_t total = header_size + *len + crc_size;
        if (i + total > n) {
            ++r.diagnostics.truncated;
            break;
        }
        const auto body = buf.subspan(i + 2, 2 + *len);
        const std::uint16_t want = static_cast<std::uint16_t>((buf[i + total - 2] << 8) | buf[i + total - 1]);
        if (crc16_ccitt_false(body) != want) {
            ++r.diagnostics.crc_mismatches;
            r.diagnostics.skipped_bytes += 2;
            i += 2;
            continue;
        }
        DeviceFrame f;
        f.type = static_cast<FrameType>(type);
        f.seq = buf[i + 3];
        f.payload.assign(buf.begin() + static_cast<std::ptrdiff_t>(i + header_size),
                         buf.begin() + static_cast<std::ptrdiff_t>(i + header_size + *len));
        auto& last = last_seq[type];
        if (last && static_cast<std::uint8_t>(*last + 1) != f.seq) ++r.diagnostics.seq_gaps;
        last = f.seq;
        r.frames.push_back(std::move(f));
        i += total;
    }
    r.consumed = i;
    return r;
}

}  // namespace

DecodeResult decode_stream(std::span<const std::uint8_t> buffer) {
    std::array<std::optional<std::uint8_t>, 4> last_seq{};
    return decode_impl(buffer, last_seq);
}

std::vector<DeviceFrame> StreamParser::feed(std::span<const std::uint8_t> bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    DecodeResult r = decode_impl(buffer_, last_seq_);
    diag_ += r.diagnostics;
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
    return std::move(r.frames);
}

void HandleScript::append(double t, double left, double right) {
    if (!points_.empty() && t < points_.back().t)
        throw std::invalid_argument("handle script points must be time-ordered");
    points_.push_back({t, left, right});
}

std::array<double, 2> HandleScript::rate_at(double t) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double tt, const Point& p) { return tt < p.t; });
    if (it == points_.begin()) return {0.0, 0.0};
    --it;
    return {it->left, it->right};
}

SimulatedDevice::SimulatedDevice(HandleScript script, DeviceParams params)
    : script_(std::move(script)), params_(params) {
    if (!(params_.report_rate_hz > 0.0) || !(params_.friction_gain >= 0.0 && params_.friction_gain < 1.0))
        throw std::invalid_argument("invalid simulated device parameters");
}

void SimulatedDevice::receive(std::span<const std::uint8_t> bytes) {
    inbox_.insert(inbox_.end(), bytes.begin(), bytes.end());
}

std::vector<EncoderSample> SimulatedDevice::advance(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("device tick must be positive");

    if (!inbox_.empty()) {
        for (const DeviceFrame& f : parser_.feed(inbox_))
            if (auto cmd = as_resistance_cmd(f))
                resistance_[static_cast<std::size_t>(cmd->side)] = cmd->level == ResistanceCommand::on;
        inbox_.clear();
    }

    const auto rates = script_.rate_at(time_);
    std::vector<EncoderSample> out;
    out.reserve(2);
    for (std::size_t s = 0; s < 2; ++s) {
        const double omega = rates[s] * (resistance_[s] ? 1.0 - params_.friction_gain : 1.0);
        angle_[s] = wrap_degrees(angle_[s] + omega * dt);

        EncoderSample e;
        e.side = static_cast<Side>(s);
        e.angle_centideg = static_cast<std::uint16_t>(std::lround(angle_[s] * 100.0) % 36000);
        e.omega_decideg_s = static_cast<std::int16_t>(std::clamp(std::lround(omega * 10.0), -32768L, 32767L));
        out.push_back(e);
    }
    ++ticks_;
    time_ += dt;
    return out;
}

std::vector<std::uint8_t> SimulatedDevice::tick() {
    const auto samples = advance(1.0 / params_.report_rate_hz);
    time_ = static_cast<double>(ticks_) / params_.report_rate_hz;
    std::vector<std::uint8_t> bytes;
    for (const EncoderSample& s : samples) {
        const auto frame = encode_frame(make_encoder_report(seq_.next(FrameType::encoder_report), s));
        bytes.insert(bytes.end(), frame.begin(), frame.end());
    }
    return bytes;
}

}  // namespace dragonboat::protocol
