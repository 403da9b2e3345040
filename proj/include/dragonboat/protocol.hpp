#pragma once

// Framed wire protocol between the host and the exertion-controller MCU.
//
//   AA 55 | type | seq | payload | crc16 (big-endian)
//
// The CRC is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no
// xorout) computed over type, seq and payload. Payload integers are
// little-endian:
//
//   0x01 encoder report   side u8 | angle u16 centi-deg | omega i16 deci-deg/s
//   0x02 resistance cmd   side u8 | level u8 (0 or 255)
//   0x03 heartbeat        (empty)

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dragonboat/techniques.hpp"

namespace dragonboat::protocol {

inline constexpr std::uint8_t magic0 = 0xAA;
inline constexpr std::uint8_t magic1 = 0x55;
inline constexpr std::size_t header_size = 4;  // magic, type, seq
inline constexpr std::size_t crc_size = 2;

enum class FrameType : std::uint8_t {
    encoder_report = 0x01,
    resistance_cmd = 0x02,
    heartbeat = 0x03,
};

/// Fixed payload length for a type byte, or nullopt if the type is unknown.
std::optional<std::size_t> payload_size(std::uint8_t type);

struct DeviceFrame {
    FrameType type = FrameType::heartbeat;
    std::uint8_t seq = 0;
    std::vector<std::uint8_t> payload;

    bool operator==(const DeviceFrame&) const = default;
};

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

DeviceFrame make_encoder_report(std::uint8_t seq, const EncoderSample& s);
DeviceFrame make_resistance_cmd(std::uint8_t seq, const ResistanceCommand& c);
DeviceFrame make_heartbeat(std::uint8_t seq);

std::optional<EncoderSample> as_encoder_report(const DeviceFrame& f);
std::optional<ResistanceCommand> as_resistance_cmd(const DeviceFrame& f);

/// Throws std::invalid_argument when the payload length does not match the type.
std::vector<std::uint8_t> encode_frame(const DeviceFrame& f);

struct Diagnostics {
    std::size_t skipped_bytes = 0;
    std::size_t crc_mismatches = 0;
    std::size_t unknown_types = 0;
    std::size_t truncated = 0;   // calls that ended on a partial frame
    std::size_t seq_gaps = 0;    // non-consecutive seq within one frame type

    Diagnostics& operator+=(const Diagnostics& o);
};

struct DecodeResult {
    std::vector<DeviceFrame> frames;
    std::size_t consumed = 0;
    Diagnostics diagnostics;
};

/// Parses as many whole frames as `buffer` holds. Corrupt bytes are skipped
/// until the next magic; a partial trailing frame is never consumed. Sequence
/// gaps are only detected within this one buffer; use StreamParser for
/// continuity across calls.
DecodeResult decode_stream(std::span<const std::uint8_t> buffer);

/// Stateful incremental parser for one byte stream. Not thread-safe.
class StreamParser {
public:
    std::vector<DeviceFrame> feed(std::span<const std::uint8_t> bytes);

    const Diagnostics& diagnostics() const { return diag_; }
    std::size_t pending() const { return buffer_.size(); }

private:
    std::vector<std::uint8_t> buffer_;
    Diagnostics diag_;
    std::array<std::optional<std::uint8_t>, 4> last_seq_{};
};

/// Per-type rolling sequence counters for an emitter.
class SequenceCounter {
public:
    std::uint8_t next(FrameType t) { return counters_[static_cast<std::size_t>(t)]++; }

private:
    std::array<std::uint8_t, 4> counters_{};
};

/// Piecewise-constant handle angular velocity per side (deg/s), holding each
/// point's value from its time until the next point.
class HandleScript {
public:
    struct Point {
        double t = 0.0;
        double left = 0.0;
        double right = 0.0;
    };

    /// Points must be appended in non-decreasing time order.
    void append(double t, double left, double right);
    std::array<double, 2> rate_at(double t) const;
    const std::vector<Point>& points() const { return points_; }

private:
    std::vector<Point> points_;
};

struct DeviceParams {
    double report_rate_hz = 100.0;
    double friction_gain = 0.25;  // fraction of handle speed lost while resistance is on
};

/// Stand-in for the encoder/relay MCU. A scripted user cranks the handles; the
/// relay brake retards them while the host holds resistance on for that side.
class SimulatedDevice {
public:
    explicit SimulatedDevice(HandleScript script = {}, DeviceParams params = {});

    HandleScript& script() { return script_; }
    const DeviceParams& params() const { return params_; }

    /// Queues host bytes; commands take effect at the start of the next tick.
    void receive(std::span<const std::uint8_t> bytes);

    /// Advances one tick of `dt` seconds and returns one report per side.
    std::vector<EncoderSample> advance(double dt);

    /// Advances one tick at the report rate and returns the encoded reports.
    std::vector<std::uint8_t> tick();

    double time() const { return time_; }
    std::uint64_t ticks() const { return ticks_; }
    bool resistance(Side s) const { return resistance_[static_cast<std::size_t>(s)]; }
    double angle(Side s) const { return angle_[static_cast<std::size_t>(s)]; }
    const Diagnostics& rx_diagnostics() const { return parser_.diagnostics(); }

private:
    HandleScript script_;
    DeviceParams params_;
    StreamParser parser_;
    std::vector<std::uint8_t> inbox_;
    SequenceCounter seq_;
    std::array<double, 2> angle_{0.0, 0.0};
    std::array<bool, 2> resistance_{false, false};
    double time_ = 0.0;
    std::uint64_t ticks_ = 0;
};

}  // namespace dragonboat::protocol
