#pragma once

// Input transfer functions. Each technique reduces its raw samples to a paddle
// angular velocity (and, for the encoder, an absolute angle); sim-core never
// sees which technique produced a PaddleState.

#include <cstdint>
#include <optional>
#include <string_view>

#include "dragonboat/sim.hpp"

namespace dragonboat {

enum class Technique { jc, ic, ec };

std::string_view to_string(Technique t);
/// Accepts "jc", "ic", "ec" (case-insensitive). Throws std::invalid_argument otherwise.
Technique parse_technique(std::string_view s);

struct JoystickSample {
    double y = 0.0;  // [-1, 1], up positive
};

struct RotationSample {
    double pitch_rate_deg_s = 0.0;
    double t = 0.0;
};

struct EncoderSample {
    Side side = Side::left;
    std::uint16_t angle_centideg = 0;     // [0, 35999]
    std::int16_t omega_decideg_s = 0;

    bool operator==(const EncoderSample&) const = default;
};

struct ResistanceCommand {
    static constexpr std::uint8_t off = 0;
    static constexpr std::uint8_t on = 255;

    Side side = Side::left;
    std::uint8_t level = off;

    bool operator==(const ResistanceCommand&) const = default;
};

struct TechniqueParams {
    double joystick_omega_max = 360.0;  // deg/s at full stick
    double joystick_deadzone = 0.1;
    double rotation_gain = 1.0;
    double rotation_cap = 540.0;        // deg/s
};

double joystick_to_omega(JoystickSample s, double omega_max, double deadzone);

double rotation_to_omega(RotationSample s, double gain, double omega_cap);

/// 1:1 encoder mapping. Returns nullopt for an out-of-range angle, which
/// indicates a corrupt report upstream.
std::optional<PaddleState> encoder_to_paddle(const EncoderSample& s);

/// The relay is on exactly while the blade is in the water, whatever its speed.
ResistanceCommand resistance_for(const PaddleState& p, const WaterZone& zone);

}  // namespace dragonboat
