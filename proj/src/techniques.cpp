#include "dragonboat/techniques.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace dragonboat {

std::string_view to_string(Technique t) {
    switch (t) {
        case Technique::jc: return "jc";
        case Technique::ic: return "ic";
        case Technique::ec: return "ec";
    }
    return "?";
}

Technique parse_technique(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "jc") return Technique::jc;
    if (lower == "ic") return Technique::ic;
    if (lower == "ec") return Technique::ec;
    throw std::invalid_argument("unknown technique '" + std::string(s) + "' (expected jc, ic or ec)");
}

double joystick_to_omega(JoystickSample s, double omega_max, double deadzone) {
    if (!(deadzone >= 0.0 && deadzone < 1.0))
        throw std::invalid_argument("joystick deadzone must be in [0, 1)");
    const double y = std::clamp(s.y, -1.0, 1.0);
    const double mag = std::abs(y);
    if (mag <= deadzone) return 0.0;
    const double scaled = omega_max * (mag - deadzone) / (1.0 - deadzone);
    return y > 0.0 ? scaled : -scaled;
}

double rotation_to_omega(RotationSample s, double gain, double omega_cap) {
    if (!(gain > 0.0)) throw std::invalid_argument("rotation gain must be positive");
    return std::clamp(gain * s.pitch_rate_deg_s, -omega_cap, omega_cap);
}

std::optional<PaddleState> encoder_to_paddle(const EncoderSample& s) {
    if (s.angle_centideg > 35999) return std::nullopt;
    PaddleState p;
    p.side = s.side;
    p.angle_deg = s.angle_centideg / 100.0;
    p.omega_deg_s = s.omega_decideg_s / 10.0;
    return p;
}

ResistanceCommand resistance_for(const PaddleState& p, const WaterZone& zone) {
    return {p.side, in_water(p.angle_deg, zone) ? ResistanceCommand::on : ResistanceCommand::off};
}

}  // namespace dragonboat
