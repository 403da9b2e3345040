#pragma once

// Scoring for the post-session questionnaires.

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace dragonboat::stats {

enum class Instrument { ueq_s, nasa_tlx, ssq };

std::string_view to_string(Instrument i);
Instrument parse_instrument(std::string_view s);

/// Item count and inclusive rating range for an instrument.
struct ItemSpec {
    std::size_t count;
    int lo;
    int hi;
};

ItemSpec item_spec(Instrument i);

/// Throws std::invalid_argument on a wrong item count or out-of-range rating.
void validate_items(Instrument i, std::span<const int> items);

struct UeqScores {
    double pragmatic = 0.0;
    double hedonic = 0.0;
    double overall = 0.0;
};

/// Items recentred to -3..+3; pragmatic = items 1-4, hedonic = items 5-8.
UeqScores score_ueq_s(std::span<const int> items);

inline constexpr std::array<std::string_view, 6> tlx_dimensions = {
    "Mental Demand", "Physical Demand", "Temporal Demand", "Performance", "Effort", "Frustration"};

/// Raw (unweighted) per-dimension ratings.
std::array<double, 6> score_nasa_tlx(std::span<const int> items);

struct SsqScores {
    double nausea = 0.0;
    double oculomotor = 0.0;
    double disorientation = 0.0;
    double total = 0.0;
};

/// Weighted SSQ subscales (Kennedy et al., 1993).
SsqScores score_ssq(std::span<const int> items);

struct SsqMembership {
    bool nausea;
    bool oculomotor;
    bool disorientation;
};

/// Subscale membership for the 16 SSQ symptoms, in questionnaire order.
const std::array<SsqMembership, 16>& ssq_membership();

inline constexpr double ssq_nausea_weight = 9.54;
inline constexpr double ssq_oculomotor_weight = 7.58;
inline constexpr double ssq_disorientation_weight = 13.92;
inline constexpr double ssq_total_weight = 3.74;

}  // namespace dragonboat::stats
