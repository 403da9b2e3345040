#include "dragonboat/questionnaire.hpp"

#include <stdexcept>
#include <string>

namespace dragonboat::stats {

std::string_view to_string(Instrument i) {
    switch (i) {
        case Instrument::ueq_s: return "ueq_s";
        case Instrument::nasa_tlx: return "nasa_tlx";
        case Instrument::ssq: return "ssq";
    }
    return "?";
}

Instrument parse_instrument(std::string_view s) {
    if (s == "ueq_s" || s == "ueq-s" || s == "ueq") return Instrument::ueq_s;
    if (s == "nasa_tlx" || s == "nasa-tlx" || s == "tlx") return Instrument::nasa_tlx;
    if (s == "ssq") return Instrument::ssq;
    throw std::invalid_argument("unknown instrument '" + std::string(s) + "' (expected ueq_s, nasa_tlx or ssq)");
}

ItemSpec item_spec(Instrument i) {
    switch (i) {
        case Instrument::ueq_s: return {8, 1, 7};
        case Instrument::nasa_tlx: return {6, 1, 7};
        case Instrument::ssq: return {16, 0, 3};
    }
    throw std::invalid_argument("unknown instrument");
}

void validate_items(Instrument i, std::span<const int> items) {
    const ItemSpec spec = item_spec(i);
    if (items.size() != spec.count)
        throw std::invalid_argument(std::string(to_string(i)) + " expects " + std::to_string(spec.count) +
                                    " items, got " + std::to_string(items.size()));
    for (std::size_t k = 0; k < items.size(); ++k)
        if (items[k] < spec.lo || items[k] > spec.hi)
            throw std::invalid_argument(std::string(to_string(i)) + " item " + std::to_string(k + 1) +
                                        " out of range: " + std::to_string(items[k]));
}

UeqScores score_ueq_s(std::span<const int> items) {
    validate_items(Instrument::ueq_s, items);
    UeqScores s;
    for (std::size_t k = 0; k < 4; ++k) s.pragmatic += items[k] - 4;
    for (std::size_t k = 4; k < 8; ++k) s.hedonic += items[k] - 4;
    s.overall = (s.pragmatic + s.hedonic) / 8.0;
    s.pragmatic /= 4.0;
    s.hedonic /= 4.0;
    return s;
}

std::array<double, 6> score_nasa_tlx(std::span<const int> items) {
    validate_items(Instrument::nasa_tlx, items);
    std::array<double, 6> out{};
    for (std::size_t k = 0; k < 6; ++k) out[k] = items[k];
    return out;
}

const std::array<SsqMembership, 16>& ssq_membership() {
    static const std::array<SsqMembership, 16> table = {{
        {true, true, false},    // general discomfort
        {false, true, false},   // fatigue
        {false, true, false},   // headache
        {false, true, false},   // eyestrain
        {false, true, true},    // difficulty focusing
        {true, false, false},   // increased salivation
        {true, false, false},   // sweating
        {true, false, true},    // nausea
        {true, true, false},    // difficulty concentrating
        {false, false, true},   // fullness of head
        {false, true, true},    // blurred vision
        {false, false, true},   // dizzy (eyes open)
        {false, false, true},   // dizzy (eyes closed)
        {false, false, true},   // vertigo
        {true, false, false},   // stomach awareness
        {true, false, false},   // burping
    }};
    return table;
}

SsqScores score_ssq(std::span<const int> items) {
    validate_items(Instrument::ssq, items);
    double n = 0.0, o = 0.0, d = 0.0;
    const auto& table = ssq_membership();
    for (std::size_t k = 0; k < 16; ++k) {
        if (table[k].nausea) n += items[k];
        if (table[k].oculomotor) o += items[k];
        if (table[k].disorientation) d += items[k];
    }
    return {n * ssq_nausea_weight, o * ssq_oculomotor_weight, d * ssq_disorientation_weight,
            (n + o + d) * ssq_total_weight};
}

}  // namespace dragonboat::stats
