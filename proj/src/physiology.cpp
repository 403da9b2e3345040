#include "dragonboat/physiology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dragonboat/rng.hpp"

namespace dragonboat::physiology {

std::string_view to_string(Sex s) {
    switch (s) {
        case Sex::male: return "male";
        case Sex::female: return "female";
        case Sex::unspecified: return "unspecified";
    }
    return "?";
}

Sex parse_sex(std::string_view s) {
    if (s == "male" || s == "m" || s == "M") return Sex::male;
    if (s == "female" || s == "f" || s == "F") return Sex::female;
    if (s.empty() || s == "unspecified") return Sex::unspecified;
    throw std::invalid_argument("unknown sex '" + std::string(s) + "'");
}

void validate_series(std::span<const HeartSample> samples) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const HeartSample& s = samples[i];
        if (!(s.bpm > 20.0 && s.bpm < 250.0) || !std::isfinite(s.t))
            throw std::invalid_argument("heart rate sample out of range at index " + std::to_string(i));
        if (i > 0 && !(s.t > samples[i - 1].t))
            throw std::invalid_argument("heart rate timestamps must be strictly increasing");
    }
}

double hr_max(double age) {
    if (!(age > 0.0)) throw std::invalid_argument("age must be positive");
    return 211.0 - 0.64 * age;
}

double time_weighted_mean(std::span<const HeartSample> samples) {
    if (samples.empty()) throw std::invalid_argument("empty heart rate series");
    validate_series(samples);
    if (samples.size() == 1) return samples[0].bpm;
    double area = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        area += 0.5 * (samples[i].bpm + samples[i - 1].bpm) * (samples[i].t - samples[i - 1].t);
    return area / (samples.back().t - samples.front().t);
}

double avg_hr_pct(std::span<const HeartSample> samples, double age) {
    return std::clamp(time_weighted_mean(samples) / hr_max(age), 0.0, 1.0);
}

double KeytelModel::kcal_per_min(double bpm, double weight_kg, double age, Sex sex) const {
    const double male = -55.0969 + 0.6309 * bpm + 0.1988 * weight_kg + 0.2017 * age;
    const double female = -20.4022 + 0.4472 * bpm - 0.1263 * weight_kg + 0.074 * age;
    double kj = 0.0;
    switch (sex) {
        case Sex::male: kj = male; break;
        case Sex::female: kj = female; break;
        case Sex::unspecified: kj = 0.5 * (male + female); break;
    }
    return std::max(kj, 0.0) / 4.184;
}

EnergyEstimate estimate_kcal(std::span<const HeartSample> samples, const ParticipantProfile& profile,
                             const EnergyModel& model) {
    if (samples.empty()) throw std::invalid_argument("empty heart rate series");
    if (!(profile.age > 0.0)) throw std::invalid_argument("age must be positive");
    validate_series(samples);
    EnergyEstimate e;
    e.weight_defaulted = !profile.weight_kg.has_value();
    const double weight = profile.weight_kg.value_or(default_weight_kg);
    if (!(weight > 0.0)) throw std::invalid_argument("weight must be positive");

    auto rate = [&](double bpm) { return model.kcal_per_min(bpm, weight, profile.age, profile.sex); };
    double prev = rate(samples[0].bpm);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double cur = rate(samples[i].bpm);
        e.kcal += 0.5 * (prev + cur) * (samples[i].t - samples[i - 1].t) / 60.0;
        prev = cur;
    }
    return e;
}

SessionPhysiology summarize(std::span<const HeartSample> samples, const ParticipantProfile& profile) {
    SessionPhysiology p;
    p.avg_hr = time_weighted_mean(samples);
    p.hr_max_predicted = hr_max(profile.age);
    p.avg_hr_pct = std::clamp(p.avg_hr / p.hr_max_predicted, 0.0, 1.0);
    const EnergyEstimate e = estimate_kcal(samples, profile);
    p.kcal = e.kcal;
    p.weight_defaulted = e.weight_defaulted;
    return p;
}

std::vector<HeartSample> read_hr_csv(std::istream& in) {
    std::vector<HeartSample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        HeartSample s;
        if (!(ss >> s.t >> s.bpm)) {
            if (out.empty() && lineno == 1) continue;  // header
            throw std::invalid_argument("malformed heart rate CSV at line " + std::to_string(lineno));
        }
        out.push_back(s);
    }
    validate_series(out);
    return out;
}

std::vector<HeartSample> synthesize_heart_rate(const SyntheticHeartRate& cfg, double duration,
                                               std::uint64_t seed) {
    Rng rng(seed);
    std::vector<HeartSample> out;
    const auto n = static_cast<std::size_t>(std::floor(duration / cfg.period));
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * cfg.period;
        const double trend = cfg.working_bpm + (cfg.resting_bpm - cfg.working_bpm) * std::exp(-t / cfg.tau);
        out.push_back({t, std::clamp(trend + rng.normal(0.0, cfg.jitter_bpm), 30.0, 240.0)});
    }
    return out;
}

}  // namespace dragonboat::physiology
