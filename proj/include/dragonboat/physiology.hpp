#pragma once

// Heart-rate normalisation and energy expenditure for session telemetry.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dragonboat::physiology {

enum class Sex { male, female, unspecified };

std::string_view to_string(Sex s);
Sex parse_sex(std::string_view s);

struct ParticipantProfile {
    double age = 25.0;                 // years
    std::optional<double> weight_kg;   // defaults to 70 kg when absent
    Sex sex = Sex::unspecified;
};

inline constexpr double default_weight_kg = 70.0;

struct HeartSample {
    double t = 0.0;    // s
    double bpm = 0.0;  // (20, 250)
};

/// Throws std::invalid_argument on out-of-range bpm or non-increasing time.
void validate_series(std::span<const HeartSample> samples);

/// Age-predicted maximum heart rate, 211 - 0.64 * age.
double hr_max(double age);

/// Trapezoidal time-weighted mean bpm. A single sample is its own mean.
double time_weighted_mean(std::span<const HeartSample> samples);

/// Time-weighted mean heart rate as a fraction of hr_max(age), clamped to [0, 1].
double avg_hr_pct(std::span<const HeartSample> samples, double age);

/// Energy rate model, kcal per minute at a given heart rate.
class EnergyModel {
public:
    virtual ~EnergyModel() = default;
    virtual double kcal_per_min(double bpm, double weight_kg, double age, Sex sex) const = 0;
};

/// HR-based energy expenditure regression without VO2max (Keytel et al., 2005).
/// kJ/min for men: -55.0969 + 0.6309 HR + 0.1988 W + 0.2017 A;
/// for women: -20.4022 + 0.4472 HR - 0.1263 W + 0.074 A. Unspecified sex uses
/// the mean of both. Negative rates are clamped to zero.
class KeytelModel final : public EnergyModel {
public:
    double kcal_per_min(double bpm, double weight_kg, double age, Sex sex) const override;
};

struct EnergyEstimate {
    double kcal = 0.0;
    bool weight_defaulted = false;
};

/// Integrates the model's per-minute rate over the series (trapezoid rule).
EnergyEstimate estimate_kcal(std::span<const HeartSample> samples, const ParticipantProfile& profile,
                             const EnergyModel& model = KeytelModel{});

struct SessionPhysiology {
    double avg_hr = 0.0;
    double hr_max_predicted = 0.0;
    double avg_hr_pct = 0.0;
    double kcal = 0.0;
    bool weight_defaulted = false;
};

SessionPhysiology summarize(std::span<const HeartSample> samples, const ParticipantProfile& profile);

/// Reads "t_seconds,bpm" rows; a non-numeric first line is treated as a header.
std::vector<HeartSample> read_hr_csv(std::istream& in);

/// Deterministic synthetic heart-rate trace: an exponential rise from
/// `resting_bpm` towards `working_bpm` with time constant `tau` and seeded
/// Gaussian jitter, sampled every `period` seconds.
struct SyntheticHeartRate {
    double resting_bpm = 70.0;
    double working_bpm = 100.0;
    double tau = 30.0;
    double jitter_bpm = 2.0;
    double period = 1.0;
};

std::vector<HeartSample> synthesize_heart_rate(const SyntheticHeartRate& cfg, double duration,
                                               std::uint64_t seed);

}  // namespace dragonboat::physiology
