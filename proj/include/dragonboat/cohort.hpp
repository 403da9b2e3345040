#pragma once

// Synthetic study cohorts: every subject races every technique once with a
// seeded effort level and heart-rate profile. Sessions are independent, so a
// batch can run in parallel; the serial runner is the reference.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dragonboat/pilot.hpp"
#include "dragonboat/session.hpp"

namespace dragonboat {

struct CohortParams {
    int subjects = 18;
    std::uint64_t seed = 1;
    std::string track = "barrier";
    double effort_sd = 0.08;     // spread of per-session effort below full
    double min_effort = 0.6;
    double bpm_sd = 12.0;        // between-subject spread of the working heart rate
    double age_mean = 24.83;
    double age_sd = 3.0;
};

struct CohortJob {
    SessionConfig config;
    PilotParams pilot;
};

struct CohortOutcome {
    std::string subject;
    Technique technique = Technique::jc;
    std::optional<double> completion_time;
    std::size_t collisions = 0;
    double avg_hr_pct = 0.0;
    double kcal = 0.0;
    std::uint64_t ticks = 0;
    std::uint64_t last_hash = 0;
    std::string record;  // JSON-lines session record

    bool operator==(const CohortOutcome&) const = default;
};

/// Subject-major job list (s01/jc, s01/ic, s01/ec, s02/jc, ...). All random
/// draws happen here, so the job list alone determines every outcome.
std::vector<CohortJob> plan_cohort(const CohortParams& params);

/// Pilots one session and runs it headless.
CohortOutcome run_job(const CohortJob& job);

std::vector<CohortOutcome> run_batch_serial(const std::vector<CohortJob>& jobs);

/// One OpenMP task per session; output order matches `jobs`.
std::vector<CohortOutcome> run_batch_parallel(const std::vector<CohortJob>& jobs);

/// Writes <subject>-<technique>.jsonl for every outcome.
void write_records(const std::filesystem::path& dir, const std::vector<CohortOutcome>& outcomes);

}  // namespace dragonboat
