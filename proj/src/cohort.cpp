#include "dragonboat/cohort.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dragonboat/rng.hpp"

namespace dragonboat {

std::vector<CohortJob> plan_cohort(const CohortParams& p) {
    if (p.subjects < 1) throw std::invalid_argument("cohort needs at least one subject");
    if (!(p.min_effort > 0.0 && p.min_effort <= 1.0)) throw std::invalid_argument("min_effort must be in (0, 1]");
    Rng rng(p.seed);
    std::vector<CohortJob> jobs;
    for (int s = 0; s < p.subjects; ++s) {
        char id[16];
        std::snprintf(id, sizeof id, "s%02d", s + 1);
        physiology::ParticipantProfile who;
        who.age = std::max(18.0, rng.normal(p.age_mean, p.age_sd));
        who.sex = rng.uniform() < 0.5 ? physiology::Sex::female : physiology::Sex::male;
        who.weight_kg = std::clamp(rng.normal(who.sex == physiology::Sex::male ? 72.0 : 58.0, 8.0), 40.0, 120.0);
        const double fitness = rng.normal();

        for (Technique t : {Technique::jc, Technique::ic, Technique::ec}) {
            CohortJob job;
            SessionConfig& c = job.config;
            c.technique = t;
            c.track_name = p.track;
            c.track = Track::preset(p.track);
            c.seed = rng.bits();
            c.subject_id = id;
            c.participant = who;
            c.working_bpm = std::max(75.0, default_working_bpm(t) + p.bpm_sd * fitness + 0.3 * p.bpm_sd * rng.normal());
            job.pilot.effort = std::clamp(1.0 - std::abs(rng.normal(0.0, p.effort_sd)), p.min_effort, 1.0);
            jobs.push_back(std::move(job));
        }
    }
    return jobs;
}

CohortOutcome run_job(const CohortJob& job) {
    const Trace trace = pilot_trace(job.config, job.pilot);
    std::ostringstream rec;
    const SessionResult r = run_headless(job.config, trace.messages, &rec);
    CohortOutcome o;
    o.subject = job.config.subject_id;
    o.technique = job.config.technique;
    o.completion_time = r.session.completion_time;
    o.collisions = r.collisions;
    if (r.physiology) {
        o.avg_hr_pct = r.physiology->avg_hr_pct;
        o.kcal = r.physiology->kcal;
    }
    o.ticks = r.ticks;
    o.last_hash = r.hashes.empty() ? 0 : r.hashes.back();
    o.record = std::move(rec).str();
    return o;
}

std::vector<CohortOutcome> run_batch_serial(const std::vector<CohortJob>& jobs) {
    std::vector<CohortOutcome> out;
    out.reserve(jobs.size());
    for (const auto& j : jobs) out.push_back(run_job(j));
    return out;
}

std::vector<CohortOutcome> run_batch_parallel(const std::vector<CohortJob>& jobs) {
    std::vector<CohortOutcome> out(jobs.size());
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = run_job(jobs[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical(cohort_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

void write_records(const std::filesystem::path& dir, const std::vector<CohortOutcome>& outcomes) {
    std::filesystem::create_directories(dir);
    for (const auto& o : outcomes) {
        const auto path = dir / (o.subject + "-" + std::string(to_string(o.technique)) + ".jsonl");
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << o.record;
    }
}

}  // namespace dragonboat
