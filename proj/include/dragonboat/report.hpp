#pragma once

// Data loading and the printed test battery. Observations travel in long
// format (subject, condition, measure, value); a measure is pivoted into a
// complete subjects-by-conditions matrix before testing.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dragonboat/questionnaire.hpp"
#include "dragonboat/stats.hpp"

namespace dragonboat::report {

struct Observation {
    std::string subject;
    std::string condition;
    std::string measure;
    double value = 0.0;
};

/// Reads subject,condition,measure,value rows. A header row is optional.
/// Throws std::runtime_error naming the offending line.
std::vector<Observation> read_long_csv(std::istream& in);
void write_long_csv(std::ostream& out, const std::vector<Observation>& rows);

/// One observation per measure (completion_time, avg_hr_pct, kcal,
/// collisions) from every *.jsonl session record in `dir`. Unfinished
/// sessions contribute no completion_time.
std::vector<Observation> read_record_dir(const std::filesystem::path& dir);

/// Reads "subject,condition,item1,...,itemN" rows and scores them.
/// Measure names are the instrument's subscales.
std::vector<Observation> score_questionnaire_csv(std::istream& in, stats::Instrument instrument);

std::vector<std::string> measures(const std::vector<Observation>& rows);

/// Pivots one measure. Conditions named jc, ic, ec keep that order; others
/// keep first-appearance order. Throws if a subject lacks a condition or has
/// duplicates.
stats::RepeatedMeasures pivot(const std::vector<Observation>& rows, const std::string& measure);

struct Battery {
    std::string measure;
    stats::RepeatedMeasures data;
    std::vector<stats::Descriptive> descriptives;
    stats::TestResult friedman;
    double alpha = 0.05;
    double adjusted_alpha = 0.05;
    std::vector<stats::PairwiseComparison> pairwise;
    std::optional<stats::TestResult> anova;  // absent when the design is degenerate
    std::optional<stats::TestResult> art;
};

Battery run_battery(const stats::RepeatedMeasures& m, const std::string& measure, double alpha = 0.05);

/// "0.035 (*)" style p-value with "<0.001" below the threshold.
std::string format_p(double p, int decimals = 3);

/// Plain-text report: Mean (SD) per condition with Friedman chi2(df) and p,
/// pairwise U with raw and Bonferroni-multiplied p, RM-ANOVA and ART F tests.
void print_battery(std::ostream& out, const Battery& b);

/// One CSV row per test: measure,test,comparison,statistic,df1,df2,p,p_bonferroni,effect_size,flag
void write_battery_csv(std::ostream& out, const std::vector<Battery>& batteries);

}  // namespace dragonboat::report
