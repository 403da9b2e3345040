#pragma once

// Within-subject test battery: Friedman, Mann-Whitney U with Bonferroni
// post-hoc, one-way repeated-measures ANOVA and the aligned rank transform.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dragonboat::stats {

/// n_subjects x k_conditions, row-major by subject.
struct RepeatedMeasures {
    std::vector<std::vector<double>> values;
    std::vector<std::string> conditions;
    std::vector<std::string> subjects;

    std::size_t n() const { return values.size(); }
    std::size_t k() const { return values.empty() ? 0 : values.front().size(); }
    std::vector<double> column(std::size_t j) const;

    /// Throws std::invalid_argument unless n >= 2, k >= 2, the matrix is
    /// rectangular and every cell is finite. Labels, when present, must match.
    void validate() const;
};

struct TestResult {
    double statistic = 0.0;
    std::string statistic_name;   // "chi2", "U" or "F"
    std::vector<double> df;       // empty for U
    double p_value = 1.0;
    std::optional<double> effect_size;  // partial eta squared
    bool exact = false;
    bool degenerate = false;
};

/// Mid-ranks (1-based, ties share the average rank). Values whose difference
/// is at most `tie_tolerance` times the largest magnitude count as tied.
std::vector<double> midranks(std::span<const double> values, double tie_tolerance = 0.0);

/// Upper tail of the chi-square distribution.
double chi2_sf(double x, double df);
/// Upper tail of the F distribution.
double f_sf(double f, double df1, double df2);
/// Upper tail of the standard normal.
double normal_sf(double z);

enum class PValueMode { automatic, exact, asymptotic };

/// Friedman chi-square with tie correction, df = k - 1. In automatic mode the
/// p-value comes from the exact permutation distribution whenever
/// (k!)^n <= 1e6, and from the chi-square tail otherwise.
TestResult friedman(const RepeatedMeasures& m, PValueMode mode = PValueMode::automatic);

/// Two-sided rank-sum test reporting U = min(U_a, U_b). Automatic mode
/// enumerates the exact null distribution when n_a + n_b <= 16 and otherwise
/// uses the tie-corrected normal approximation with continuity correction.
/// Exact mode is limited to n_a + n_b <= 24.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          PValueMode mode = PValueMode::automatic);

double bonferroni_alpha(double alpha, int comparisons);

/// F = MS_condition / MS_error, df = (k-1, (n-1)(k-1)), effect size is
/// partial eta squared. No sphericity correction.
TestResult rm_anova_oneway(const RepeatedMeasures& m);

/// Aligns y_ij - subject_mean_i + grand_mean, then mid-ranks all cells jointly.
RepeatedMeasures aligned_rank_transform(const RepeatedMeasures& m);

/// rm_anova_oneway over the aligned ranks.
TestResult art_anova(const RepeatedMeasures& m);

struct PairwiseComparison {
    std::size_t a = 0;
    std::size_t b = 0;
    TestResult test;
    double p_bonferroni = 1.0;  // raw p times the comparison count, not capped
    bool significant = false;   // raw p below the adjusted alpha
};

/// Mann-Whitney U on every pair of conditions with Bonferroni correction.
std::vector<PairwiseComparison> posthoc_pairwise(const RepeatedMeasures& m, double alpha = 0.05,
                                                 PValueMode mode = PValueMode::automatic);

struct Descriptive {
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n - 1)
};

Descriptive describe(std::span<const double> xs);

}  // namespace dragonboat::stats
