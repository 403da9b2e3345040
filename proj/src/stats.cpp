#include "dragonboat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace dragonboat::stats {

std::vector<double> RepeatedMeasures::column(std::size_t j) const {
    std::vector<double> c;
    c.reserve(n());
    for (const auto& row : values) c.push_back(row.at(j));
    return c;
}

void RepeatedMeasures::validate() const {
    if (n() < 2 || k() < 2) throw std::invalid_argument("repeated measures need n >= 2 subjects and k >= 2 conditions");
    for (const auto& row : values) {
        if (row.size() != k()) throw std::invalid_argument("repeated measures matrix has missing cells");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("repeated measures contain a non-finite value");
    }
    if (!conditions.empty() && conditions.size() != k())
        throw std::invalid_argument("condition labels do not match the column count");
    if (!subjects.empty() && subjects.size() != n())
        throw std::invalid_argument("subject ids do not match the row count");
}

std::vector<double> midranks(std::span<const double> values, double tie_tolerance) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double tol = tie_tolerance * scale;

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] - values[order[i]] <= tol) ++j;
        const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t q = i; q < j; ++q) ranks[order[q]] = r;
        i = j;
    }
    return ranks;
}

double chi2_sf(double x, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("chi-square df must be positive");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double f_sf(double f, double df1, double df2) {
    if (!(df1 > 0.0 && df2 > 0.0)) throw std::invalid_argument("F df must be positive");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return boost::math::ibeta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

// Relative slack for "at least as extreme" comparisons on floating statistics.
constexpr double extreme_slack = 1e-9;

double factorial(std::size_t k) {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

// Exact permutation p-value of the Friedman statistic by convolving the rank
// sum distribution subject by subject. Rank sums are tracked in half-units so
// mid-ranks stay integral.
double friedman_exact_p(const std::vector<std::vector<double>>& ranks, double observed_sum_sq) {
    const std::size_t k = ranks.front().size();
    using Key = std::vector<long long>;
    std::map<Key, double> dist{{Key(k, 0), 1.0}};
    for (const auto& row : ranks) {
        std::vector<long long> base(k);
        for (std::size_t j = 0; j < k; ++j) base[j] = std::llround(2.0 * row[j]);
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<std::vector<long long>> arrangements;
        do {
            std::vector<long long> a(k);
            for (std::size_t j = 0; j < k; ++j) a[j] = base[perm[j]];
            arrangements.push_back(std::move(a));
        } while (std::next_permutation(perm.begin(), perm.end()));

        std::map<Key, double> next;
        for (const auto& [sums, weight] : dist)
            for (const auto& a : arrangements) {
                Key s = sums;
                for (std::size_t j = 0; j < k; ++j) s[j] += a[j];
                next[s] += weight;
            }
        dist = std::move(next);
    }
    double total = 0.0, tail = 0.0;
    const double threshold = observed_sum_sq * (1.0 - extreme_slack);
    for (const auto& [sums, weight] : dist) {
        double ss = 0.0;
        for (long long s : sums) ss += 0.25 * static_cast<double>(s) * static_cast<double>(s);
        total += weight;
        if (ss >= threshold) tail += weight;
    }
    return clamp_p(tail / total);
}

}  // namespace

TestResult friedman(const RepeatedMeasures& m, PValueMode mode) {
    m.validate();
    const std::size_t n = m.n(), k = m.k();
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);

    std::vector<std::vector<double>> ranks;
    ranks.reserve(n);
    std::vector<double> rank_sums(k, 0.0);
    double tie_term = 0.0;
    for (const auto& row : m.values) {
        auto r = midranks(row);
        for (std::size_t j = 0; j < k; ++j) rank_sums[j] += r[j];
        std::vector<double> sorted = r;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < k;) {
            std::size_t j = i;
            while (j < k && sorted[j] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_term += t * t * t - t;
            i = j;
        }
        ranks.push_back(std::move(r));
    }
    double sum_sq = 0.0;
    for (double r : rank_sums) sum_sq += r * r;

    TestResult res;
    res.statistic_name = "chi2";
    res.df = {kd - 1.0};
    const double correction = 1.0 - tie_term / (nd * (kd * kd * kd - kd));
    if (correction <= 0.0) {
        // Every subject tied every condition.
        res.statistic = 0.0;
        res.p_value = 1.0;
        res.degenerate = true;
        return res;
    }
    const double chi2 = (12.0 / (nd * kd * (kd + 1.0)) * sum_sq - 3.0 * nd * (kd + 1.0)) / correction;
    res.statistic = std::max(chi2, 0.0);

    const double arrangements = std::pow(factorial(k), nd);
    const bool exact = mode == PValueMode::exact || (mode == PValueMode::automatic && arrangements <= 1e6);
    if (exact) {
        if (arrangements > 1e8) throw std::invalid_argument("exact Friedman p-value is too expensive for this design");
        res.p_value = friedman_exact_p(ranks, sum_sq);
        res.exact = true;
    } else {
        res.p_value = chi2_sf(res.statistic, kd - 1.0);
    }
    return res;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, PValueMode mode) {
    if (a.empty() || b.empty()) throw std::invalid_argument("Mann-Whitney U needs two non-empty samples");
    const std::size_t na = a.size(), nb = b.size(), total = na + nb;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    for (double v : pooled)
        if (!std::isfinite(v)) throw std::invalid_argument("Mann-Whitney U sample contains a non-finite value");
    const auto ranks = midranks(pooled);

    const double nad = static_cast<double>(na), nbd = static_cast<double>(nb);
    double ra = 0.0;
    for (std::size_t i = 0; i < na; ++i) ra += ranks[i];
    const double ua = ra - nad * (nad + 1.0) / 2.0;
    const double ub = nad * nbd - ua;
    const double mu = nad * nbd / 2.0;
    const double dev = std::abs(ua - mu);

    TestResult res;
    res.statistic_name = "U";
    res.statistic = std::min(ua, ub);

    const bool exact = mode == PValueMode::exact || (mode == PValueMode::automatic && total <= 16);
    if (exact) {
        if (total > 24) throw std::invalid_argument("exact Mann-Whitney enumeration is limited to 24 observations");
        // Visit every na-subset of the pooled ranks (Gosper's hack).
        double count = 0.0, extreme = 0.0;
        const double offset = nad * (nad + 1.0) / 2.0;
        const double threshold = dev - extreme_slack * std::max(1.0, mu);
        const std::uint32_t limit = 1u << total;
        for (std::uint32_t set = (1u << na) - 1; set < limit;) {
            double r = 0.0;
            for (std::size_t i = 0; i < total; ++i)
                if (set & (1u << i)) r += ranks[i];
            count += 1.0;
            if (std::abs(r - offset - mu) >= threshold) extreme += 1.0;
            const std::uint32_t c = set & (~set + 1u);
            const std::uint32_t rr = set + c;
            set = (((rr ^ set) >> 2) / c) | rr;
        }
        res.p_value = clamp_p(extreme / count);
        res.exact = true;
        return res;
    }

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j < total && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double nd = static_cast<double>(total);
    const double var = nad * nbd / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (!(var > 0.0)) {
        res.p_value = 1.0;
        res.degenerate = true;
        return res;
    }
    const double z = std::max(dev - 0.5, 0.0) / std::sqrt(var);
    res.p_value = clamp_p(2.0 * normal_sf(z));
    return res;
}

double bonferroni_alpha(double alpha, int comparisons) {
    if (comparisons < 1) throw std::invalid_argument("Bonferroni needs at least one comparison");
    return alpha / comparisons;
}

TestResult rm_anova_oneway(const RepeatedMeasures& m) {
    m.validate();
    const std::size_t n = m.n(), k = m.k();
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);

    double grand = 0.0;
    std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += m.values[i][j] / kd;
            col_mean[j] += m.values[i][j] / nd;
            grand += m.values[i][j];
        }
    grand /= nd * kd;

    double ss_cond = 0.0, ss_err = 0.0, ss_total = 0.0;
    for (std::size_t j = 0; j < k; ++j) ss_cond += nd * (col_mean[j] - grand) * (col_mean[j] - grand);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double y = m.values[i][j];
            const double e = y - row_mean[i] - col_mean[j] + grand;
            ss_err += e * e;
            ss_total += (y - grand) * (y - grand);
        }

    TestResult res;
    res.statistic_name = "F";
    const double df1 = kd - 1.0, df2 = (nd - 1.0) * (kd - 1.0);
    res.df = {df1, df2};

    const double eps = 1e-12 * ss_total;
    if (ss_cond <= eps) {
        res.statistic = 0.0;
        res.p_value = 1.0;
        res.effect_size = 0.0;
        res.degenerate = ss_err <= eps;
        return res;
    }
    if (ss_err <= eps) {
        res.statistic = std::numeric_limits<double>::infinity();
        res.p_value = 0.0;
        res.effect_size = 1.0;
        res.degenerate = true;
        return res;
    }
    res.statistic = (ss_cond / df1) / (ss_err / df2);
    res.p_value = clamp_p(f_sf(res.statistic, df1, df2));
    res.effect_size = ss_cond / (ss_cond + ss_err);
    return res;
}

RepeatedMeasures aligned_rank_transform(const RepeatedMeasures& m) {
    m.validate();
    const std::size_t n = m.n(), k = m.k();
    double grand = 0.0;
    std::vector<double> row_mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : m.values[i]) row_mean[i] += v;
        grand += row_mean[i];
        row_mean[i] /= static_cast<double>(k);
    }
    grand /= static_cast<double>(n * k);

    std::vector<double> aligned;
    aligned.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (double v : m.values[i]) aligned.push_back(v - row_mean[i] + grand);
    // Alignment arithmetic can split exact ties by an ulp or two.
    const auto ranks = midranks(aligned, 1e-12);

    RepeatedMeasures out = m;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) out.values[i][j] = ranks[i * k + j];
    return out;
}

TestResult art_anova(const RepeatedMeasures& m) { return rm_anova_oneway(aligned_rank_transform(m)); }

std::vector<PairwiseComparison> posthoc_pairwise(const RepeatedMeasures& m, double alpha, PValueMode mode) {
    m.validate();
    const std::size_t k = m.k();
    const int comparisons = static_cast<int>(k * (k - 1) / 2);
    const double adjusted = bonferroni_alpha(alpha, comparisons);
    std::vector<PairwiseComparison> out;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            PairwiseComparison c;
            c.a = a;
            c.b = b;
            const auto ca = m.column(a), cb = m.column(b);
            c.test = mann_whitney_u(ca, cb, mode);
            c.p_bonferroni = c.test.p_value * comparisons;
            c.significant = c.test.p_value < adjusted;
            out.push_back(std::move(c));
        }
    return out;
}

Descriptive describe(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("cannot describe an empty sample");
    Descriptive d;
    for (double x : xs) d.mean += x;
    d.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - d.mean) * (x - d.mean);
        d.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return d;
}

}  // namespace dragonboat::stats
