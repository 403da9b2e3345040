#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "dragonboat/stats.hpp"

using namespace dragonboat::stats;

namespace {

RepeatedMeasures matrix(std::vector<std::vector<double>> v) {
    RepeatedMeasures m;
    m.values = std::move(v);
    return m;
}

// Midranks by counting: rank = #less + (#equal + 1) / 2.
std::vector<double> count_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0.0, equal = 0.0;
        for (double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

// Friedman statistic straight from the textbook definition with the
// tie-corrected denominator.
double friedman_stat(const std::vector<std::vector<double>>& rows) {
    const double n = static_cast<double>(rows.size()), k = static_cast<double>(rows[0].size());
    std::vector<double> sums(rows[0].size(), 0.0);
    double ties = 0.0;
    for (const auto& row : rows) {
        const auto r = count_ranks(row);
        for (std::size_t j = 0; j < r.size(); ++j) sums[j] += r[j];
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double t = static_cast<double>(std::count(row.begin(), row.end(), row[j]));
            ties += (t * t * t - t) / t;  // each group counted once per member
        }
    }
    double ss = 0.0;
    for (double s : sums) ss += s * s;
    const double c = 1.0 - ties / (n * (k * k * k - k));
    if (c <= 0.0) return 0.0;
    return (12.0 / (n * k * (k + 1.0)) * ss - 3.0 * n * (k + 1.0)) / c;
}

// Exact p by visiting every within-subject ordering.
double friedman_brute_force(const std::vector<std::vector<double>>& rows) {
    const double observed = friedman_stat(rows);
    const std::size_t n = rows.size();
    std::vector<std::vector<std::vector<double>>> perms(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> idx(rows[i].size());
        std::iota(idx.begin(), idx.end(), 0);
        do {
            std::vector<double> p;
            for (std::size_t j : idx) p.push_back(rows[i][j]);
            perms[i].push_back(p);
        } while (std::next_permutation(idx.begin(), idx.end()));
    }
    std::vector<std::size_t> choice(n, 0);
    double total = 0.0, extreme = 0.0;
    while (true) {
        std::vector<std::vector<double>> m;
        for (std::size_t i = 0; i < n; ++i) m.push_back(perms[i][choice[i]]);
        total += 1.0;
        if (friedman_stat(m) >= observed - 1e-9) extreme += 1.0;
        std::size_t i = 0;
        while (i < n && ++choice[i] == perms[i].size()) choice[i++] = 0;
        if (i == n) break;
    }
    return extreme / total;
}

double pairwise_u(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return u;
}

// Two-sided exact p: share of label assignments at least as far from the
// null mean as the observed U.
double mw_enumeration(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double mu = a.size() * b.size() / 2.0;
    const double dev = std::abs(pairwise_u(a, b) - mu);
    std::vector<bool> pick(pooled.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    std::sort(pick.begin(), pick.end());
    double total = 0.0, extreme = 0.0;
    do {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < pooled.size(); ++i) (pick[i] ? x : y).push_back(pooled[i]);
        total += 1.0;
        if (std::abs(pairwise_u(x, y) - mu) >= dev - 1e-9) extreme += 1.0;
    } while (std::next_permutation(pick.begin(), pick.end()));
    return extreme / total;
}

}  // namespace

TEST_CASE("midranks") {
    const std::vector<double> v = {3.0, 1.0, 4.0, 1.0, 5.0};
    CHECK(midranks(v) == std::vector<double>{3.0, 1.5, 4.0, 1.5, 5.0});
    const std::vector<double> near = {1.0, 1.0 + 1e-15, 2.0};
    CHECK(midranks(near, 1e-12) == std::vector<double>{1.5, 1.5, 3.0});
    CHECK(midranks(near) == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("distribution tails") {
    CHECK(chi2_sf(5.991464547107979, 2.0) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(f_sf(3.5, 2.0, 10.0) == doctest::Approx(0.07042962777237427).epsilon(1e-10));
    CHECK(normal_sf(1.96) == doctest::Approx(0.024997895148220435).epsilon(1e-10));
    CHECK(chi2_sf(0.0, 2.0) == 1.0);
    CHECK(f_sf(0.0, 2.0, 10.0) == 1.0);
}

TEST_CASE("friedman examples") {
    SUBCASE("identical columns") {
        const auto r = friedman(matrix({{1, 1, 1}, {5, 5, 5}, {2, 2, 2}}));
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("textbook matrix, chi-square tail") {
        const auto m = matrix({{9, 4, 7}, {6, 5, 8}, {9, 7, 6}, {8, 5, 7}});
        const auto r = friedman(m, PValueMode::asymptotic);
        CHECK(r.statistic == doctest::Approx(4.5));
        CHECK(r.df == std::vector<double>{2.0});
        CHECK(r.p_value == doctest::Approx(0.10539922456186433).epsilon(1e-9));
        CHECK_FALSE(r.exact);
        const auto e = friedman(m);
        CHECK(e.exact);
        CHECK(std::abs(e.p_value - friedman_brute_force(m.values)) <= 0.005);
    }
    SUBCASE("rejects tiny designs") {
        CHECK_THROWS_AS(friedman(matrix({{1, 2, 3}})), std::invalid_argument);
        CHECK_THROWS_AS(friedman(matrix({{1}, {2}})), std::invalid_argument);
    }
}

TEST_CASE("property: exact friedman matches brute force for n <= 5, k = 3") {
    std::mt19937_64 g(17);
    for (std::size_t n = 2; n <= 5; ++n) {
        for (int trial = 0; trial < 6; ++trial) {
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> row;
                // Small integer range so some rows contain ties.
                for (int j = 0; j < 3; ++j) row.push_back(static_cast<double>(g() % (trial < 3 ? 100 : 3)));
                rows.push_back(row);
            }
            const auto m = matrix(rows);
            const double oracle = friedman_brute_force(rows);
            const auto r = friedman(m);
            CAPTURE(n);
            CAPTURE(trial);
            CHECK(r.exact);
            CHECK(std::abs(r.p_value - oracle) <= 0.005);
            CHECK(r.statistic == doctest::Approx(std::max(friedman_stat(rows), 0.0)));
        }
    }
}

TEST_CASE("property: friedman is rank invariant and subject-order equivariant") {
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    std::vector<std::vector<double>> rows(9, std::vector<double>(3));
    for (auto& r : rows)
        for (auto& v : r) v = u(g);
    const auto base = friedman(matrix(rows));
    auto transformed = rows;
    for (auto& r : transformed)
        for (auto& v : r) v = std::exp(v / 10.0) + 3.0;
    CHECK(friedman(matrix(transformed)).statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), g);
    const auto s = friedman(matrix(shuffled));
    CHECK(s.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    CHECK(s.p_value == doctest::Approx(base.p_value).epsilon(1e-12));
}

TEST_CASE("mann-whitney examples") {
    const std::vector<double> a = {1, 2}, b = {3, 4};
    auto r = mann_whitney_u(a, b);
    CHECK(r.statistic == 0.0);
    CHECK(r.exact);
    CHECK(r.p_value == doctest::Approx(1.0 / 3.0));

    r = mann_whitney_u(a, a, PValueMode::exact);
    CHECK(r.p_value == 1.0);

    const std::vector<double> c = {1.5, 3.2, 4.1, 5.0, 6.3}, d = {2.2, 7.1, 8.4, 9.0};
    r = mann_whitney_u(c, d);
    CHECK(r.statistic == 4.0);
    CHECK(r.p_value == doctest::Approx(0.19047619047619047).epsilon(1e-12));
}

TEST_CASE("mann-whitney normal approximation") {
    std::vector<double> a, b;
    for (int i = 1; i <= 12; ++i) a.push_back(i);
    for (int i = 6; i <= 19; ++i) b.push_back(i + 0.5);
    auto r = mann_whitney_u(a, b);
    CHECK_FALSE(r.exact);
    CHECK(r.statistic == 21.0);
    CHECK(r.p_value == doctest::Approx(0.001306022374090625).epsilon(1e-9));

    const std::vector<double> c = {1, 2, 2, 3, 4, 5, 5, 6, 7, 8}, d = {3, 3, 4, 6, 8, 9, 9, 10, 11};
    r = mann_whitney_u(c, d);
    CHECK_FALSE(r.exact);
    CHECK(r.statistic == 21.5);
    CHECK(r.p_value == doctest::Approx(0.05926352141664048).epsilon(1e-9));

    CHECK_THROWS_AS(mann_whitney_u(std::vector<double>(13, 1.0), std::vector<double>(12, 2.0), PValueMode::exact),
                    std::invalid_argument);
}

TEST_CASE("property: exact mann-whitney equals enumeration for every n <= 10") {
    std::mt19937_64 g(21);
    for (std::size_t total = 2; total <= 10; ++total) {
        for (std::size_t na = 1; na < total; ++na) {
            for (int trial = 0; trial < 3; ++trial) {
                std::vector<double> a(na), b(total - na);
                const unsigned range = trial == 0 ? 1000u : 4u;  // later trials carry ties
                for (auto& v : a) v = static_cast<double>(g() % range);
                for (auto& v : b) v = static_cast<double>(g() % range);
                const auto r = mann_whitney_u(a, b, PValueMode::exact);
                CAPTURE(total);
                CAPTURE(na);
                const double u = pairwise_u(a, b);
                REQUIRE(r.statistic == doctest::Approx(std::min(u, a.size() * b.size() - u)));
                REQUIRE(r.p_value == doctest::Approx(mw_enumeration(a, b)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("property: mann-whitney is shift invariant and p stays in range") {
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(3 + g() % 12), b(3 + g() % 12);
        for (auto& v : a) v = std::round(u(g) * 4.0) / 4.0;
        for (auto& v : b) v = std::round(u(g) * 4.0) / 4.0;
        const auto r = mann_whitney_u(a, b);
        auto sa = a, sb = b;
        for (auto& v : sa) v += 100.0;
        for (auto& v : sb) v += 100.0;
        const auto s = mann_whitney_u(sa, sb);
        REQUIRE(s.statistic == r.statistic);
        REQUIRE(s.p_value == r.p_value);
        REQUIRE(r.p_value >= 0.0);
        REQUIRE(r.p_value <= 1.0);
    }
}

TEST_CASE("bonferroni") {
    CHECK(bonferroni_alpha(0.05, 3) == doctest::Approx(0.016667).epsilon(1e-5));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.4f", bonferroni_alpha(0.05, 3));
    CHECK(std::string(buf) == "0.0167");
    CHECK(bonferroni_alpha(0.05, 1) == 0.05);
    CHECK(bonferroni_alpha(0.01, 5) == doctest::Approx(0.002));
    CHECK_THROWS_AS(bonferroni_alpha(0.05, 0), std::invalid_argument);
}

TEST_CASE("repeated-measures anova") {
    const std::vector<std::vector<double>> v = {{12.1, 14.3, 13.0}, {10.4, 13.9, 12.2}, {11.8, 15.2, 14.9},
                                                {9.7, 12.0, 10.1},  {13.3, 16.8, 15.0}, {10.9, 12.7, 13.4}};
    // Oracle by the subtraction route: SS_err = SS_total - SS_subjects - SS_cond.
    double grand = 0.0;
    for (const auto& r : v)
        for (double x : r) grand += x;
    grand /= 18.0;
    double ss_total = 0.0, ss_subj = 0.0, ss_cond = 0.0;
    for (const auto& r : v) {
        const double m = (r[0] + r[1] + r[2]) / 3.0;
        ss_subj += 3.0 * (m - grand) * (m - grand);
        for (double x : r) ss_total += (x - grand) * (x - grand);
    }
    for (int j = 0; j < 3; ++j) {
        double m = 0.0;
        for (const auto& r : v) m += r[j] / 6.0;
        ss_cond += 6.0 * (m - grand) * (m - grand);
    }
    const double ss_err = ss_total - ss_subj - ss_cond;
    const double f_oracle = (ss_cond / 2.0) / (ss_err / 10.0);
    const double eta_oracle = ss_cond / (ss_cond + ss_err);

    const auto r = rm_anova_oneway(matrix(v));
    CHECK(r.df == std::vector<double>{2.0, 10.0});
    CHECK(std::abs(r.statistic - f_oracle) <= 1e-9);
    CHECK(std::abs(*r.effect_size - eta_oracle) <= 1e-9);
    // Same values from a separate numerical package.
    CHECK(std::abs(r.statistic - 26.785086618127) <= 1e-9);
    CHECK(std::abs(*r.effect_size - 0.842693522906793) <= 1e-9);
    CHECK(r.p_value == doctest::Approx(9.63236709235344e-05).epsilon(1e-8));

    SUBCASE("per-subject offsets leave F unchanged") {
        auto shifted = v;
        for (std::size_t i = 0; i < shifted.size(); ++i)
            for (double& x : shifted[i]) x += 10.0 * static_cast<double>(i);
        CHECK(rm_anova_oneway(matrix(shifted)).statistic == doctest::Approx(r.statistic).epsilon(1e-9));
    }
    SUBCASE("subject order does not matter") {
        auto rev = v;
        std::reverse(rev.begin(), rev.end());
        CHECK(rm_anova_oneway(matrix(rev)).statistic == doctest::Approx(r.statistic).epsilon(1e-12));
    }
}

TEST_CASE("anova degenerate cases") {
    const auto same = rm_anova_oneway(matrix({{1, 1, 1}, {4, 4, 4}, {2, 2, 2}}));
    CHECK(same.statistic == 0.0);
    CHECK(*same.effect_size == 0.0);
    const auto perfect = rm_anova_oneway(matrix({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}));
    CHECK(perfect.degenerate);
    CHECK(perfect.p_value == 0.0);
}

TEST_CASE("aligned rank transform") {
    SUBCASE("hand-computed 3x3") {
        // Aligned values: row 1 {3.78, 7.78, 5.78}, row 2 {5.44, 8.44, 3.44},
        // row 3 {1.78, 7.78, 7.78}; three cells tie at 7.78 for ranks 6-8.
        const auto art = aligned_rank_transform(matrix({{3, 7, 5}, {6, 9, 4}, {2, 8, 8}}));
        CHECK(art.values == std::vector<std::vector<double>>{{3, 7, 5}, {4, 9, 2}, {1, 7, 7}});
    }
    SUBCASE("no subject effect reduces to plain ranking") {
        const std::vector<std::vector<double>> v = {{1, 9, 5}, {6, 2, 7}, {8, 4, 3}};
        const auto art = aligned_rank_transform(matrix(v));
        std::vector<double> flat;
        for (const auto& r : v) flat.insert(flat.end(), r.begin(), r.end());
        const auto ranks = count_ranks(flat);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(art.values[i][j] == ranks[i * 3 + j]);
    }
    SUBCASE("ranks are a permutation of 1..nk without ties") {
        std::mt19937_64 g(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<std::vector<double>> v(7, std::vector<double>(3));
        for (auto& r : v)
            for (auto& x : r) x = u(g);
        const auto art = aligned_rank_transform(matrix(v));
        std::vector<double> flat;
        for (const auto& r : art.values) flat.insert(flat.end(), r.begin(), r.end());
        std::sort(flat.begin(), flat.end());
        for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i] == static_cast<double>(i + 1));
    }
    SUBCASE("subject order equivariance") {
        const std::vector<std::vector<double>> v = {{3, 7, 5}, {6, 9, 4}, {2, 8, 8}, {1, 1, 4}};
        auto rev = v;
        std::reverse(rev.begin(), rev.end());
        auto a = aligned_rank_transform(matrix(v)).values;
        auto b = aligned_rank_transform(matrix(rev)).values;
        std::reverse(b.begin(), b.end());
        CHECK(a == b);
        CHECK(art_anova(matrix(v)).statistic == doctest::Approx(art_anova(matrix(rev)).statistic));
    }
}

TEST_CASE("post-hoc comparisons") {
    std::vector<std::vector<double>> v;
    for (int i = 0; i < 18; ++i) v.push_back({100.0 + i, 200.0 + 2 * i, 150.0 + 3 * i});
    const auto pairs = posthoc_pairwise(matrix(v));
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].a == 0);
    CHECK(pairs[0].b == 1);
    for (const auto& p : pairs) {
        CHECK(p.p_bonferroni == doctest::Approx(3.0 * p.test.p_value));
        CHECK(p.significant == (p.test.p_value < 0.05 / 3.0));
    }
    CHECK(pairs[0].test.statistic == 0.0);
    CHECK(pairs[0].significant);
}

TEST_CASE("uncapped bonferroni product") {
    std::vector<std::vector<double>> v;
    for (int i = 0; i < 6; ++i) v.push_back({static_cast<double>(i), static_cast<double>(5 - i), static_cast<double>(i % 3)});
    for (const auto& p : posthoc_pairwise(matrix(v)))
        if (p.test.p_value > 1.0 / 3.0) CHECK(p.p_bonferroni > 1.0);
}

TEST_CASE("matrix validation") {
    CHECK_THROWS_AS(matrix({{1, 2}, {3}}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(matrix({{1, 2}, {3, std::nan("")}}).validate(), std::invalid_argument);
    auto m = matrix({{1, 2}, {3, 4}});
    m.conditions = {"a"};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("descriptives") {
    const std::vector<double> x = {2, 4, 4, 4, 5, 5, 7, 9};
    const auto d = describe(x);
    CHECK(d.mean == 5.0);
    CHECK(d.sd == doctest::Approx(std::sqrt(32.0 / 7.0)));
    CHECK(describe(std::vector<double>{3.0}).sd == 0.0);
}
