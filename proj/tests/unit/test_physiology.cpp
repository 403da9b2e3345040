#include <doctest.h>

#include <random>
#include <sstream>
#include <stdexcept>

#include "dragonboat/physiology.hpp"

using namespace dragonboat::physiology;

namespace {

std::vector<HeartSample> constant(double bpm, double seconds, double step = 1.0) {
    std::vector<HeartSample> s;
    for (double t = 0.0; t <= seconds + 1e-9; t += step) s.push_back({t, bpm});
    return s;
}

}  // namespace

TEST_CASE("predicted maximum heart rate") {
    CHECK(hr_max(25.0) == 195.0);
    CHECK(hr_max(24.83) == doctest::Approx(195.1088).epsilon(1e-12));
    CHECK(hr_max(50.0) == 179.0);
    CHECK_THROWS_AS(hr_max(0.0), std::invalid_argument);
    for (int a = 1; a < 100; ++a) REQUIRE(hr_max(a + 1) < hr_max(a));
}

TEST_CASE("average heart rate fraction") {
    // 81.63 / 195.1088 and 110.78 / 195.1088 evaluated independently.
    CHECK(avg_hr_pct(constant(81.63, 600), 24.83) == doctest::Approx(0.418382).epsilon(1e-5));
    CHECK(std::abs(avg_hr_pct(constant(81.63, 600), 24.83) - 0.4184) <= 1e-4);
    CHECK(std::abs(avg_hr_pct(constant(110.78, 600), 24.83) - 0.5678) <= 1e-4);
    CHECK(avg_hr_pct(constant(195.0, 60), 25.0) == 1.0);
    CHECK(avg_hr_pct(constant(230.0, 60), 25.0) == 1.0);
}

TEST_CASE("time weighting") {
    // 60 bpm for 10 s then a linear ramp to 120 bpm over 10 s.
    const std::vector<HeartSample> s = {{0.0, 60.0}, {10.0, 60.0}, {20.0, 120.0}};
    CHECK(time_weighted_mean(s) == doctest::Approx((600.0 + 900.0) / 20.0));
    const std::vector<HeartSample> irregular = {{0.0, 100.0}, {1.0, 100.0}, {31.0, 70.0}};
    CHECK(time_weighted_mean(irregular) == doctest::Approx((100.0 + 85.0 * 30.0) / 31.0));
    CHECK(time_weighted_mean(std::vector<HeartSample>{{5.0, 88.0}}) == 88.0);
}

TEST_CASE("series validation") {
    CHECK_THROWS_AS(time_weighted_mean(std::vector<HeartSample>{}), std::invalid_argument);
    CHECK_THROWS_AS(validate_series(std::vector<HeartSample>{{0.0, 10.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate_series(std::vector<HeartSample>{{0.0, 80.0}, {0.0, 81.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate_series(std::vector<HeartSample>{{0.0, 80.0}, {1.0, 260.0}}), std::invalid_argument);
}

TEST_CASE("energy expenditure") {
    ParticipantProfile male{25.0, 70.0, Sex::male};
    SUBCASE("hand-evaluated male equation") {
        // (-55.0969 + 0.6309*100 + 0.1988*70 + 0.2017*25) / 4.184 * 10
        const auto e = estimate_kcal(constant(100.0, 600.0), male);
        CHECK(e.kcal == doctest::Approx(64.41586998).epsilon(1e-9));
        CHECK_FALSE(e.weight_defaulted);
    }
    SUBCASE("female and unspecified") {
        const KeytelModel m;
        const double f = (-20.4022 + 0.4472 * 120.0 - 0.1263 * 60.0 + 0.074 * 30.0) / 4.184;
        CHECK(m.kcal_per_min(120.0, 60.0, 30.0, Sex::female) == doctest::Approx(f));
        CHECK(m.kcal_per_min(120.0, 60.0, 30.0, Sex::unspecified) ==
              doctest::Approx(0.5 * (f + m.kcal_per_min(120.0, 60.0, 30.0, Sex::male))));
    }
    SUBCASE("negative rates clamp to zero") {
        const KeytelModel m;
        CHECK(m.kcal_per_min(40.0, 50.0, 20.0, Sex::male) == 0.0);
    }
    SUBCASE("zero duration") {
        CHECK(estimate_kcal(std::vector<HeartSample>{{0.0, 100.0}}, male).kcal == 0.0);
    }
    SUBCASE("default weight is flagged") {
        ParticipantProfile p{25.0, std::nullopt, Sex::male};
        const auto e = estimate_kcal(constant(100.0, 600.0), p);
        CHECK(e.weight_defaulted);
        CHECK(e.kcal == doctest::Approx(64.41586998).epsilon(1e-9));
    }
    SUBCASE("doubling the duration doubles the energy") {
        const double a = estimate_kcal(constant(120.0, 300.0), male).kcal;
        const double b = estimate_kcal(constant(120.0, 600.0), male).kcal;
        CHECK(b == doctest::Approx(2.0 * a));
    }
}

TEST_CASE("property: energy is additive over a partition") {
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> bpm(60.0, 170.0);
    std::vector<HeartSample> s;
    double t = 0.0;
    for (int i = 0; i < 400; ++i) {
        s.push_back({t, bpm(g)});
        t += 0.5 + (g() % 4) * 0.25;
    }
    const ParticipantProfile who{31.0, 82.0, Sex::female};
    const double whole = estimate_kcal(s, who).kcal;
    for (std::size_t cut : {1u, 57u, 200u, 398u}) {
        const std::vector<HeartSample> a(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(cut) + 1);
        const std::vector<HeartSample> b(s.begin() + static_cast<std::ptrdiff_t>(cut), s.end());
        CHECK(estimate_kcal(a, who).kcal + estimate_kcal(b, who).kcal == doctest::Approx(whole).epsilon(1e-12));
    }
}

TEST_CASE("property: fraction is clamped and monotone in heart rate") {
    double prev = -1.0;
    for (int bpm = 25; bpm < 250; ++bpm) {
        const double p = avg_hr_pct(constant(bpm, 10.0), 24.83);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
        REQUIRE(p >= prev);
        prev = p;
    }
    for (double age = 5.0; age < 120.0; age += 0.5) {
        const double p = avg_hr_pct(constant(150.0, 10.0), age);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
    }
}

TEST_CASE("summary") {
    const auto s = summarize(constant(100.0, 600.0), {25.0, 70.0, Sex::male});
    CHECK(s.avg_hr == 100.0);
    CHECK(s.hr_max_predicted == 195.0);
    CHECK(s.avg_hr_pct == doctest::Approx(100.0 / 195.0));
    CHECK(s.kcal == doctest::Approx(64.41586998).epsilon(1e-9));
}

TEST_CASE("heart rate CSV") {
    std::istringstream ok("t_seconds,bpm\n0,72\n1,75.5\n# note\n2,80\n");
    const auto s = read_hr_csv(ok);
    REQUIRE(s.size() == 3);
    CHECK(s[1].bpm == 75.5);
    std::istringstream bad("0,72\n1,abc\n");
    CHECK_THROWS_AS(read_hr_csv(bad), std::invalid_argument);
    std::istringstream backwards("0,72\n0,75\n");
    CHECK_THROWS_AS(read_hr_csv(backwards), std::invalid_argument);
}

TEST_CASE("synthetic heart rate") {
    SyntheticHeartRate cfg;
    cfg.resting_bpm = 72.0;
    cfg.working_bpm = 110.78;
    const auto a = synthesize_heart_rate(cfg, 300.0, 42);
    const auto b = synthesize_heart_rate(cfg, 300.0, 42);
    const auto c = synthesize_heart_rate(cfg, 300.0, 43);
    REQUIRE(a.size() == 301);
    CHECK(a.front().t == 0.0);
    CHECK(a.back().t == 300.0);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same &= a[i].bpm == b[i].bpm;
        differs |= a[i].bpm != c[i].bpm;
    }
    CHECK(same);
    CHECK(differs);
    CHECK_NOTHROW(validate_series(a));
    CHECK(time_weighted_mean(std::span(a).subspan(200)) == doctest::Approx(110.78).epsilon(0.02));
}
