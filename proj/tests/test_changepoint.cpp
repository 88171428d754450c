#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "psmdid/changepoint.hpp"

using namespace psmdid;

namespace {

std::vector<double> two_level(std::uint64_t seed, std::size_t n1 = 100, std::size_t n2 = 100) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<double> x;
    for (std::size_t i = 0; i < n1; ++i) x.push_back(1.0 + noise(rng));
    for (std::size_t i = 0; i < n2; ++i) x.push_back(2.0 + noise(rng));
    return x;
}

ChangePoint point_at(std::size_t index) {
    ChangePoint p;
    p.index = index;
    return p;
}

}  // namespace

TEST_CASE("split statistic examples") {
    const std::vector<double> up{1, 2, 3, 4}, down{4, 3, 2, 1}, flat{5, 5, 5, 5, 5};
    const auto a = mann_whitney_split(up, 2);
    const auto b = mann_whitney_split(down, 2);
    CHECK(a.u == 4.0);
    CHECK(a.standardized > 0);
    CHECK(b.u == 0.0);
    CHECK(b.standardized < 0);
    CHECK(a.standardized == -b.standardized);
    for (std::size_t k = 1; k < flat.size(); ++k) {
        CHECK(mann_whitney_split(flat, k).u == doctest::Approx(k * (flat.size() - k) / 2.0));
        CHECK(mann_whitney_split(flat, k).standardized == 0.0);
    }
}

TEST_CASE("split statistic agrees with pair counting, ties included") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n = 4 + rng() % 40;
        std::vector<double> x(n);
        for (auto& v : x) v = static_cast<double>(rng() % 6);  // many ties
        for (std::size_t k = 1; k < n; ++k) {
            const auto s = mann_whitney_split(x, k);
            CHECK(s.u == oracle::pair_count_u(x, k));
            CHECK(s.standardized == doctest::Approx(oracle::pair_count_standardized(x, k)).epsilon(1e-12));
        }
    }
}

TEST_CASE("split statistic is rank based and antisymmetric") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 4 + rng() % 30;
        std::vector<double> x(n), ex(n), aff(n), rev(x.rbegin(), x.rend());
        for (auto& v : x) v = n01(rng);
        for (std::size_t i = 0; i < n; ++i) {
            ex[i] = std::exp(x[i]);
            aff[i] = 3.0 * x[i] + 11.0;
        }
        rev.assign(x.rbegin(), x.rend());
        for (std::size_t k = 1; k < n; ++k) {
            const auto s = mann_whitney_split(x, k);
            CHECK(mann_whitney_split(ex, k).standardized == s.standardized);
            CHECK(mann_whitney_split(aff, k).standardized == s.standardized);
            CHECK(mann_whitney_split(rev, n - k).standardized == doctest::Approx(-s.standardized).epsilon(1e-13));
        }
    }
}

TEST_CASE("streaming scan matches the direct statistic at every split") {
    std::mt19937_64 rng(21);
    std::vector<double> x;
    MannWhitneyCpm cpm;
    for (int t = 0; t < 60; ++t) {
        x.push_back(static_cast<double>(rng() % 9));
        const auto scan = cpm.push(x.back());
        if (x.size() < 2) continue;
        double best = 0.0;
        for (std::size_t k = 1; k < x.size(); ++k)
            best = std::max(best, std::fabs(oracle::pair_count_standardized(x, k)));
        CHECK(scan.max_abs == doctest::Approx(best).epsilon(1e-12));
        CHECK(std::fabs(oracle::pair_count_standardized(x, scan.split)) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("thresholds") {
    CHECK(cpm_threshold(500, 20) > 2.5);
    CHECK(cpm_threshold(1000, 100) > cpm_threshold(500, 100));
    CHECK(cpm_threshold(500, 100) > cpm_threshold(370, 100));
    CHECK(cpm_threshold(500, 100000) == cpm_threshold(500, 500));
    CHECK_THROWS_AS(cpm_threshold(123, 50), std::invalid_argument);
    DetectorConfig bad;
    bad.arl0 = 42;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("a clean step is found once, near the step, rising") {
    const auto x = two_level(2024);
    const auto points = detect(x, DetectorConfig{}, Date::from_ymd(2021, 1, 1));
    REQUIRE(points.size() == 1);
    CHECK(points[0].direction == Direction::rising);
    CHECK(points[0].index >= 90);
    CHECK(points[0].index <= 110);
    CHECK(points[0].date == Date::from_ymd(2021, 1, 1).plus_days(static_cast<int>(points[0].index)));
    CHECK(filter_rising(points, x).size() == 1);
}

TEST_CASE("a step down is detected and then filtered out") {
    auto x = two_level(77);
    std::reverse(x.begin(), x.end());
    const auto points = detect(x, DetectorConfig{});
    REQUIRE_FALSE(points.empty());
    CHECK(points[0].direction == Direction::falling);
    CHECK(filter_rising(points, x).empty());
}

TEST_CASE("constant streams raise nothing") {
    CHECK(detect(std::vector<double>(300, 1.25), DetectorConfig{}).empty());
}

TEST_CASE("false alarm rate on i.i.d. streams stays below 1/250") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> n01;
    std::size_t alarms = 0, observations = 0;
    for (int s = 0; s < 1000; ++s) {
        std::vector<double> x(500);
        for (auto& v : x) v = n01(rng);
        alarms += detect(x, DetectorConfig{}).size();
        observations += x.size();
    }
    const double rate = static_cast<double>(alarms) / static_cast<double>(observations);
    MESSAGE("false alarms per observation: " << rate);
    CHECK(rate <= 1.0 / 250.0);
}

TEST_CASE("rising filter compares the two 14-day means") {
    std::vector<double> x(60, 1.0);
    for (std::size_t i = 30; i < 60; ++i) x[i] = 2.0;
    const std::vector<ChangePoint> pts{point_at(30), point_at(10), point_at(45)};
    const auto kept = filter_rising(pts, x);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].index == 30);
}

TEST_CASE("rising filter is idempotent") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(200);
        for (auto& v : x) v = n01(rng);
        std::vector<ChangePoint> pts;
        for (int k = 0; k < 10; ++k) pts.push_back(point_at(1 + rng() % 198));
        std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
        const auto once = filter_rising(pts, x);
        const auto twice = filter_rising(once, x);
        REQUIRE(once.size() == twice.size());
        for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i].index == twice[i].index);
    }
}

TEST_CASE("promotion keeps the steeper of two nearby points") {
    std::vector<double> ncsm(200, 0.0);
    for (std::size_t t = 60; t < 200; ++t) ncsm[t] = static_cast<double>(t - 60) * 2.0;  // slope 2 from day 60
    for (std::size_t t = 40; t < 60; ++t) ncsm[t] = static_cast<double>(t - 40) * 0.1;
    ChangePoint a = point_at(50), b = point_at(60);
    a.date = Date::from_ymd(2021, 1, 1).plus_days(50);
    b.date = Date::from_ymd(2021, 1, 1).plus_days(60);

    const auto single = promote_outbreaks({a}, ncsm);
    REQUIRE(single.size() == 1);
    CHECK(single[0].anchor_date == a.date);
    CHECK(single[0].source == OutbreakSource::detected);

    const auto merged = promote_outbreaks({a, b}, ncsm);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].anchor_date == b.date);
    CHECK(*merged[0].ncsm_slope == doctest::Approx(2.0));
}

TEST_CASE("promotion caps the anchor count and sorts by date") {
    std::vector<double> ncsm(600, 0.0);
    // four outbreaks with increasing steepness, far apart
    const std::size_t starts[] = {100, 200, 300, 450};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t t = starts[i]; t < starts[i] + 30; ++t)
            ncsm[t] = static_cast<double>(t - starts[i]) * static_cast<double>(i + 1);
    std::vector<ChangePoint> pts;
    for (auto s : starts) {
        pts.push_back(point_at(s));
        pts.back().date = Date::from_ymd(2021, 1, 1).plus_days(static_cast<int>(s));
    }
    Diagnostics diag;
    const auto top = promote_outbreaks(pts, ncsm, {}, &diag);
    REQUIRE(top.size() == 3);
    CHECK(top[0].anchor_date == pts[1].date);
    CHECK(top[1].anchor_date == pts[2].date);
    CHECK(top[2].anchor_date == pts[3].date);

    const auto short_list = promote_outbreaks({pts[0]}, ncsm, {}, &diag);
    CHECK(short_list.size() == 1);
    CHECK_FALSE(diag.warnings.empty());
}
