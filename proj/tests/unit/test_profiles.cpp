#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cogdep/profiles.hpp"
#include "helpers.hpp"

using namespace cogdep;
using fixture::Step;

namespace {

double f0_quadrature(double T, double rho) {
    auto g = [rho](double t) { return std::pow(t + 1.0, -rho); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, T, 15, 1e-13);
}

CorpusStats stats_with_means(std::initializer_list<std::pair<const char*, double>> means) {
    CorpusStats c;
    for (auto& [q, m] : means) c.mean_correct_time[q] = m;
    c.bounds = {default_bounds(Track::math), default_bounds(Track::verbal)};
    return c;
}

}  // namespace

TEST(LongestCorrectTime, MaxOverCorrectInTrack) {
    auto t = fixture::make_timeline("u", {Step{"a", Track::math, 12}, Step{"b", Track::math, 45},
                                          Step{"c", Track::math, 30}, Step{"d", Track::math, 90, Outcome::incorrect},
                                          Step{"e", Track::verbal, 200}});
    EXPECT_EQ(longest_correct_time(t, Track::math), 45.0);
    auto single = fixture::make_timeline("u", {Step{"a", Track::math, 60}});
    EXPECT_EQ(longest_correct_time(single, Track::math), 60.0);
    EXPECT_FALSE(longest_correct_time(single, Track::verbal).has_value());
}

TEST(RelativeSpeed, MeanOfRatios) {
    const auto c = stats_with_means({{"a", 20.0}, {"b", 40.0}});
    auto one = fixture::make_timeline("u", {Step{"a", Track::math, 20}});
    EXPECT_DOUBLE_EQ(*relative_speed(one, Track::math, c), 1.0);
    auto two = fixture::make_timeline("u", {Step{"a", Track::math, 10}, Step{"b", Track::math, 60}});
    EXPECT_DOUBLE_EQ(*relative_speed(two, Track::math, c), 1.0);
    auto slow = fixture::make_timeline("u", {Step{"a", Track::verbal, 40}, Step{"b", Track::verbal, 80}});
    EXPECT_DOUBLE_EQ(*relative_speed(slow, Track::verbal, c), 2.0);
    const auto profile = build_profile(slow, c);
    ASSERT_TRUE(profile.track(Track::verbal).has_value());
    EXPECT_DOUBLE_EQ(profile.track(Track::verbal)->relative_speed, 1.7);
    EXPECT_TRUE(profile.track(Track::verbal)->speed_clamped);
    EXPECT_FALSE(profile.track(Track::math).has_value());
}

TEST(Clamp, BoundsAndIdempotence) {
    EXPECT_EQ(clamp_to_bounds(20, 33, 200), 33);
    EXPECT_EQ(clamp_to_bounds(1.0, 0.45, 1.7), 1.0);
    EXPECT_EQ(clamp_to_bounds(200, 33, 200), 200);
    EXPECT_EQ(clamp_to_bounds(500, 33, 200), 200);
    for (double v : {-5.0, 40.0, 1e6}) EXPECT_EQ(clamp_to_bounds(clamp_to_bounds(v, 33, 200), 33, 200), clamp_to_bounds(v, 33, 200));
    const auto c = stats_with_means({{"a", 500.0}});
    const auto p = build_profile(fixture::make_timeline("u", {Step{"a", Track::math, 500}}), c);
    EXPECT_DOUBLE_EQ(p.track(Track::math)->longest_time, 200.0);
    EXPECT_TRUE(p.track(Track::math)->longest_clamped);
}

TEST(F0, ClosedFormExamples) {
    EXPECT_NEAR(f0(std::numbers::e - 1.0, 1.0), 1.0, 1e-12);
    EXPECT_NEAR(f0(33, 0.0), 33.0, 1e-12);
    EXPECT_NEAR(f0(33, 1.0), std::log(34.0), 1e-12);
    EXPECT_NEAR(f0(33, 1.0), 3.526, 5e-4);
}

TEST(F0, MatchesQuadratureOnGrid) {
    for (double rho : {0.0, 0.03, 0.5, 1.0, 1.5}) {
        for (double T : {1.0, 33.0, 200.0}) {
            const double q = f0_quadrature(T, rho);
            EXPECT_LE(std::fabs(f0(T, rho) - q) / q, 1e-6) << "rho=" << rho << " T=" << T;
        }
    }
}

TEST(F0, ContinuousAtRhoOneAndMonotone) {
    for (double T : {1.0, 33.0, 200.0}) {
        const double ref = std::log(T + 1.0);
        EXPECT_LE(std::fabs(f0(T, 1.0 + 1e-6) - ref) / ref, 1e-4);
        EXPECT_LE(std::fabs(f0(T, 1.0 - 1e-6) - ref) / ref, 1e-4);
    }
    for (double rho : {0.03, 0.5, 1.0, 1.5}) {
        double prev = 0.0;
        for (double T = 1.0; T < 400.0; T *= 1.5) {
            EXPECT_GT(f0(T, rho), prev);
            prev = f0(T, rho);
        }
    }
    for (double T : {5.0, 100.0}) {
        for (double rho = 0.05; rho < 2.0; rho += 0.1) EXPECT_LT(f0(T, rho + 0.1), f0(T, rho));
    }
}

TEST(ScaleParams, IdentityHalvingAndBmax) {
    TrackProfile id;
    id.relative_speed = 1.0;
    id.longest_time = std::numbers::e - 1.0;
    const auto one = std::get<OneResourceParams>(scale_params(OneResourceParams::fitted(), id));
    EXPECT_DOUBLE_EQ(one.k, 0.078);
    EXPECT_DOUBLE_EQ(one.A_max, 1.0);

    TrackProfile slow{50.0, 2.0};
    const auto two = std::get<TwoResourceParams>(scale_params(TwoResourceParams::fitted(), slow));
    EXPECT_DOUBLE_EQ(two.k_w, 0.003 / 2);
    EXPECT_DOUBLE_EQ(two.k_b, 0.118 / 2);
    EXPECT_DOUBLE_EQ(two.k_r, 0.00125 / 2);
    EXPECT_DOUBLE_EQ(two.rho, 0.03);
    EXPECT_DOUBLE_EQ(two.K_A, 0.858);
    EXPECT_DOUBLE_EQ(two.K_B, 0.1);

    // With rho = 1 the depth factor is ln(T_L + 1).
    TwoResourceParams p = TwoResourceParams::fitted();
    p.rho = 1.0;
    const auto b = std::get<TwoResourceParams>(scale_params(p, TrackProfile{33.0, 1.0}));
    EXPECT_NEAR(b.B_max, 0.27 * std::log(34.0), 1e-12);
    EXPECT_NEAR(b.B_max, 0.952, 1e-3);
}

TEST(ScaleParams, RatesAreHomogeneousInSpeed) {
    const KineticParams g = TwoResourceParams::fitted();
    const auto twice = scale_params(scale_params(g, TrackProfile{40.0, 1.3}), TrackProfile{40.0, 0.7});
    const auto once = scale_params(g, TrackProfile{40.0, 1.3 * 0.7});
    const auto& a = std::get<TwoResourceParams>(twice);
    const auto& b = std::get<TwoResourceParams>(once);
    EXPECT_NEAR(a.k_w, b.k_w, 1e-15);
    EXPECT_NEAR(a.k_b, b.k_b, 1e-15);
    EXPECT_NEAR(a.k_r, b.k_r, 1e-15);
}

TEST(CorpusStats, DefaultBoundsBelowMinimumUsers) {
    std::vector<Timeline> t{fixture::make_timeline("u", {Step{"a", Track::math, 10}, Step{"a", Track::math, 30},
                                                         Step{"b", Track::math, 5, Outcome::incorrect}})};
    const auto c = build_corpus_stats(t);
    EXPECT_DOUBLE_EQ(*c.mean_time("a"), 20.0);
    EXPECT_FALSE(c.mean_time("b").has_value());
    EXPECT_FALSE(c.track_bounds(Track::math).from_corpus);
    EXPECT_DOUBLE_EQ(c.track_bounds(Track::math).longest_time.p5, 33.0);
    EXPECT_DOUBLE_EQ(c.track_bounds(Track::verbal).relative_speed.p95, 1.7);
}

TEST(CorpusStats, PercentilesFromLargeCorpus) {
    std::vector<Timeline> t;
    for (int u = 0; u < 150; ++u) {
        t.push_back(fixture::make_timeline(std::to_string(u), {Step{"a", Track::math, 10 + u}, Step{"b", Track::math, 20}}));
    }
    const auto c = build_corpus_stats(t);
    const auto& b = c.track_bounds(Track::math);
    EXPECT_TRUE(b.from_corpus);
    EXPECT_LE(b.longest_time.p5, b.longest_time.p95);
    EXPECT_LE(b.relative_speed.p5, b.relative_speed.p95);
    for (const auto& p : build_profiles(t, c)) {
        const auto& m = *p.track(Track::math);
        EXPECT_GE(m.longest_time, b.longest_time.p5);
        EXPECT_LE(m.longest_time, b.longest_time.p95);
        EXPECT_GE(m.relative_speed, b.relative_speed.p5);
        EXPECT_LE(m.relative_speed, b.relative_speed.p95);
        EXPECT_GT(f0(m.longest_time, 0.03), 0.0);
    }
}
