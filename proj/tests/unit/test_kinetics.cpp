#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cogdep/error.hpp"
#include "cogdep/kinetics.hpp"
#include "helpers.hpp"

using namespace cogdep;
using fixture::Step;

namespace {

ResourceState at(double A, double B = 0.0, double t = 0.0) { return ResourceState{A, B, t, Phase::rest}; }

}  // namespace

TEST(RateOne, Examples) {
    OneResourceParams p;
    EXPECT_NEAR(rate_one(at(p.K_m), true, p), -p.k / 2.0, 1e-15);
    EXPECT_EQ(rate_one(at(p.A_max), false, p), 0.0);
    EXPECT_EQ(rate_one(at(0.0), true, p), 0.0);
    // Anomalous factor (t + 1)^-rho with rho = 1.
    EXPECT_NEAR(rate_one(at(p.K_m, 0.0, 3.0), true, p), -p.k / 8.0, 1e-15);
}

TEST(RateTwo, Examples) {
    TwoResourceParams p;
    const Rates full = rate_two(at(1.0, 0.2), true, p);
    EXPECT_NEAR(full.dA, -p.k_w * 1.0 / (p.K_A + 1.0), 1e-15);
    EXPECT_EQ(full.dB, 0.0);
    EXPECT_EQ(rate_two(at(0.3, p.B_max), false, p).dB, 0.0);
    const Rates r = rate_two(at(0.5, 0.1), true, p);
    const double f = 0.003 * 0.5 / 1.358;
    const double w2 = 0.118 * 0.5 * 0.1 / 0.2;
    EXPECT_NEAR(f, 0.001104, 1e-6);
    EXPECT_NEAR(w2, 0.0295, 1e-12);
    EXPECT_NEAR(r.dA, -f + w2, 1e-15);
    EXPECT_NEAR(r.dB, -w2, 1e-15);
    const Rates rest = rate_two(at(0.5, 0.1), false, p);
    EXPECT_NEAR(rest.dA, -f, 1e-15);
    EXPECT_NEAR(rest.dB, 0.00125 * (0.27 - 0.1), 1e-15);
}

TEST(InitialState, RestedDefaults) {
    const auto one = initial_state(OneResourceParams::fitted());
    EXPECT_EQ(one.A, 1.0);
    const auto two = initial_state(TwoResourceParams::fitted());
    EXPECT_EQ(two.A, 0.0);
    EXPECT_EQ(two.B, 0.27);
}

TEST(IntegrateInterval, ZeroDurationIsIdentity) {
    const ResourceState s{0.4, 0.2, 7.0, Phase::work};
    const auto r = integrate_interval(s, 0.0, false, TwoResourceParams::fitted());
    EXPECT_EQ(r.A, s.A);
    EXPECT_EQ(r.B, s.B);
    EXPECT_EQ(r.t_interval, s.t_interval);
}

TEST(IntegrateInterval, OneResourceRestRisesTowardMax) {
    OneResourceParams p;
    p.rho = 0.0;
    ResourceState s = at(0.0);
    double prev = s.A;
    for (int i = 0; i < 20; ++i) {
        s = integrate_interval(s, 1.0, false, p);
        EXPECT_GT(s.A, prev);
        EXPECT_LE(s.A, p.A_max);
        prev = s.A;
    }
    // Linear relaxation with rho = 0 has the closed form A_max (1 - exp(-k_r t)).
    EXPECT_NEAR(s.A, 1.0 - std::exp(-p.k_r * 20.0), 1e-7);
}

TEST(IntegrateInterval, TwoResourceWorkDecreasesTotal) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TwoResourceParams p;
    for (int i = 0; i < 200; ++i) {
        const ResourceState s = at(u(rng), p.B_max * u(rng));
        const auto r = integrate_interval(s, 1.0 + 300.0 * u(rng), true, p);
        EXPECT_LE(r.A + r.B, s.A + s.B + 1e-15);
    }
}

TEST(IntegrateInterval, TimeFactorRestartsPerInterval) {
    TwoResourceParams p;
    ResourceState s = initial_state(p);
    s = integrate_interval(s, 30.0, true, p);
    EXPECT_DOUBLE_EQ(s.t_interval, 30.0);
    s = integrate_interval(s, 10.0, false, p);
    EXPECT_DOUBLE_EQ(s.t_interval, 10.0);
    s = integrate_interval(s, 5.0, false, p);  // rest continues
    EXPECT_DOUBLE_EQ(s.t_interval, 15.0);
    s = integrate_interval(s, 5.0, true, p);
    EXPECT_DOUBLE_EQ(s.t_interval, 5.0);
}

TEST(IntegrateInterval, SemigroupWithoutAnomalousFactor) {
    TwoResourceParams p;
    p.rho = 0.0;
    for (bool working : {true, false}) {
        const ResourceState s = at(0.3, 0.2);
        const auto once = integrate_interval(s, 100.0, working, p);
        ResourceState twice = integrate_interval(s, 50.0, working, p);
        twice = integrate_interval(twice, 50.0, working, p);
        EXPECT_NEAR(once.A, twice.A, 1e-6);
        EXPECT_NEAR(once.B, twice.B, 1e-6);
    }
}

TEST(IntegrateInterval, InvariantsHoldAtEveryStepForRandomParameters) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> logp(std::log(1e-4), std::log(2.0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&] { return std::exp(logp(rng)); };
    std::size_t violations = 0, steps = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const bool two = trial % 2 == 1;
        KineticParams params;
        double upper_A = 1.0, upper_B = 0.0;
        if (two) {
            TwoResourceParams p{draw(), draw(), draw(), draw(), draw(), draw(), draw()};
            upper_B = p.B_max;
            params = p;
        } else {
            OneResourceParams p{draw(), draw(), draw(), draw(), 1.0};
            params = p;
        }
        ResourceState s = initial_state(params);
        if (two) s.A = u(rng);
        else s.A = u(rng);
        for (int k = 0; k < 6; ++k) {
            const bool working = u(rng) < 0.5;
            StepObserver check = [&](const ResourceState& b, const ResourceState& a) {
                ++steps;
                bool ok = a.A >= 0.0 && a.A <= upper_A && a.B >= 0.0 && a.B <= upper_B;
                if (!two) ok = ok && (working ? a.A <= b.A : a.A >= b.A);
                else if (working) ok = ok && a.B <= b.B && a.A + a.B <= b.A + b.B;
                else ok = ok && a.B >= b.B && a.A <= b.A;
                if (!ok) ++violations;
            };
            s = integrate_interval(s, 1.0 + 600.0 * u(rng) * u(rng), working, params, {}, &check);
        }
    }
    EXPECT_GT(steps, 0u);
    EXPECT_EQ(violations, 0u);
}

TEST(IntegrateInterval, StepHalvingConvergesOnDefaults) {
    IntegratorOptions fine;
    fine.max_step = 0.5;
    fine.steps_per_interval = 200.0;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const KineticParams& p : {KineticParams(OneResourceParams::fitted()), KineticParams(TwoResourceParams::fitted())}) {
        ResourceState a = initial_state(p), b = a;
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const bool working = i % 2 == 0;
            const double d = working ? 5.0 + 120.0 * u(rng) : 400.0 * u(rng) * u(rng);
            a = integrate_interval(a, d, working, p);
            b = integrate_interval(b, d, working, p, fine);
            worst = std::max({worst, std::fabs(a.A - b.A), std::fabs(a.B - b.B)});
        }
        EXPECT_LT(worst, 1e-4);
    }
}

TEST(Trajectory, OneMathAttemptLeavesVerbalResting) {
    const KineticParams p = TwoResourceParams::fitted();
    auto t = fixture::make_timeline("u", {Step{"m", Track::math, 60, Outcome::correct, 10},
                                          Step{"v", Track::verbal, 30, Outcome::correct, 0}});
    const auto traj = trajectory(t, TrackParams{p, p});
    ASSERT_EQ(traj.entries.size(), 2u);
    EXPECT_EQ(traj.entries[0].track, Track::math);
    EXPECT_TRUE(traj.entries[0].valid);
    EXPECT_EQ(traj.entries[0].A_start, 0.0);
    EXPECT_GT(traj.entries[0].A_end, 0.0);
    // Verbal sat at the rest fixed point (A = 0, B = B_max) throughout.
    EXPECT_EQ(traj.entries[1].A_start, 0.0);
    EXPECT_EQ(traj.entries[1].B_start, 0.27);
}

TEST(Trajectory, LongGapRefillsReservoir) {
    const KineticParams p = TwoResourceParams::fitted();
    auto t = fixture::make_timeline("u", {Step{"a", Track::math, 600, Outcome::correct, 3600}, Step{"b", Track::math, 10}});
    const auto traj = trajectory(t, TrackParams{p, p});
    EXPECT_LT(traj.entries[0].B_end, traj.entries[0].B_start);
    EXPECT_GT(traj.entries[1].B_start, traj.entries[0].B_end);
}

TEST(Trajectory, AllRestConvergesToRestFixedPoint) {
    const KineticParams p = TwoResourceParams::fitted();
    std::vector<Step> steps;
    steps.push_back(Step{"a", Track::math, 300, Outcome::correct, 2000});
    for (int i = 0; i < 30; ++i) steps.push_back(Step{"z", Track::math, 0, Outcome::correct, 2000});
    const auto traj = trajectory(fixture::make_timeline("u", steps), TrackParams{p, p});
    const auto& last = traj.entries.back();
    EXPECT_LT(last.A_end, 1e-3);
    EXPECT_NEAR(last.B_end, 0.27, 1e-6);
}

TEST(Trajectory, OtherTrackAndMissingProfileAreInvalid) {
    const KineticParams p = OneResourceParams::fitted();
    auto t = fixture::make_timeline("u", {Step{"o", Track::other, 20}, Step{"v", Track::verbal, 20}, Step{"m", Track::math, 20}});
    const auto traj = trajectory(t, TrackParams{p, std::nullopt});
    ASSERT_EQ(traj.entries.size(), 3u);
    EXPECT_FALSE(traj.entries[0].valid);
    EXPECT_FALSE(traj.entries[1].valid);
    EXPECT_TRUE(traj.entries[2].valid);
    EXPECT_EQ(traj.entries[2].A_start, 1.0);
    EXPECT_LT(traj.entries[2].A_end, 1.0);
}

TEST(Trajectory, MaxAttemptsTruncates) {
    const KineticParams p = TwoResourceParams::fitted();
    auto t = fixture::make_timeline("u", std::vector<Step>(10, Step{"q"}));
    EXPECT_EQ(trajectory(t, TrackParams{p, p}, {}, 4).entries.size(), 4u);
}

TEST(Trajectory, NonFiniteStateIsFatal) {
    TwoResourceParams p;
    p.k_w = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(integrate_interval(at(0.5, 0.1), 10.0, true, p), NumericalError);
}
