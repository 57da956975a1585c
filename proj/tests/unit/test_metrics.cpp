#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cogdep/error.hpp"
#include "cogdep/metrics.hpp"
#include "helpers.hpp"

using namespace cogdep;
using fixture::Step;

namespace {

// Bernoulli corpus where user u answers correctly with probability p_u.
std::vector<Timeline> bernoulli_corpus(std::size_t users, std::size_t attempts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> q(0, 199);
    std::vector<Timeline> out;
    for (std::size_t k = 0; k < users; ++k) {
        const double p = (static_cast<double>(k % 10) + 0.5) / 10.0;
        std::vector<Step> steps;
        for (std::size_t i = 0; i < attempts; ++i) {
            steps.push_back(Step{"q" + std::to_string(q(rng)), Track::math, 20,
                                 u(rng) < p ? Outcome::correct : Outcome::incorrect, 10});
        }
        out.push_back(fixture::make_timeline(std::to_string(k), steps));
    }
    return out;
}

// Every (i, next occurrence) pair found by exhaustive search.
std::vector<std::pair<std::size_t, std::size_t>> brute_force_pairs(const Timeline& t) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < t.attempts.size(); ++i) {
        if (!t.attempts[i].answered()) continue;
        for (std::size_t j = i + 1; j < t.attempts.size(); ++j) {
            if (t.attempts[j].question_id == t.attempts[i].question_id) {
                out.emplace_back(i, j);
                break;
            }
        }
    }
    return out;
}

}  // namespace

TEST(ExpectedAccuracy, SingleObservationSmoothing) {
    std::vector<Timeline> t{fixture::make_timeline("u", {Step{"q"}})};
    const auto table = build_expected_accuracy(t);
    EXPECT_DOUBLE_EQ(table.probability("u", "q"), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(table.overall_accuracy(), 1.0);
}

TEST(ExpectedAccuracy, AllCorrectCells) {
    std::vector<Timeline> t{fixture::make_timeline("a", std::vector<Step>(4, Step{"q"})),
                            fixture::make_timeline("b", std::vector<Step>(2, Step{"r"}))};
    const auto table = build_expected_accuracy(t);
    EXPECT_DOUBLE_EQ(table.cell_probability(9, 9), 7.0 / 8.0);
    EXPECT_EQ(table.cell_count(9, 9), 6u);
    EXPECT_THROW(build_expected_accuracy(std::vector<Timeline>{}), PreconditionError);
}

TEST(ExpectedAccuracy, RecoversBernoulliRatesAndMarginal) {
    const auto corpus = bernoulli_corpus(100, 300, 1);
    const auto table = build_expected_accuracy(corpus);
    double weighted = 0.0, total = 0.0;
    for (int u = 0; u < 10; ++u) {
        for (int q = 0; q < 10; ++q) {
            const double p = table.cell_probability(u, q);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            const auto n = static_cast<double>(table.cell_count(u, q));
            weighted += static_cast<double>(table.cell_successes(u, q));
            total += n;
            if (n >= 500) EXPECT_NEAR(p, (u + 0.5) / 10.0, 0.05) << u << "," << q;
        }
    }
    EXPECT_NEAR(weighted / total, table.overall_accuracy(), 1e-6);

    double sum = 0.0, count = 0.0;
    for (const auto& t : corpus) {
        for (const auto& a : t.attempts) {
            const double p = performance(a, table);
            EXPECT_GE(p, -1.0);
            EXPECT_LE(p, 1.0);
            sum += p;
            ++count;
        }
    }
    EXPECT_NEAR(sum / count, 0.0, 0.02);
}

TEST(Performance, Definition) {
    std::vector<Timeline> t;
    std::vector<Step> steps;
    for (int i = 0; i < 3; ++i) steps.push_back(Step{"q", Track::math, 10, Outcome::correct});
    for (int i = 0; i < 2; ++i) steps.push_back(Step{"q", Track::math, 10, Outcome::incorrect});
    t.push_back(fixture::make_timeline("u", steps));
    const auto table = build_expected_accuracy(t);
    // u = q = 0.6 -> cell (6, 6) holds 3 of 5: (3 + 1) / (5 + 2).
    const double p = 4.0 / 7.0;
    EXPECT_DOUBLE_EQ(performance(t[0].attempts[0], table), 1.0 - p);
    EXPECT_DOUBLE_EQ(performance(t[0].attempts[4], table), -p);
}

TEST(Learning, NextRecurrenceOnly) {
    auto t = fixture::make_timeline("u", {Step{"q1", Track::math, 10, Outcome::incorrect}, Step{"x"},
                                          Step{"q1", Track::math, 10, Outcome::incorrect},
                                          Step{"q1", Track::math, 10, Outcome::correct}});
    const auto s = learning_outcomes(t);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].first, 0u);
    EXPECT_EQ(s[0].repeat, 2u);
    EXPECT_FALSE(s[0].learned);
    EXPECT_EQ(s[1].first, 2u);
    EXPECT_EQ(s[1].repeat, 3u);
    EXPECT_TRUE(s[1].learned);
}

TEST(Learning, WrongThenRightAndNoRepeat) {
    auto t = fixture::make_timeline("u", {Step{"a", Track::math, 10, Outcome::incorrect}, Step{"a"}, Step{"b"}});
    const auto s = learning_outcomes(t);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_TRUE(s[0].learned);
    auto none = fixture::make_timeline("u", {Step{"a"}, Step{"b"}});
    EXPECT_TRUE(learning_outcomes(none).empty());
}

TEST(Learning, UnansweredExposuresAreSkipped) {
    auto t = fixture::make_timeline("u", {Step{"a", Track::math, 10, Outcome::abandoned},
                                          Step{"a", Track::math, 10, Outcome::skipped}, Step{"a"}});
    EXPECT_TRUE(learning_outcomes(t).empty());
}

TEST(Learning, MatchesBruteForceScan) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> q(0, 9), o(0, 3), gap(0, 600);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Step> steps;
        for (int i = 0; i < 100; ++i) {
            steps.push_back(Step{"q" + std::to_string(q(rng)), Track::math, 10, static_cast<Outcome>(o(rng)), gap(rng)});
        }
        const auto t = fixture::make_timeline("u", steps);
        const auto fast = learning_outcomes(t);
        const auto slow = brute_force_pairs(t);
        ASSERT_EQ(fast.size(), slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            EXPECT_EQ(fast[i].first, slow[i].first);
            EXPECT_EQ(fast[i].repeat, slow[i].second);
            EXPECT_EQ(fast[i].learned, t.attempts[slow[i].second].correct());
        }
    }
}

TEST(Learning, TimeBeforeBreak) {
    auto t = fixture::make_timeline("u", {Step{"a", Track::math, 10, Outcome::correct, 5}, Step{"b", Track::math, 20, Outcome::correct, 400},
                                          Step{"a"}});
    const auto s = learning_outcomes(t);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].position_before_break, 1u);
    EXPECT_DOUBLE_EQ(s[0].time_before_break, 25.0);
}

TEST(RelativeSpeed, Ratios) {
    std::vector<Timeline> t{fixture::make_timeline("u", {Step{"q", Track::math, 10}, Step{"q", Track::math, 30}})};
    const auto c = build_corpus_stats(t);
    EXPECT_DOUBLE_EQ(*relative_answer_speed(t[0].attempts[0], c), 2.0);
    EXPECT_NEAR(*relative_answer_speed(t[0].attempts[1], c), 2.0 / 3.0, 1e-12);
    Attempt zero = t[0].attempts[0];
    zero.duration = 0;
    EXPECT_FALSE(relative_answer_speed(zero, c).has_value());
}

TEST(AlignToBreak, PositionsWithinSession) {
    std::vector<Timeline> t{fixture::make_timeline("u", {Step{"a"}, Step{"b"}, Step{"c"}})};
    const auto table = build_expected_accuracy(t);
    const auto stats = build_corpus_stats(t);
    AlignOptions o;
    o.include_final_session = true;
    const auto s = align_to_break(t, table, stats, o);
    for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(s.performance[p].summary.n, 1u);
    EXPECT_EQ(s.performance[3].summary.n, 0u);
    // Without an observed break the final session is left out.
    EXPECT_EQ(align_to_break(t, table, stats).performance[0].summary.n, 0u);
}

TEST(AlignToBreak, PartitionsSessionAttempts) {
    const auto corpus = bernoulli_corpus(20, 50, 3);
    const auto table = build_expected_accuracy(corpus);
    const auto stats = build_corpus_stats(corpus);
    AlignOptions o;
    o.include_final_session = true;
    o.max_positions = 1000;
    const auto samples = break_aligned_samples(corpus, table, stats, o);
    std::size_t attempts = 0;
    for (const auto& t : corpus) attempts += t.attempts.size();
    EXPECT_EQ(samples.performance.size(), attempts);
}

TEST(PerformanceChange, PairDifferences) {
    std::vector<Timeline> t{fixture::make_timeline("u", {Step{"a", Track::math, 10, Outcome::incorrect, 50},
                                                         Step{"a", Track::math, 10, Outcome::correct, 0}})};
    const auto table = build_expected_accuracy(t);
    const auto c = performance_change_vs_gap(t, table);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_DOUBLE_EQ(c[0].gap, 50.0);
    EXPECT_DOUBLE_EQ(c[0].delta_performance, 1.0);
    std::vector<Timeline> same{fixture::make_timeline("u", {Step{"a"}, Step{"a"}})};
    EXPECT_DOUBLE_EQ(performance_change_vs_gap(same, build_expected_accuracy(same))[0].delta_performance, 0.0);
}

TEST(Binning, LogGapBinsAndSuppression) {
    std::vector<GapChange> c;
    for (int i = 0; i < 100; ++i) c.push_back(GapChange{0.5, 1.0});
    for (int i = 0; i < 100; ++i) c.push_back(GapChange{1000.0, -1.0});
    for (int i = 0; i < 5; ++i) c.push_back(GapChange{50.0, 0.0});
    const auto bins = bin_by_log_gap(c);
    ASSERT_FALSE(bins.empty());
    EXPECT_EQ(bins[0].lo, 0.0);
    EXPECT_EQ(bins[0].hi, 1.0);
    EXPECT_EQ(bins[0].summary.n, 100u);
    std::ostringstream out;
    write_bins_csv(out, bins);
    std::size_t lines = 0;
    for (char ch : out.str()) lines += ch == '\n';
    EXPECT_EQ(lines, 3u);  // header + the two populated bins; the 5-sample bin is suppressed
}

TEST(Binning, EqualWidth) {
    std::vector<double> x{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, y{1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
    const auto b = bin_equal_width(x, y, 2);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_DOUBLE_EQ(b[0].summary.mean, 1.0);
    EXPECT_DOUBLE_EQ(b[1].summary.mean, 2.0);
}
