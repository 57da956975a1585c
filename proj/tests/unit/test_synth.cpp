#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "cogdep/infotheory.hpp"
#include "cogdep/metrics.hpp"
#include "cogdep/parallel.hpp"
#include "cogdep/synth.hpp"

using namespace cogdep;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Hand-built cohort with A_end uniform on [0, 1] and a logistic link.
SynthCohort uniform_cohort(double beta0, double beta1, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SynthCohort c;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = u(rng);
        const double p = logistic(beta0 + beta1 * a);
        RawRecord r;
        r.user_id = "u";
        r.question_id = "q";
        r.outcome = u(rng) < p ? Outcome::correct : Outcome::incorrect;
        c.records.push_back(r);
        c.truth.push_back(TruthRow{"u", i, a, p});
    }
    return c;
}

double rate_correct(const SynthCohort& c) {
    double k = 0.0;
    for (const auto& r : c.records) k += r.outcome == Outcome::correct ? 1.0 : 0.0;
    return k / static_cast<double>(c.records.size());
}

}  // namespace

TEST(Synth, FlatLinkGivesConstantRate) {
    auto cfg = SynthConfig::depleting();
    cfg.beta0 = -1.0;
    cfg.beta1 = 0.0;
    cfg.question_difficulty_sd = 0.0;
    const auto c = generate_cohort(cfg);
    const double p = logistic(-1.0);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(c.records.size()));
    EXPECT_NEAR(rate_correct(c), p, 4.0 * se);
    for (const auto& t : c.truth) EXPECT_DOUBLE_EQ(t.p_correct, p);
    EXPECT_LE(oracle_mi(c), 0.01);
}

TEST(Synth, FrozenResourcesKeepAConstant) {
    const auto c = generate_cohort(SynthConfig::frozen());
    std::set<double> values;
    for (const auto& t : c.truth) values.insert(t.A_end);
    EXPECT_EQ(values.size(), 1u);
    EXPECT_LE(oracle_mi(c), 0.01);
}

TEST(Synth, SizesAndDeterminism) {
    auto cfg = SynthConfig::depleting();
    cfg.n_users = 30;
    cfg.heavy_users = 3;
    cfg.heavy_questions = 200;
    EXPECT_EQ(cfg.total_attempts(), 27u * 60u + 3u * 200u);
    const auto a = generate_cohort(cfg);
    EXPECT_EQ(a.records.size(), cfg.total_attempts());
    EXPECT_EQ(a.truth.size(), a.records.size());

    const unsigned saved = thread_limit();
    set_thread_limit(1);
    const auto b = generate_cohort(cfg);
    set_thread_limit(saved);
    std::ostringstream sa, sb;
    write_raw_records(sa, a.records);
    write_raw_records(sb, b.records);
    EXPECT_EQ(sa.str(), sb.str());
    std::ostringstream ta, tb;
    write_truth(ta, a.truth);
    write_truth(tb, b.truth);
    EXPECT_EQ(ta.str(), tb.str());

    cfg.seed = 1;
    std::ostringstream sc;
    write_raw_records(sc, generate_cohort(cfg).records);
    EXPECT_NE(sa.str(), sc.str());
}

TEST(Synth, HiddenValuesStayOutOfRawOutput) {
    auto cfg = SynthConfig::depleting();
    cfg.n_users = 5;
    const auto c = generate_cohort(cfg);
    std::ostringstream out;
    write_raw_records(out, c.records);
    std::istringstream lines(out.str());
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header, "user_id,question_id,track_name,round_started_at,deactivated_at,outcome");
    EXPECT_EQ(out.str().find("A_end"), std::string::npos);
    EXPECT_EQ(out.str().find("p_correct"), std::string::npos);
    std::ostringstream truth;
    write_truth(truth, c.truth);
    EXPECT_EQ(truth.str().substr(0, truth.str().find('\n')), "user_id,attempt_index,A_end,p_correct");
}

TEST(Synth, IngestReproducesDurationsAndGaps) {
    auto cfg = SynthConfig::depleting();
    cfg.n_users = 20;
    const auto c = generate_cohort(cfg);
    std::stringstream csv;
    write_raw_records(csv, c.records);
    const auto parsed = parse_records(csv);
    EXPECT_EQ(parsed.skipped, 0u);
    ASSERT_EQ(parsed.records.size(), c.records.size());
    const auto corpus = build_corpus(parsed.records);
    ASSERT_EQ(corpus.timelines.size(), cfg.n_users);

    std::size_t r = 0;
    for (const auto& t : corpus.timelines) {
        for (std::size_t i = 0; i < t.attempts.size(); ++i, ++r) {
            const auto& rec = c.records[r];
            const auto& a = t.attempts[i];
            ASSERT_EQ(a.user_id, rec.user_id);
            EXPECT_EQ(a.start, rec.round_started_at);
            EXPECT_EQ(a.duration, *rec.deactivated_at - rec.round_started_at);
            EXPECT_EQ(a.outcome, rec.outcome);
            if (i + 1 < t.attempts.size()) {
                EXPECT_EQ(*a.gap_after, c.records[r + 1].round_started_at - *rec.deactivated_at);
            } else {
                EXPECT_FALSE(a.gap_after.has_value());
            }
        }
    }
    EXPECT_EQ(r, c.records.size());
}

TEST(OracleMi, StepLinkGivesOneBit) {
    EXPECT_NEAR(oracle_mi(uniform_cohort(-500.0, 1000.0, 100000, 3)), 1.0, 0.01);
}

TEST(OracleMi, MatchesQuadratureOfTheJoint) {
    using boost::math::quadrature::gauss_kronrod;
    const auto hb = [](double p) { return binary_entropy(p); };
    const double mean_p = gauss_kronrod<double, 61>::integrate([](double a) { return logistic(-3.0 + 6.0 * a); }, 0.0, 1.0);
    const double cond = gauss_kronrod<double, 61>::integrate([&](double a) { return hb(logistic(-3.0 + 6.0 * a)); }, 0.0, 1.0);
    const double exact = hb(mean_p) - cond;
    ASSERT_GT(exact, 0.05);
    ASSERT_LT(exact, 0.5);
    EXPECT_NEAR(oracle_mi(uniform_cohort(-3.0, 6.0, 200000, 4)), exact, 0.01);
}

TEST(OracleMi, EstimatorAgreesOnDefaultCohort) {
    const auto c = generate_cohort(SynthConfig::depleting());
    ASSERT_GE(c.records.size(), 10000u);
    std::vector<double> o, a;
    for (std::size_t i = 0; i < c.records.size(); ++i) {
        o.push_back(c.records[i].outcome == Outcome::correct ? 1.0 : 0.0);
        a.push_back(c.truth[i].A_end);
    }
    const double oracle = oracle_mi(c);
    EXPECT_GT(oracle, 0.1);
    const auto est = mutual_information(SampleMatrix::column_vector(o), SampleMatrix::column_vector(a));
    EXPECT_NEAR(est.value, oracle, 0.1);
}

TEST(Synth, DepletingCohortDeclinesTowardBreak) {
    const auto c = generate_cohort(SynthConfig::depleting());
    const auto corpus = build_corpus(c.records);
    const auto table = build_expected_accuracy(corpus.timelines);
    const auto stats = build_corpus_stats(corpus.timelines);
    const auto s = break_aligned_samples(corpus.timelines, table, stats);
    std::vector<double> x;
    for (double p : s.performance_position) x.push_back(-p);
    const auto r = stats::spearman(x, s.performance);
    EXPECT_LT(r.rho, 0.0);
    EXPECT_LT(r.p_value, 0.01);
}
