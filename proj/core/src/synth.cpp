#include "cogdep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "cogdep/csv.hpp"
#include "cogdep/error.hpp"
#include "cogdep/parallel.hpp"
#include "cogdep/profiles.hpp"

namespace cogdep {

SynthConfig SynthConfig::depleting() { return SynthConfig{}; }

SynthConfig SynthConfig::frozen() {
    SynthConfig c;
    auto p = std::get<TwoResourceParams>(c.truth);
    p.k_w = 0.0;
    p.k_b = 0.0;
    c.truth = p;
    return c;
}

std::size_t SynthConfig::total_attempts() const {
    const std::size_t heavy = std::min(heavy_users, n_users);
    return heavy * heavy_questions + (n_users - heavy) * questions_per_user;
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string user_name(std::size_t i) {
    std::string digits = std::to_string(i + 1);
    return "u" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

double depletion(const ResourceState& s, const KineticParams& p) {
    if (const auto* one = std::get_if<OneResourceParams>(&p)) {
        return one->A_max > 0 ? 1.0 - s.A / one->A_max : 0.0;
    }
    const auto& two = std::get<TwoResourceParams>(p);
    return two.B_max > 0 ? 1.0 - s.B / two.B_max : 0.0;
}

struct UserOutput {
    std::vector<RawRecord> records;
    std::vector<TruthRow> truth;
};

UserOutput simulate_user(const SynthConfig& c, std::size_t user, const std::vector<double>& offsets) {
    std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                      static_cast<std::uint32_t>(user), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t questions = user < c.heavy_users ? c.heavy_questions : c.questions_per_user;
    const double speed = std::exp(c.user_speed_sd * normal(rng));

    // Tracks, questions and work durations do not depend on the resource
    // state, so they are drawn up front from their own stream. That lets each
    // track be scaled with the T_L the profiles module will see: the longest
    // duration in the track (approximately the longest correct one).
    struct Slot {
        std::size_t track = 0;
        std::size_t local = 0;
        std::int64_t duration = 1;
    };
    std::vector<Slot> schedule(questions);
    {
        std::seed_seq sched_seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                                static_cast<std::uint32_t>(user), 0x5c4eu};
        std::mt19937_64 srng(sched_seq);
        std::size_t track = unit(srng) < 0.5 ? 0 : 1;
        for (std::size_t q = 0; q < questions; ++q) {
            if (q > 0 && unit(srng) >= c.track_stay_probability) track = 1 - track;
            const std::size_t local = std::min<std::size_t>(
                c.questions_per_track - 1,
                static_cast<std::size_t>(unit(srng) * static_cast<double>(c.questions_per_track)));
            const double raw = speed * std::exp(c.duration_log_mean + c.duration_log_sd * normal(srng));
            schedule[q] = Slot{track, local, std::max<std::int64_t>(1, std::llround(raw))};
        }
    }
    std::array<KineticParams, 2> params{c.truth, c.truth};
    for (std::size_t s = 0; s < 2; ++s) {
        double longest = 0.0;
        for (const auto& slot : schedule) {
            if (slot.track == s) longest = std::max(longest, static_cast<double>(slot.duration));
        }
        const auto bounds = default_bounds(s == 0 ? Track::math : Track::verbal);
        TrackProfile latent;
        latent.relative_speed = speed;
        latent.longest_time = clamp_to_bounds(longest, bounds.longest_time.p5, bounds.longest_time.p95);
        params[s] = scale_params(c.truth, latent);
    }

    std::array<ResourceState, 2> state{initial_state(params[0]), initial_state(params[1])};
    std::int64_t clock = c.start_epoch;
    std::map<std::size_t, double> exposure;  // question -> A_end at last answered exposure

    UserOutput out;
    const std::string uid = user_name(user);
    for (std::size_t q = 0; q < questions; ++q) {
        const std::size_t track = schedule[q].track;
        const std::size_t local = schedule[q].local;
        const std::size_t question = track * c.questions_per_track + local;
        const auto duration = schedule[q].duration;
        for (std::size_t s = 0; s < 2; ++s) {
            state[s] = integrate_interval(state[s], static_cast<double>(duration), s == track, params[s]);
        }
        const double a_end = state[track].A;
        double logit = c.beta0 + offsets[question] + c.beta1 * a_end;
        if (auto it = exposure.find(question); it != exposure.end()) logit += c.learning_beta * it->second;
        const double p = logistic(logit);
        const bool correct = unit(rng) < p;
        exposure[question] = a_end;

        RawRecord rec;
        rec.user_id = uid;
        rec.question_id = (track == 0 ? "m" : "v") + std::to_string(local + 1);
        rec.track_name = track == 0 ? "SAT Math" : "SAT Reading";
        rec.round_started_at = clock;
        rec.deactivated_at = clock + duration;
        rec.outcome = correct ? Outcome::correct : Outcome::incorrect;
        out.records.push_back(std::move(rec));
        out.truth.push_back(TruthRow{uid, q, a_end, p});
        clock += duration;

        if (q + 1 == questions) break;
        const double p_break =
            std::clamp(c.break_probability + c.break_fatigue * depletion(state[track], params[track]), 0.0, 1.0);
        std::int64_t gap = 0;
        if (unit(rng) < p_break) {
            std::exponential_distribution<double> extra(1.0 / c.break_extra_mean);
            gap = kDefaultBreakSeconds + std::llround(extra(rng));
        } else {
            std::exponential_distribution<double> short_gap(1.0 / c.short_gap_mean);
            gap = std::min<std::int64_t>(kDefaultBreakSeconds - 1, std::llround(short_gap(rng)));
        }
        for (std::size_t s = 0; s < 2; ++s) {
            state[s] = integrate_interval(state[s], static_cast<double>(gap), false, params[s]);
        }
        clock += gap;
    }
    return out;
}

}  // namespace

SynthCohort generate_cohort(const SynthConfig& config) {
    if (config.questions_per_track == 0) throw PreconditionError("synth: questions_per_track must be positive");
    if (!(config.break_probability >= 0.0 && config.break_probability <= 1.0)) {
        throw PreconditionError("synth: break probability must lie in [0, 1]");
    }
    std::vector<double> offsets(2 * config.questions_per_track, 0.0);
    {
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          0xd1ffu};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& o : offsets) o = config.question_difficulty_sd * normal(rng);
    }
    std::vector<UserOutput> users(config.n_users);
    parallel_for(config.n_users, [&](std::size_t u) { users[u] = simulate_user(config, u, offsets); });

    SynthCohort cohort;
    cohort.records.reserve(config.total_attempts());
    cohort.truth.reserve(config.total_attempts());
    for (auto& u : users) {
        std::move(u.records.begin(), u.records.end(), std::back_inserter(cohort.records));
        std::move(u.truth.begin(), u.truth.end(), std::back_inserter(cohort.truth));
    }
    return cohort;
}

double oracle_mi(const SynthCohort& cohort, int bins) {
    const std::size_t n = cohort.truth.size();
    if (n == 0 || bins < 1) return 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cohort.truth[a].A_end < cohort.truth[b].A_end; });
    // Equal-frequency bins; equal A_end values never straddle a boundary.
    std::vector<std::array<double, 2>> counts;
    std::size_t i = 0;
    const double per_bin = static_cast<double>(n) / bins;
    while (i < n) {
        std::size_t j = std::max(i + 1, static_cast<std::size_t>(std::llround(per_bin * static_cast<double>(counts.size() + 1))));
        j = std::min(j, n);
        while (j < n && cohort.truth[order[j]].A_end == cohort.truth[order[j - 1]].A_end) ++j;
        std::array<double, 2> c{0.0, 0.0};
        for (std::size_t t = i; t < j; ++t) c[cohort.records[order[t]].outcome == Outcome::correct ? 1 : 0] += 1.0;
        counts.push_back(c);
        i = j;
    }
    double total_correct = 0.0;
    for (const auto& c : counts) total_correct += c[1];
    const double N = static_cast<double>(n);
    const double pc[2] = {1.0 - total_correct / N, total_correct / N};
    double mi = 0.0;
    for (const auto& c : counts) {
        const double pb = (c[0] + c[1]) / N;
        for (int o = 0; o < 2; ++o) {
            if (c[o] <= 0.0) continue;
            const double pj = c[o] / N;
            mi += pj * std::log2(pj / (pb * pc[o]));
        }
    }
    return mi;
}

void write_raw_records(std::ostream& out, const std::vector<RawRecord>& records) {
    out << "user_id,question_id,track_name,round_started_at,deactivated_at,outcome\n";
    for (const auto& r : records) {
        csv::write_row(out, {r.user_id, r.question_id, r.track_name, std::to_string(r.round_started_at),
                             r.deactivated_at ? std::to_string(*r.deactivated_at) : std::string(),
                             std::string(to_string(r.outcome))});
    }
}

void write_truth(std::ostream& out, const std::vector<TruthRow>& truth) {
    out << "user_id,attempt_index,A_end,p_correct\n";
    for (const auto& t : truth) {
        csv::write_row(out, {t.user_id, std::to_string(t.attempt_index), csv::format_double(t.A_end),
                             csv::format_double(t.p_correct)});
    }
}

}  // namespace cogdep
