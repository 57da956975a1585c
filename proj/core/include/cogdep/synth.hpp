#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cogdep/ingest.hpp"
#include "cogdep/kinetics.hpp"

namespace cogdep {

// Generative settings for a synthetic cohort with known resource dynamics.
// Every user is simulated with `truth` scaled by a latent speed factor s in
// the same way fitted parameters are scaled by T_r, and per track by a T_L
// equal to the user's longest work duration in that track (clamped to the
// default percentile bounds).
struct SynthConfig {
    std::size_t n_users = 200;
    std::size_t questions_per_user = 60;
    // The first heavy_users users get heavy_questions attempts instead.
    std::size_t heavy_users = 0;
    std::size_t heavy_questions = 0;

    KineticParams truth = TwoResourceParams{0.01, 0.08, 0.002, 0.02, 0.03, 0.858, 0.1};

    // P(correct) = logistic(beta0 + offset_q + beta1 * A_end + learning_beta * A_prev)
    // where A_prev is A_end at the user's previous answered exposure to q.
    double beta0 = -3.0;
    double beta1 = 6.0;
    double question_difficulty_sd = 0.5;
    double learning_beta = 0.0;

    // Work duration ~ s * lognormal(mu, sigma) seconds, rounded, at least 1.
    double duration_log_mean = 3.6889;  // ln 40
    double duration_log_sd = 0.5;
    double user_speed_sd = 0.2;

    // Between questions: an exponential short gap (capped below the break
    // threshold) or, with the break probability, 300 s plus an exponential.
    double short_gap_mean = 15.0;
    double break_probability = 0.03;
    // Added to the break probability in proportion to reservoir depletion
    // (1 - B/B_max for two resources, 1 - A/A_max for one).
    double break_fatigue = 0.1;
    double break_extra_mean = 600.0;

    double track_stay_probability = 0.9;
    std::size_t questions_per_track = 100;

    std::uint64_t seed = 0;
    std::int64_t start_epoch = 1'300'000'000;

    static SynthConfig depleting();
    // No dynamics: k_w = k_b = 0 keeps A at its rested value, so outcomes are
    // i.i.d. given the question and breaks occur at a constant rate.
    static SynthConfig frozen();

    std::size_t total_attempts() const;
};

struct TruthRow {
    std::string user_id;
    std::size_t attempt_index = 0;
    double A_end = 0.0;
    double p_correct = 0.0;
};

struct SynthCohort {
    std::vector<RawRecord> records;  // ingest-compatible, in user order
    std::vector<TruthRow> truth;     // hidden ground truth, parallel to records
};

// Deterministic in config.seed; each user draws from its own stream.
SynthCohort generate_cohort(const SynthConfig& config);

// Plug-in MI (bits) between outcome and the true A_end over `bins`
// equal-frequency bins of A_end.
double oracle_mi(const SynthCohort& cohort, int bins = 64);

void write_raw_records(std::ostream& out, const std::vector<RawRecord>& records);
void write_truth(std::ostream& out, const std::vector<TruthRow>& truth);

}  // namespace cogdep
