#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cogdep/config.hpp"
#include "cogdep/infotheory.hpp"
#include "cogdep/ingest.hpp"
#include "cogdep/kinetics.hpp"
#include "cogdep/optimizer.hpp"
#include "cogdep/profiles.hpp"

namespace cogdep {

struct SplitSpec {
    std::size_t train_min_attempts = 500;
    std::size_t max_train_users = 250;
    // Training attempts are the 0-based half-open window [first, end).
    std::size_t train_first_attempt = 1;
    std::size_t train_end_attempt = 5000;
    std::size_t test_min_attempts = 25;
    double test_min_accuracy = 0.2;
    std::size_t min_train_users = 10;

    void apply(const KeyValueConfig& config);
    void store(KeyValueConfig& config) const;
};

// Indices into the timeline list; both sorted ascending.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Timelines must already be ordered by user id (build_corpus does this).
// Throws PreconditionError when fewer than spec.min_train_users qualify.
Split split_train_test(std::span<const Timeline> timelines, const SplitSpec& spec = {});

// Digest of the selected user ids, recorded with fit results.
std::string split_hash(std::span<const Timeline> timelines, const Split& split);

// A set of users prepared for model evaluation. Profiles come from the
// corpus-wide statistics so train and test users are scaled alike.
struct UserPool {
    std::vector<const Timeline*> timelines;
    std::vector<UserProfile> profiles;
    std::size_t first_attempt = 0;
    std::size_t end_attempt = static_cast<std::size_t>(-1);

    std::size_t size() const { return timelines.size(); }
};

UserPool make_pool(std::span<const Timeline> timelines, std::span<const std::size_t> members, const CorpusStats& corpus,
                   std::size_t first_attempt = 0, std::size_t end_attempt = static_cast<std::size_t>(-1));

// Per-user trajectories under globally specified parameters.
std::vector<ResourceTrajectory> pool_trajectories(const UserPool& pool, const KineticParams& global,
                                                  const IntegratorOptions& options = {});

// One row per modeled attempt inside the pool window (attempts in tracks
// without a state are left out). R holds the resources of the attempt's own
// track: A_start, A_end, then B_start, B_end for two resources.
struct ResourceSamples {
    std::vector<std::size_t> user;     // index into the pool
    std::vector<std::size_t> attempt;  // index into the user's timeline
    SampleMatrix R;
};

ResourceSamples collect_resources(const UserPool& pool, std::span<const ResourceTrajectory> trajectories,
                                  ModelKind kind);

inline constexpr double kObjectivePenalty = -1.0e3;

// MI(outcome; R) in bits over the pooled window; kObjectivePenalty when the
// trajectories are not finite.
double objective(const KineticParams& global, const UserPool& pool, const MIOptions& mi = {},
                 const IntegratorOptions& integrator = {});

struct FitConfig {
    ModelKind kind = ModelKind::two_resource;
    double lower = 1e-4;
    double upper = 2.0;
    int max_evals = 500;
    double rel_tol = 1e-4;
    std::uint64_t seed = 0;
    int n_shuffles = 10;
    // Starting point; the published fitted values when absent.
    std::optional<KineticParams> start;

    void apply(const KeyValueConfig& config);
    void store(KeyValueConfig& config) const;
};

// Free parameters in optimizer order. One resource: k, k_r, rho, K_m.
// Two resources: k_w, k_b, k_r, B_max, rho (K_A, K_B fixed).
std::vector<std::string> free_parameter_names(ModelKind kind);
std::vector<double> free_parameters(const KineticParams& params);
KineticParams with_free_parameters(const KineticParams& base, std::span<const double> values);

// MI as a fraction of the target's marginal entropy; NaN when that is zero.
double entropy_fraction(double bits, double entropy);

struct ReportRow {
    std::string name;
    std::size_t n = 0;
    double bits = 0.0;
    double dispersion = 0.0;
    double entropy = 0.0;   // marginal entropy of the target, bits
    double fraction = 0.0;  // bits / entropy
    double control = 0.0;   // MI with the target shuffled across samples
};

struct ConditionalRow {
    std::string name;
    std::size_t n = 0;
    double bits = 0.0;
    double dispersion = 0.0;
};

struct FitResult {
    KineticParams params;
    ModelKind kind = ModelKind::two_resource;
    double train_mi = 0.0;
    std::size_t train_samples = 0;
    int evals = 0;
    bool converged = false;
    bool budget_exhausted = false;  // warning: best-so-far returned
    std::uint64_t seed = 0;
    std::string split_digest;
    std::vector<TracePoint> trace;
};

FitResult fit(const FitConfig& config, const UserPool& train);

struct EvalOptions {
    std::uint64_t seed = 0;
    int n_shuffles = 10;
};

// Rows: MI(A;R), MI(L;R), MI(T;R_b), MI(dT;R). A row whose pool is too
// small for the estimator reports n and NaN values.
std::vector<ReportRow> evaluate(const KineticParams& global, const UserPool& test, const EvalOptions& options = {});

// Rows: CMI(L;R|dT), CMI(L;R|T), CMI(A;R|U5), CMI(A;R|P), CMI(A;R|T),
// CMI(A;R|D), CMI(dT;R|U5). D is the question's accuracy over the
// supplied timelines (typically the whole corpus).
std::vector<ConditionalRow> cmi_report(const KineticParams& global, const UserPool& test,
                                       std::span<const Timeline> corpus_timelines, const EvalOptions& options = {});

// Fraction correct of the previous five attempts in the same track.
std::optional<double> recent_accuracy(const Timeline& timeline, std::size_t index, std::size_t window = 5);

// key=value serialization of fitted parameters and fit metadata.
void store_params(KeyValueConfig& out, const KineticParams& params);
KineticParams load_params(const KeyValueConfig& in);
KeyValueConfig to_config(const FitResult& result);

void write_trace_csv(std::ostream& out, const FitResult& result);
void write_table1_csv(std::ostream& out, std::span<const ReportRow> rows);
void write_table2_csv(std::ostream& out, std::span<const ConditionalRow> rows);

// user_id,attempt,track,valid,A_start,A_end,B_start,B_end
void write_trajectories_csv(std::ostream& out, std::span<const Timeline> timelines,
                            std::span<const ResourceTrajectory> trajectories);
// Returns trajectories aligned with timelines; throws DataQualityError on a
// mismatch.
std::vector<ResourceTrajectory> read_trajectories_csv(std::istream& in, std::span<const Timeline> timelines);

}  // namespace cogdep
