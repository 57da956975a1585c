#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cogdep/ingest.hpp"
#include "cogdep/kinetics.hpp"
#include "cogdep/profiles.hpp"
#include "cogdep/stats.hpp"

namespace cogdep {

// Expected accuracy P(u, q) on a 10 x 10 grid of user net accuracy u and
// question net difficulty q (both fractions correct; tenths [0, .1), ...,
// [.9, 1]). Cell estimates are add-one smoothed: (successes + 1) / (n + 2).
class ExpectedAccuracyTable {
public:
    static constexpr int kGrid = 10;

    static int grid_index(double fraction);

    double probability(const std::string& user_id, const std::string& question_id) const;
    double cell_probability(int user_bin, int question_bin) const;
    std::size_t cell_count(int user_bin, int question_bin) const;
    std::size_t cell_successes(int user_bin, int question_bin) const;

    std::optional<double> user_accuracy(const std::string& user_id) const;
    std::optional<double> question_accuracy(const std::string& question_id) const;
    double overall_accuracy() const { return overall_; }

private:
    friend ExpectedAccuracyTable build_expected_accuracy(std::span<const Timeline> timelines);

    std::unordered_map<std::string, double> users_;
    std::unordered_map<std::string, double> questions_;
    std::array<std::size_t, kGrid * kGrid> counts_{};
    std::array<std::size_t, kGrid * kGrid> successes_{};
    double overall_ = 0.0;
};

// Throws PreconditionError on an empty corpus.
ExpectedAccuracyTable build_expected_accuracy(std::span<const Timeline> timelines);

// delta_a - P(u, q).
double performance(const Attempt& attempt, const ExpectedAccuracyTable& table);

struct LearningSample {
    std::size_t first = 0;   // index of the answered exposure
    std::size_t repeat = 0;  // index of the next attempt at the same question
    bool learned = false;    // repeat answered correctly
    double time_before_break = 0.0;  // seconds from the exposure's end to its session's end
    std::size_t position_before_break = 0;
};

// Requires a segmented timeline.
std::vector<LearningSample> learning_outcomes(const Timeline& timeline);

// <T_i> / T_i; absent for zero durations or questions without a reference.
std::optional<double> relative_answer_speed(const Attempt& attempt, const CorpusStats& corpus);

struct AlignOptions {
    std::size_t max_positions = 20;
    // The last session of a timeline ends with the data rather than an
    // observed break; it is excluded unless this is set.
    bool include_final_session = false;
};

// Raw per-sample observations indexed by questions-before-break (0 = last
// question before the break).
struct BreakAlignedSamples {
    std::vector<double> performance_position, performance;
    std::vector<double> speed_position, speed;
    std::vector<double> learning_position, learned;
};

BreakAlignedSamples break_aligned_samples(std::span<const Timeline> timelines, const ExpectedAccuracyTable& table,
                                          const CorpusStats& corpus, const AlignOptions& options = {});

struct SeriesPoint {
    std::size_t position = 0;
    stats::Summary summary;
};

struct BreakAlignedSeries {
    std::vector<SeriesPoint> performance;
    std::vector<SeriesPoint> speed;
    std::vector<SeriesPoint> learning;
};

BreakAlignedSeries align_to_break(std::span<const Timeline> timelines, const ExpectedAccuracyTable& table,
                                  const CorpusStats& corpus, const AlignOptions& options = {});

struct GapChange {
    double gap = 0.0;
    double delta_performance = 0.0;
};

// (gap_after, P_{i+1} - P_i) for every consecutive pair of a user's attempts.
std::vector<GapChange> performance_change_vs_gap(std::span<const Timeline> timelines,
                                                 const ExpectedAccuracyTable& table);

struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    stats::Summary summary;
};

// Gaps below one second share the first bin; the rest use logarithmic bins
// with bins_per_decade edges per factor of ten.
std::vector<Bin> bin_by_log_gap(std::span<const GapChange> changes, int bins_per_decade = 4);

// Equal-width bins over [min, max] of x.
std::vector<Bin> bin_equal_width(std::span<const double> x, std::span<const double> y, int bins);

// Quantities binned by estimated resource levels, one curve per
// (resource, quantity) pair.
struct ResourceCurve {
    std::string resource;  // A_start, A_end, B_start, B_end
    std::string quantity;  // relative_duration, learning, performance, difficulty
    std::vector<Bin> bins;
};

std::vector<ResourceCurve> resource_binned_curves(std::span<const Timeline> timelines,
                                                  std::span<const ResourceTrajectory> trajectories,
                                                  const ExpectedAccuracyTable& table, const CorpusStats& corpus,
                                                  bool has_secondary, int bins = 20);

inline constexpr std::size_t kMinReportSamples = 30;

void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series,
                      std::size_t min_samples = kMinReportSamples);
void write_bins_csv(std::ostream& out, std::span<const Bin> bins, std::size_t min_samples = kMinReportSamples);
void write_resource_curves_csv(std::ostream& out, std::span<const ResourceCurve> curves,
                               std::size_t min_samples = kMinReportSamples);

}  // namespace cogdep
