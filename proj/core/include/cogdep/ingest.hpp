#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cogdep {

enum class Outcome { correct, incorrect, skipped, abandoned };

enum class Track { math, verbal, other };

std::string_view to_string(Outcome o);
std::string_view to_string(Track t);
std::optional<Outcome> parse_outcome(std::string_view s);
std::optional<Track> parse_track(std::string_view s);

// One row of the raw event log.
struct RawRecord {
    std::string user_id;
    std::string question_id;
    std::string track_name;
    std::int64_t round_started_at = 0;
    std::optional<std::int64_t> deactivated_at;
    Outcome outcome = Outcome::incorrect;
};

// One cleaned question-answer episode. duration is the work time T_i and
// end == start + duration. gap_after is absent for a user's last attempt.
struct Attempt {
    std::string user_id;
    std::string question_id;
    Track track = Track::other;
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::int64_t duration = 0;
    Outcome outcome = Outcome::incorrect;
    std::optional<std::int64_t> gap_after;

    // Skipped and abandoned count as not correct.
    bool correct() const { return outcome == Outcome::correct; }
    // The user committed to an answer, so the solution was revealed.
    bool answered() const { return outcome == Outcome::correct || outcome == Outcome::incorrect; }
};

// Half-open range [begin, end) of attempt indices.
struct Session {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

struct Timeline {
    std::string user_id;
    std::vector<Attempt> attempts;
    std::vector<Session> sessions;
};

inline constexpr std::int64_t kDefaultBreakSeconds = 300;
inline constexpr std::size_t kDefaultMinAttempts = 15;

struct ParseOptions {
    // Inputs with at least this many data rows fail when more than
    // max_malformed_fraction of them are malformed.
    double max_malformed_fraction = 0.5;
    std::size_t min_rows_for_quality_check = 10;
};

struct ParseResult {
    std::vector<RawRecord> records;
    std::size_t rows = 0;
    std::size_t skipped = 0;
};

// Reads a header row plus data rows. Required columns: user_id, question_id,
// track_name, round_started_at, deactivated_at, outcome (any order, extra
// columns ignored). Timestamps may be epoch seconds (fractions truncated) or
// "YYYY-MM-DD HH:MM:SS" in UTC. Outcomes accept names or grockit codes 1-4.
// Throws InputError on an unreadable stream, DataQualityError on a missing
// header/column or too many malformed rows.
ParseResult parse_records(std::istream& in, const ParseOptions& options = {});

std::optional<std::int64_t> parse_timestamp(std::string_view s);

struct DurationResult {
    std::vector<Attempt> attempts;
    std::size_t dropped_unterminated = 0;
};

// records must belong to one user and be sorted by round_started_at.
// T_i = min(deactivated_at_i, round_started_at_{i+1}) - round_started_at_i;
// the last record uses deactivated_at alone and is dropped when that is absent.
DurationResult compute_durations(std::span<const RawRecord> records);

Track tag_track(std::string_view track_name);

std::vector<Timeline> filter_users(std::vector<Timeline> timelines,
                                   std::size_t min_attempts = kDefaultMinAttempts);

Timeline segment_sessions(Timeline timeline, std::int64_t break_threshold_seconds = kDefaultBreakSeconds);

struct IngestOptions {
    std::size_t min_attempts = kDefaultMinAttempts;
    std::int64_t break_threshold_seconds = kDefaultBreakSeconds;
};

struct IngestStats {
    std::size_t rows = 0;
    std::size_t malformed_rows = 0;
    std::size_t duplicates = 0;
    std::size_t negative_durations = 0;
    std::size_t unterminated = 0;
    std::size_t users_before_filter = 0;
    std::size_t users = 0;
    std::size_t attempts = 0;
    std::size_t questions = 0;
};

struct Corpus {
    std::vector<Timeline> timelines;
    IngestStats stats;
};

// Groups records by user, deduplicates (user_id, round_started_at) keeping the
// first occurrence, drops records whose deactivation precedes their start,
// computes durations, filters and segments. Timelines are ordered by user id.
Corpus build_corpus(std::vector<RawRecord> records, const IngestOptions& options = {});

// Orders user ids numerically when both are integers, lexicographically
// otherwise.
bool user_id_less(std::string_view a, std::string_view b);

// Canonical attempt table: user_id,question_id,track,start,end,duration,outcome,gap_after.
void write_attempt_table(std::ostream& out, std::span<const Timeline> timelines);

// Reads an attempt table back into segmented timelines.
std::vector<Timeline> read_attempt_table(std::istream& in,
                                         std::int64_t break_threshold_seconds = kDefaultBreakSeconds);

}  // namespace cogdep
