#include "cogdep/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "cogdep/csv.hpp"
#include "cogdep/error.hpp"
#include "cogdep/parallel.hpp"

namespace cogdep {

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::correct: return "correct";
        case Outcome::incorrect: return "incorrect";
        case Outcome::skipped: return "skipped";
        case Outcome::abandoned: return "abandoned";
    }
    return "incorrect";
}

std::string_view to_string(Track t) {
    switch (t) {
        case Track::math: return "math";
        case Track::verbal: return "verbal";
        case Track::other: return "other";
    }
    return "other";
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::optional<Outcome> parse_outcome(std::string_view s) {
    const auto v = lower(csv::trim(s));
    if (v == "correct" || v == "1") return Outcome::correct;
    if (v == "incorrect" || v == "2") return Outcome::incorrect;
    if (v == "skipped" || v == "3") return Outcome::skipped;
    if (v == "abandoned" || v == "4") return Outcome::abandoned;
    return std::nullopt;
}

std::optional<Track> parse_track(std::string_view s) {
    const auto v = lower(csv::trim(s));
    if (v == "math") return Track::math;
    if (v == "verbal") return Track::verbal;
    if (v == "other") return Track::other;
    return std::nullopt;
}

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    s = csv::trim(s);
    if (s.empty()) return std::nullopt;
    if (auto i = csv::parse_int(s)) return *i;
    if (auto d = csv::parse_double(s)) {
        if (!std::isfinite(*d)) return std::nullopt;
        return static_cast<std::int64_t>(std::trunc(*d));
    }
    // Calendar form, UTC, optional fractional seconds ignored.
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    const std::string buf(s);
    int consumed = 0;
    if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%*[ T]%2d:%2d:%2d%n", &year, &month, &day, &hour, &minute,
                    &second, &consumed) != 6) {
        return std::nullopt;
    }
    const std::string_view rest = std::string_view(buf).substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest.front() != '.' && rest != "Z" && rest != "+00:00") return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        return std::nullopt;
    }
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = month - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = minute;
    tm.tm_sec = second;
    return static_cast<std::int64_t>(timegm(&tm));
}

ParseResult parse_records(std::istream& in, const ParseOptions& options) {
    if (!in.good()) throw InputError("input stream is not readable");
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        if (in.bad()) throw InputError("failed reading input stream");
        throw DataQualityError("input is empty: no header row");
    }

    static constexpr std::array<std::string_view, 6> required = {
        "user_id", "question_id", "track_name", "round_started_at", "deactivated_at", "outcome"};
    std::array<std::size_t, 6> column{};
    for (std::size_t r = 0; r < required.size(); ++r) {
        auto it = std::find_if(fields.begin(), fields.end(), [&](const std::string& f) {
            return lower(csv::trim(f)) == required[r];
        });
        if (it == fields.end()) {
            throw DataQualityError("header is missing required column '" + std::string(required[r]) + "'");
        }
        column[r] = static_cast<std::size_t>(it - fields.begin());
    }
    const std::size_t needed = *std::max_element(column.begin(), column.end()) + 1;

    ParseResult result;
    while (reader.next(fields)) {
        ++result.rows;
        if (fields.size() < needed) {
            ++result.skipped;
            continue;
        }
        RawRecord rec;
        rec.user_id = std::string(csv::trim(fields[column[0]]));
        rec.question_id = std::string(csv::trim(fields[column[1]]));
        rec.track_name = std::string(csv::trim(fields[column[2]]));
        const auto started = parse_timestamp(fields[column[3]]);
        const auto outcome = parse_outcome(fields[column[5]]);
        const auto deact_field = csv::trim(fields[column[4]]);
        std::optional<std::int64_t> deactivated;
        bool deact_ok = true;
        if (!deact_field.empty()) {
            deactivated = parse_timestamp(deact_field);
            deact_ok = deactivated.has_value();
        }
        if (rec.user_id.empty() || rec.question_id.empty() || !started || *started <= 0 || !outcome ||
            !deact_ok) {
            ++result.skipped;
            continue;
        }
        rec.round_started_at = *started;
        rec.deactivated_at = deactivated;
        rec.outcome = *outcome;
        result.records.push_back(std::move(rec));
    }
    if (in.bad()) throw InputError("failed reading input stream");

    if (result.rows >= options.min_rows_for_quality_check &&
        static_cast<double>(result.skipped) > options.max_malformed_fraction * static_cast<double>(result.rows)) {
        throw DataQualityError("too many malformed rows: " + std::to_string(result.skipped) + " of " +
                               std::to_string(result.rows));
    }
    return result;
}

DurationResult compute_durations(std::span<const RawRecord> records) {
    DurationResult out;
    out.attempts.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::optional<std::int64_t> finish = r.deactivated_at;
        if (i + 1 < records.size()) {
            const auto next_start = records[i + 1].round_started_at;
            finish = finish ? std::min(*finish, next_start) : next_start;
        }
        if (!finish) {
            ++out.dropped_unterminated;
            continue;
        }
        Attempt a;
        a.user_id = r.user_id;
        a.question_id = r.question_id;
        a.track = tag_track(r.track_name);
        a.start = r.round_started_at;
        a.duration = std::max<std::int64_t>(0, *finish - r.round_started_at);
        a.end = a.start + a.duration;
        a.outcome = r.outcome;
        out.attempts.push_back(std::move(a));
    }
    for (std::size_t i = 0; i + 1 < out.attempts.size(); ++i) {
        out.attempts[i].gap_after = std::max<std::int64_t>(0, out.attempts[i + 1].start - out.attempts[i].end);
    }
    return out;
}

Track tag_track(std::string_view track_name) {
    static const std::unordered_set<std::string> math = {"ACT Math", "ACT Science", "GMAT Quantitative",
                                                       "SAT Math"};
    static const std::unordered_set<std::string> verbal = {"ACT English", "ACT Reading", "SAT Reading",
                                                         "SAT Writing"};
    const std::string name(csv::trim(track_name));
    if (math.count(name)) return Track::math;
    if (verbal.count(name)) return Track::verbal;
    return Track::other;
}

std::vector<Timeline> filter_users(std::vector<Timeline> timelines, std::size_t min_attempts) {
    std::erase_if(timelines, [&](const Timeline& t) { return t.attempts.size() < min_attempts; });
    return timelines;
}

Timeline segment_sessions(Timeline timeline, std::int64_t break_threshold_seconds) {
    timeline.sessions.clear();
    const auto n = timeline.attempts.size();
    std::size_t begin = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& gap = timeline.attempts[i].gap_after;
        const bool last = i + 1 == n;
        if (last || (gap && *gap >= break_threshold_seconds)) {
            timeline.sessions.push_back(Session{begin, i + 1});
            begin = i + 1;
        }
    }
    return timeline;
}

bool user_id_less(std::string_view a, std::string_view b) {
    const auto ia = csv::parse_int(a);
    const auto ib = csv::parse_int(b);
    if (ia && ib) {
        if (*ia != *ib) return *ia < *ib;
    }
    return a < b;
}

Corpus build_corpus(std::vector<RawRecord> records, const IngestOptions& options) {
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::vector<RawRecord>> groups;
    for (auto& r : records) {
        auto [it, inserted] = index.try_emplace(r.user_id, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(std::move(r));
    }

    struct UserOutcome {
        Timeline timeline;
        std::size_t duplicates = 0, negative = 0, unterminated = 0;
    };
    std::vector<UserOutcome> per_user(groups.size());
    parallel_for(groups.size(), [&](std::size_t g) {
        auto& recs = groups[g];
        auto& out = per_user[g];
        out.timeline.user_id = recs.front().user_id;
        std::stable_sort(recs.begin(), recs.end(), [](const RawRecord& a, const RawRecord& b) {
            return a.round_started_at < b.round_started_at;
        });
        std::vector<RawRecord> kept;
        kept.reserve(recs.size());
        for (auto& r : recs) {
            if (!kept.empty() && kept.back().round_started_at == r.round_started_at) {
                ++out.duplicates;
                continue;
            }
            if (r.deactivated_at && *r.deactivated_at < r.round_started_at) {
                ++out.negative;
                continue;
            }
            kept.push_back(std::move(r));
        }
        auto durations = compute_durations(kept);
        out.unterminated = durations.dropped_unterminated;
        out.timeline.attempts = std::move(durations.attempts);
    });

    std::vector<Timeline> timelines;
    timelines.reserve(per_user.size());
    for (auto& u : per_user) {
        corpus.stats.duplicates += u.duplicates;
        corpus.stats.negative_durations += u.negative;
        corpus.stats.unterminated += u.unterminated;
        if (!u.timeline.attempts.empty()) timelines.push_back(std::move(u.timeline));
    }
    std::sort(timelines.begin(), timelines.end(),
              [](const Timeline& a, const Timeline& b) { return user_id_less(a.user_id, b.user_id); });
    corpus.stats.users_before_filter = timelines.size();

    timelines = filter_users(std::move(timelines), options.min_attempts);
    std::unordered_set<std::string> questions;
    for (auto& t : timelines) {
        t = segment_sessions(std::move(t), options.break_threshold_seconds);
        corpus.stats.attempts += t.attempts.size();
        for (const auto& a : t.attempts) questions.insert(a.question_id);
    }
    corpus.stats.users = timelines.size();
    corpus.stats.questions = questions.size();
    corpus.timelines = std::move(timelines);
    return corpus;
}

void write_attempt_table(std::ostream& out, std::span<const Timeline> timelines) {
    out << "user_id,question_id,track,start,end,duration,outcome,gap_after\n";
    for (const auto& t : timelines) {
        for (const auto& a : t.attempts) {
            csv::write_row(out, {a.user_id, a.question_id, std::string(to_string(a.track)), std::to_string(a.start),
                                 std::to_string(a.end), std::to_string(a.duration),
                                 std::string(to_string(a.outcome)),
                                 a.gap_after ? std::to_string(*a.gap_after) : std::string()});
        }
    }
}

std::vector<Timeline> read_attempt_table(std::istream& in, std::int64_t break_threshold_seconds) {
    if (!in.good()) throw InputError("attempt table stream is not readable");
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataQualityError("attempt table is empty");
    static constexpr std::array<std::string_view, 8> names = {"user_id", "question_id", "track", "start",
                                                             "end", "duration", "outcome", "gap_after"};
    std::array<std::size_t, 8> col{};
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto it = std::find(fields.begin(), fields.end(), names[i]);
        if (it == fields.end()) {
            throw DataQualityError("attempt table is missing column '" + std::string(names[i]) + "'");
        }
        col[i] = static_cast<std::size_t>(it - fields.begin());
    }
    const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

    std::unordered_map<std::string, std::size_t> index;
    std::vector<Timeline> timelines;
    while (reader.next(fields)) {
        auto bad = [&] {
            return DataQualityError("attempt table line " + std::to_string(reader.line_number()) + " is malformed");
        };
        if (fields.size() < needed) throw bad();
        Attempt a;
        a.user_id = fields[col[0]];
        a.question_id = fields[col[1]];
        auto track = parse_track(fields[col[2]]);
        auto start = csv::parse_int(fields[col[3]]);
        auto end = csv::parse_int(fields[col[4]]);
        auto duration = csv::parse_int(fields[col[5]]);
        auto outcome = parse_outcome(fields[col[6]]);
        if (!track || !start || !end || !duration || !outcome || *end != *start + *duration || *duration < 0) {
            throw bad();
        }
        a.track = *track;
        a.start = *start;
        a.end = *end;
        a.duration = *duration;
        a.outcome = *outcome;
        if (!csv::trim(fields[col[7]]).empty()) {
            auto gap = csv::parse_int(fields[col[7]]);
            if (!gap) throw bad();
            a.gap_after = *gap;
        }
        auto [it, inserted] = index.try_emplace(a.user_id, timelines.size());
        if (inserted) {
            timelines.emplace_back();
            timelines.back().user_id = a.user_id;
        }
        timelines[it->second].attempts.push_back(std::move(a));
    }
    for (auto& t : timelines) {
        std::stable_sort(t.attempts.begin(), t.attempts.end(),
                         [](const Attempt& x, const Attempt& y) { return x.start < y.start; });
        t = segment_sessions(std::move(t), break_threshold_seconds);
    }
    std::sort(timelines.begin(), timelines.end(),
              [](const Timeline& a, const Timeline& b) { return user_id_less(a.user_id, b.user_id); });
    return timelines;
}

}  // namespace cogdep
