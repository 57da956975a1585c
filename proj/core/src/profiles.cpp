#include "cogdep/profiles.hpp"

#include <algorithm>
#include <cmath>

#include "cogdep/csv.hpp"
#include "cogdep/parallel.hpp"
#include "cogdep/stats.hpp"

namespace cogdep {

TrackBounds default_bounds(Track track) {
    if (track == Track::verbal) return TrackBounds{{29.0, 240.0}, {0.45, 1.7}, false};
    return TrackBounds{{33.0, 200.0}, {0.46, 1.6}, false};
}

std::optional<double> CorpusStats::mean_time(const std::string& question_id) const {
    auto it = mean_correct_time.find(question_id);
    if (it == mean_correct_time.end()) return std::nullopt;
    return it->second;
}

const TrackBounds& CorpusStats::track_bounds(Track track) const {
    return bounds[track == Track::verbal ? 1 : 0];
}

const std::optional<TrackProfile>& UserProfile::track(Track t) const {
    static const std::optional<TrackProfile> none;
    const auto slot = track_slot(t);
    return slot ? tracks[*slot] : none;
}

std::optional<double> longest_correct_time(const Timeline& timeline, Track track) {
    std::optional<double> longest;
    for (const auto& a : timeline.attempts) {
        if (a.track != track || !a.correct()) continue;
        longest = std::max(longest.value_or(0.0), static_cast<double>(a.duration));
    }
    return longest;
}

std::optional<double> relative_speed(const Timeline& timeline, Track track, const CorpusStats& corpus) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& a : timeline.attempts) {
        if (a.track != track || !a.correct()) continue;
        const auto ref = corpus.mean_time(a.question_id);
        if (!ref || *ref <= 0.0) continue;
        sum += static_cast<double>(a.duration) / *ref;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

double clamp_to_bounds(double value, double p5, double p95) { return std::min(std::max(value, p5), p95); }

double f0(double longest_time, double rho) {
    const double x = longest_time + 1.0;
    if (rho == 1.0) return std::log(x);
    // ((x^rho - x) / (x^rho (rho - 1))) == (x^(1-rho) - 1) / (1 - rho), written
    // with expm1 so it stays accurate as rho approaches 1.
    const double e = 1.0 - rho;
    return std::expm1(e * std::log(x)) / e;
}

CorpusStats build_corpus_stats(std::span<const Timeline> timelines, const ProfileOptions& options) {
    CorpusStats corpus;
    std::unordered_map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& t : timelines) {
        for (const auto& a : t.attempts) {
            if (!a.correct()) continue;
            auto& s = sums[a.question_id];
            s.first += static_cast<double>(a.duration);
            ++s.second;
        }
    }
    for (const auto& [q, s] : sums) {
        const double m = s.first / static_cast<double>(s.second);
        // A question answered correctly only in zero seconds has no usable scale.
        if (m > 0.0) corpus.mean_correct_time.emplace(q, m);
    }

    for (Track track : {Track::math, Track::verbal}) {
        std::vector<double> longest, speed;
        for (const auto& t : timelines) {
            const auto tl = longest_correct_time(t, track);
            const auto tr = relative_speed(t, track, corpus);
            if (tl && tr) {
                longest.push_back(*tl);
                speed.push_back(*tr);
            }
        }
        auto& b = corpus.bounds[track == Track::verbal ? 1 : 0];
        if (longest.size() >= options.min_users_for_percentiles && !longest.empty()) {
            b.longest_time = {stats::quantile(longest, 0.05), stats::quantile(longest, 0.95)};
            b.relative_speed = {stats::quantile(speed, 0.05), stats::quantile(speed, 0.95)};
            b.from_corpus = true;
        } else {
            b = default_bounds(track);
        }
    }
    return corpus;
}

UserProfile build_profile(const Timeline& timeline, const CorpusStats& corpus) {
    UserProfile profile;
    profile.user_id = timeline.user_id;
    for (Track track : {Track::math, Track::verbal}) {
        const auto tl = longest_correct_time(timeline, track);
        const auto tr = relative_speed(timeline, track, corpus);
        if (!tl || !tr) continue;
        const auto& b = corpus.track_bounds(track);
        TrackProfile tp;
        tp.longest_time = clamp_to_bounds(*tl, b.longest_time.p5, b.longest_time.p95);
        tp.relative_speed = clamp_to_bounds(*tr, b.relative_speed.p5, b.relative_speed.p95);
        tp.longest_clamped = tp.longest_time != *tl;
        tp.speed_clamped = tp.relative_speed != *tr;
        profile.tracks[*track_slot(track)] = tp;
    }
    return profile;
}

std::vector<UserProfile> build_profiles(std::span<const Timeline> timelines, const CorpusStats& corpus) {
    std::vector<UserProfile> out(timelines.size());
    parallel_for(timelines.size(), [&](std::size_t i) { out[i] = build_profile(timelines[i], corpus); });
    return out;
}

KineticParams scale_params(const KineticParams& global, const TrackProfile& profile) {
    const double tr = profile.relative_speed;
    if (const auto* one = std::get_if<OneResourceParams>(&global)) {
        OneResourceParams p = *one;
        p.k /= tr;
        p.k_r /= tr;
        return p;
    }
    TwoResourceParams p = std::get<TwoResourceParams>(global);
    p.k_w /= tr;
    p.k_b /= tr;
    p.k_r /= tr;
    p.B_max *= f0(profile.longest_time, p.rho) / tr;
    return p;
}

TrackParams scaled_track_params(const KineticParams& global, const UserProfile& profile) {
    TrackParams out;
    for (std::size_t s = 0; s < 2; ++s) {
        if (profile.tracks[s]) out[s] = scale_params(global, *profile.tracks[s]);
    }
    return out;
}

void write_profiles(std::ostream& out, std::span<const UserProfile> profiles, double rho) {
    out << "user_id,track,T_L,T_r,f0,T_L_clamped,T_r_clamped\n";
    for (const auto& p : profiles) {
        for (Track track : {Track::math, Track::verbal}) {
            const auto& tp = p.track(track);
            if (!tp) continue;
            csv::write_row(out, {p.user_id, std::string(to_string(track)), csv::format_double(tp->longest_time),
                                 csv::format_double(tp->relative_speed),
                                 csv::format_double(f0(tp->longest_time, rho)), tp->longest_clamped ? "1" : "0",
                                 tp->speed_clamped ? "1" : "0"});
        }
    }
}

}  // namespace cogdep
