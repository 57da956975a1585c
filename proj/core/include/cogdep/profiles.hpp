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

namespace cogdep {

struct PercentileBounds {
    double p5 = 0.0;
    double p95 = 0.0;
};

struct TrackBounds {
    PercentileBounds longest_time;    // seconds
    PercentileBounds relative_speed;  // dimensionless
    bool from_corpus = false;         // false when the shipped defaults are used
};

TrackBounds default_bounds(Track track);

struct ProfileOptions {
    // Below this many profiled users in a track the default bounds are used.
    std::size_t min_users_for_percentiles = 100;
};

// Corpus-wide reference values, computed once and then read-only.
struct CorpusStats {
    // Mean duration of correct answers per question id.
    std::unordered_map<std::string, double> mean_correct_time;
    std::array<TrackBounds, 2> bounds{};  // math, verbal

    std::optional<double> mean_time(const std::string& question_id) const;
    const TrackBounds& track_bounds(Track track) const;
};

// Longest duration among the user's correct answers in the track.
std::optional<double> longest_correct_time(const Timeline& timeline, Track track);

// Mean of T_i / <T_i> over the user's correct answers in the track.
std::optional<double> relative_speed(const Timeline& timeline, Track track, const CorpusStats& corpus);

double clamp_to_bounds(double value, double p5, double p95);

// Resource-depth factor: integral of (t + 1)^-rho over [0, T_L].
double f0(double longest_time, double rho);

CorpusStats build_corpus_stats(std::span<const Timeline> timelines, const ProfileOptions& options = {});

struct TrackProfile {
    double longest_time = 0.0;    // clamped T_L, seconds
    double relative_speed = 1.0;  // clamped T_r
    bool longest_clamped = false;
    bool speed_clamped = false;
};

struct UserProfile {
    std::string user_id;
    std::array<std::optional<TrackProfile>, 2> tracks;  // math, verbal

    const std::optional<TrackProfile>& track(Track t) const;
};

// A track without correct answers has no profile and stays unmodeled.
UserProfile build_profile(const Timeline& timeline, const CorpusStats& corpus);

std::vector<UserProfile> build_profiles(std::span<const Timeline> timelines, const CorpusStats& corpus);

// Rates divide by T_r; the two-resource B_max becomes B_max * f0 / T_r with f0
// evaluated at the model's own rho. Exponents and saturation constants and the
// one-resource A_max are left unchanged.
KineticParams scale_params(const KineticParams& global, const TrackProfile& profile);

TrackParams scaled_track_params(const KineticParams& global, const UserProfile& profile);

// CSV: user_id,track,T_L,T_r,f0,T_L_clamped,T_r_clamped (f0 at the given rho).
void write_profiles(std::ostream& out, std::span<const UserProfile> profiles, double rho);

}  // namespace cogdep
