#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "cogdep/ingest.hpp"

namespace cogdep {

enum class ModelKind { one_resource, two_resource };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view s);

// Single resource A drained by Michaelis-Menten work kinetics and refilled
// linearly toward A_max during rest. Rates in 1/s.
struct OneResourceParams {
    double k = 0.078;
    double k_r = 0.21;
    double rho = 1.0;
    double K_m = 0.44867;
    double A_max = 1.0;

    static OneResourceParams fitted() { return {}; }
};

// Primary resource A consumed during work and replenished by conversion from
// a reservoir B; B refills only during rest. K_A and K_B are held fixed
// during fitting.
struct TwoResourceParams {
    double k_w = 0.003;
    double k_b = 0.118;
    double k_r = 0.00125;
    double B_max = 0.27;
    double rho = 0.03;
    double K_A = 0.858;
    double K_B = 0.1;

    static TwoResourceParams fitted() { return {}; }
};

using KineticParams = std::variant<OneResourceParams, TwoResourceParams>;

ModelKind model_kind(const KineticParams& params);
double anomalous_exponent(const KineticParams& params);

enum class Phase { work, rest };

struct ResourceState {
    double A = 0.0;
    double B = 0.0;  // unused by the one-resource model
    double t_interval = 0.0;
    Phase phase = Phase::rest;
};

struct Rates {
    double dA = 0.0;
    double dB = 0.0;
};

// Rate laws use (t_interval + 1)^-rho as the anomalous time factor.
double rate_one(const ResourceState& state, bool working, const OneResourceParams& p);
Rates rate_two(const ResourceState& state, bool working, const TwoResourceParams& p);

// Fully rested start: A = A_max for one resource; A = 0, B = B_max for two.
ResourceState initial_state(const KineticParams& params);

struct IntegratorOptions {
    // Step is min(max_step, duration / steps_per_interval).
    double max_step = 1.0;
    double steps_per_interval = 100.0;
    // During rest, integration ends early once |rate| * remaining time falls
    // below this; rest rates only shrink along the trajectory.
    double rest_convergence = 1e-13;
    // Stiff steps are subdivided until the step-doubling error per second of
    // integrated time is below this.
    double local_tolerance = 1e-8;
};

// Called after every accepted step with the states before and after it.
using StepObserver = std::function<void(const ResourceState& before, const ResourceState& after)>;

// Advances state over one work or rest interval with classical fourth-order
// Runge-Kutta. t_interval restarts at 0 for every work interval and whenever
// rest follows work; consecutive rest calls extend a single rest interval.
// Components are kept inside [0, A_max] (or [0, 1]) and [0, B_max].
// Throws NumericalError if the state becomes non-finite.
ResourceState integrate_interval(ResourceState state, double duration_seconds, bool working,
                                 const KineticParams& params, const IntegratorOptions& options = {},
                                 const StepObserver* observer = nullptr);

struct ResourceEntry {
    Track track = Track::other;
    bool valid = false;  // false for tracks without a state (other, or no profile)
    double A_start = 0.0;
    double A_end = 0.0;
    double B_start = 0.0;
    double B_end = 0.0;
};

struct ResourceTrajectory {
    std::vector<ResourceEntry> entries;  // one per attempt, in order
};

// Per-track parameters already scaled for the user; index 0 math, 1 verbal.
// A missing entry leaves that track unmodeled.
using TrackParams = std::array<std::optional<KineticParams>, 2>;

// Runs independent math and verbal states through the user's timeline. The
// attempt's own track works for the attempt's duration while the other track
// rests; both rest over gap_after. Attempts are simulated up to max_attempts.
ResourceTrajectory trajectory(const Timeline& timeline, const TrackParams& params,
                              const IntegratorOptions& options = {},
                              std::size_t max_attempts = static_cast<std::size_t>(-1));

std::optional<std::size_t> track_slot(Track track);

}  // namespace cogdep
