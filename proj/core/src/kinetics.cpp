#include "cogdep/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cogdep/error.hpp"

namespace cogdep {

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::one_resource ? "one-resource" : "two-resource";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
    if (s == "one-resource" || s == "one_resource" || s == "one") return ModelKind::one_resource;
    if (s == "two-resource" || s == "two_resource" || s == "two") return ModelKind::two_resource;
    return std::nullopt;
}

ModelKind model_kind(const KineticParams& params) {
    return std::holds_alternative<OneResourceParams>(params) ? ModelKind::one_resource
                                                             : ModelKind::two_resource;
}

double anomalous_exponent(const KineticParams& params) {
    return std::visit([](const auto& p) { return p.rho; }, params);
}

std::optional<std::size_t> track_slot(Track track) {
    switch (track) {
        case Track::math: return 0;
        case Track::verbal: return 1;
        case Track::other: return std::nullopt;
    }
    return std::nullopt;
}

namespace {

inline double time_factor(double t, double rho) {
    if (rho == 0.0) return 1.0;
    if (rho == 1.0) return 1.0 / (1.0 + t);
    return std::exp(-rho * std::log1p(t));
}

// Right-hand sides evaluated on the state clamped into its invariant box, so
// every Runge-Kutta stage keeps the sign structure of the exact flow. g is the
// time factor at the stage time.
struct OneModel {
    const OneResourceParams& p;
    double rho() const { return p.rho; }
    double upper_A() const { return p.A_max; }
    double upper_B() const { return 0.0; }
    Rates eval(double A, double /*B*/, double g, bool working) const {
        A = std::clamp(A, 0.0, p.A_max);
        if (working) return {-(p.k * g) * A / (p.K_m + A), 0.0};
        return {(p.k_r * g) * (p.A_max - A), 0.0};
    }
    // Bound on the Jacobian norm, used to detect stiff steps.
    double stiffness(double A, double /*B*/, double g, bool working) const {
        A = std::clamp(A, 0.0, p.A_max);
        const double d = p.K_m + A;
        return working ? p.k * g * p.K_m / (d * d) : p.k_r * g;
    }
};

struct TwoModel {
    const TwoResourceParams& p;
    double rho() const { return p.rho; }
    double upper_A() const { return 1.0; }
    double upper_B() const { return p.B_max; }
    Rates eval(double A, double B, double g, bool working) const {
        A = std::clamp(A, 0.0, 1.0);
        B = std::clamp(B, 0.0, p.B_max);
        const double consumption = (p.k_w * g) * A / (p.K_A + A);
        if (working) {
            const double conversion = (p.k_b * g) * (1.0 - A) * B / (p.K_B + B);
            return {-consumption + conversion, -conversion};
        }
        return {-consumption, (p.k_r * g) * (p.B_max - B)};
    }
    double stiffness(double A, double B, double g, bool working) const {
        A = std::clamp(A, 0.0, 1.0);
        B = std::clamp(B, 0.0, p.B_max);
        const double dA = p.K_A + A, dB = p.K_B + B;
        const double consumption = p.k_w * g * p.K_A / (dA * dA);
        if (!working) return consumption + p.k_r * g;
        return consumption + p.k_b * g * (B / dB + (1.0 - A) * p.K_B / (dB * dB) + 1.0);
    }
};

template <class Model>
struct Stepper {
    const Model& model;
    bool working;
    const StepObserver* observer;
    double tolerance;

    double factor(double t) const { return time_factor(t, model.rho()); }

    bool in_box(double A, double B) const {
        return A >= 0.0 && A <= model.upper_A() && B >= 0.0 && B <= model.upper_B();
    }

    // g0, gm, g1: time factors at t, t + h/2 and t + h.
    void rk4(double& A, double& B, double h, double g0, double gm, double g1) const {
        const Rates k1 = model.eval(A, B, g0, working);
        const Rates k2 = model.eval(A + 0.5 * h * k1.dA, B + 0.5 * h * k1.dB, gm, working);
        const Rates k3 = model.eval(A + 0.5 * h * k2.dA, B + 0.5 * h * k2.dB, gm, working);
        const Rates k4 = model.eval(A + h * k3.dA, B + h * k3.dB, g1, working);
        A += h / 6.0 * (k1.dA + 2.0 * k2.dA + 2.0 * k3.dA + k4.dA);
        B += h / 6.0 * (k1.dB + 2.0 * k2.dB + 2.0 * k3.dB + k4.dB);
    }

    // Step-doubling estimate of the local error of one step of size h.
    double local_error(const ResourceState& s, double A, double B, double h, double g0, double gm,
                       double g1) const {
        const double t = s.t_interval;
        double a = s.A, b = s.B;
        rk4(a, b, 0.5 * h, g0, factor(t + 0.25 * h), gm);
        a = std::clamp(a, 0.0, model.upper_A());
        b = std::clamp(b, 0.0, model.upper_B());
        rk4(a, b, 0.5 * h, gm, factor(t + 0.75 * h), g1);
        a = std::clamp(a, 0.0, model.upper_A());
        b = std::clamp(b, 0.0, model.upper_B());
        return std::max(std::fabs(a - std::clamp(A, 0.0, model.upper_A())),
                        std::fabs(b - std::clamp(B, 0.0, model.upper_B())));
    }

    // One step of size h, clamped into the invariant box. The step is halved
    // while the raw update leaves the box, or while a stiff step fails the
    // step-doubling error check. Stiffness is h times the Jacobian bound plus
    // the relative rate of change of the time factor, steep early in an interval.
    void advance(ResourceState& s, double h, double g0, double gm, double g1, int depth = 0) const {
        constexpr double kStiff = 0.1;
        double A = s.A, B = s.B;
        rk4(A, B, h, g0, gm, g1);
        bool split = !in_box(A, B);
        const double drift = model.rho() / (1.0 + s.t_interval);
        if (!split && h * (model.stiffness(s.A, s.B, g0, working) + drift) > kStiff) {
            split = local_error(s, A, B, h, g0, gm, g1) > tolerance * h;
        }
        if (split && depth < 24) {
            const double t = s.t_interval;
            advance(s, 0.5 * h, g0, factor(t + 0.25 * h), gm, depth + 1);
            advance(s, 0.5 * h, gm, factor(t + 0.75 * h), g1, depth + 1);
            return;
        }
        const ResourceState before = s;
        s.A = std::clamp(A, 0.0, model.upper_A());
        s.B = std::clamp(B, 0.0, model.upper_B());
        s.t_interval += h;
        if (!std::isfinite(s.A) || !std::isfinite(s.B)) {
            std::ostringstream msg;
            msg << "non-finite resource state after step h=" << h << " at t_interval=" << before.t_interval
                << " from A=" << before.A << " B=" << before.B;
            throw NumericalError(msg.str());
        }
        if (observer) (*observer)(before, s);
    }
};

template <class Model>
ResourceState run(const Model& model, ResourceState state, double duration, bool working,
                  const IntegratorOptions& options, const StepObserver* observer) {
    const double h_nominal = std::min(options.max_step, duration / options.steps_per_interval);
    const auto steps = static_cast<long long>(std::ceil(duration / h_nominal - 1e-9));
    const double h = duration / static_cast<double>(std::max(1LL, steps));
    Stepper<Model> stepper{model, working, observer, options.local_tolerance};
    const double t0 = state.t_interval;
    double g0 = stepper.factor(t0);
    for (long long i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        if (!working) {
            const Rates r = model.eval(state.A, state.B, g0, false);
            const double remaining = duration - static_cast<double>(i) * h;
            if (std::max(std::fabs(r.dA), std::fabs(r.dB)) * remaining < options.rest_convergence) {
                state.t_interval = t0 + duration;
                return state;
            }
        }
        const double g1 = stepper.factor(t + h);
        stepper.advance(state, h, g0, stepper.factor(t + 0.5 * h), g1);
        g0 = g1;
    }
    state.t_interval = t0 + duration;  // no accumulated rounding
    return state;
}

}  // namespace

double rate_one(const ResourceState& state, bool working, const OneResourceParams& p) {
    return OneModel{p}.eval(state.A, 0.0, time_factor(state.t_interval, p.rho), working).dA;
}

Rates rate_two(const ResourceState& state, bool working, const TwoResourceParams& p) {
    return TwoModel{p}.eval(state.A, state.B, time_factor(state.t_interval, p.rho), working);
}

ResourceState initial_state(const KineticParams& params) {
    if (const auto* one = std::get_if<OneResourceParams>(&params)) {
        return ResourceState{one->A_max, 0.0, 0.0, Phase::rest};
    }
    const auto& two = std::get<TwoResourceParams>(params);
    return ResourceState{0.0, two.B_max, 0.0, Phase::rest};
}

ResourceState integrate_interval(ResourceState state, double duration_seconds, bool working,
                                 const KineticParams& params, const IntegratorOptions& options,
                                 const StepObserver* observer) {
    if (!(duration_seconds > 0.0)) return state;
    if (working || state.phase == Phase::work) state.t_interval = 0.0;
    state.phase = working ? Phase::work : Phase::rest;
    if (const auto* one = std::get_if<OneResourceParams>(&params)) {
        return run(OneModel{*one}, state, duration_seconds, working, options, observer);
    }
    return run(TwoModel{std::get<TwoResourceParams>(params)}, state, duration_seconds, working, options, observer);
}

ResourceTrajectory trajectory(const Timeline& timeline, const TrackParams& params,
                              const IntegratorOptions& options, std::size_t max_attempts) {
    ResourceTrajectory out;
    const std::size_t n = std::min(max_attempts, timeline.attempts.size());
    out.entries.resize(n);
    std::array<ResourceState, 2> states{};
    for (std::size_t s = 0; s < 2; ++s) {
        if (params[s]) states[s] = initial_state(*params[s]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& attempt = timeline.attempts[i];
        const auto slot = track_slot(attempt.track);
        auto& entry = out.entries[i];
        entry.track = attempt.track;
        const auto work = static_cast<double>(attempt.duration);
        for (std::size_t s = 0; s < 2; ++s) {
            if (!params[s]) continue;
            if (slot && *slot == s) {
                entry.valid = true;
                entry.A_start = states[s].A;
                entry.B_start = states[s].B;
                states[s] = integrate_interval(states[s], work, true, *params[s], options);
                entry.A_end = states[s].A;
                entry.B_end = states[s].B;
            } else {
                states[s] = integrate_interval(states[s], work, false, *params[s], options);
            }
        }
        if (attempt.gap_after && i + 1 < n) {
            const auto gap = static_cast<double>(*attempt.gap_after);
            for (std::size_t s = 0; s < 2; ++s) {
                if (params[s]) states[s] = integrate_interval(states[s], gap, false, *params[s], options);
            }
        }
    }
    return out;
}

}  // namespace cogdep
