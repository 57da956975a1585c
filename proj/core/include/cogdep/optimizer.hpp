#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cogdep {

struct OptimizerOptions {
    std::vector<double> lower;
    std::vector<double> upper;
    int max_evals = 500;
    double rel_tol = 1e-4;
    // Initial simplex edge in natural-log units of each parameter.
    double initial_step = 2.0;
    // Fresh simplices built around the incumbent after convergence; stops
    // early once a restart gains less than rel_tol. Each restart scales the
    // edge by restart_step_factor, down to min_restart_step.
    int max_restarts = 5;
    double restart_step_factor = 0.5;
    double min_restart_step = 0.25;
};

struct TracePoint {
    int eval = 0;
    double value = 0.0;
    double best = 0.0;
    std::vector<double> x;
};

struct OptimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
    bool budget_exhausted = false;
    std::vector<TracePoint> trace;
};

// Derivative-free maximization of f over the box [lower, upper] (all bounds
// strictly positive). Nelder-Mead simplex search on log-parameters; every
// trial point is projected into the box before evaluation, so f is never
// called outside it. The first evaluation is x0 (clamped).
OptimizeResult maximize_bounded(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                const OptimizerOptions& options);

}  // namespace cogdep
