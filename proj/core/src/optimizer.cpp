#include "cogdep/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cogdep/error.hpp"

namespace cogdep {

namespace {

struct Vertex {
    std::vector<double> u;  // log-parameters
    double cost = 0.0;      // negated objective
};

}  // namespace

OptimizeResult maximize_bounded(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                const OptimizerOptions& options) {
    const std::size_t dim = x0.size();
    if (options.lower.size() != dim || options.upper.size() != dim) {
        throw PreconditionError("maximize_bounded: bounds do not match the starting point");
    }
    std::vector<double> lo(dim), hi(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(options.lower[i] > 0.0 && options.lower[i] < options.upper[i])) {
            throw PreconditionError("maximize_bounded: need 0 < lower < upper");
        }
        lo[i] = std::log(options.lower[i]);
        hi[i] = std::log(options.upper[i]);
    }
    if (options.max_evals < 1) throw PreconditionError("maximize_bounded: max_evals must be >= 1");

    OptimizeResult result;
    result.value = -std::numeric_limits<double>::infinity();

    auto project = [&](std::vector<double> u) {
        for (std::size_t i = 0; i < dim; ++i) u[i] = std::clamp(u[i], lo[i], hi[i]);
        return u;
    };
    auto to_x = [&](const std::vector<double>& u) {
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] = std::clamp(std::exp(u[i]), options.lower[i], options.upper[i]);
        }
        return x;
    };
    auto evaluate_at = [&](const std::vector<double>& x) {
        double v = f(x);
        if (!std::isfinite(v)) v = -std::numeric_limits<double>::max();
        ++result.evals;
        if (v > result.value) {
            result.value = v;
            result.x = x;
        }
        result.trace.push_back(TracePoint{result.evals, v, result.value, x});
        return -v;
    };
    auto evaluate = [&](const std::vector<double>& u) { return evaluate_at(to_x(u)); };
    auto budget_left = [&] { return result.evals < options.max_evals; };

    for (std::size_t i = 0; i < dim; ++i) x0[i] = std::clamp(x0[i], options.lower[i], options.upper[i]);
    const std::vector<double> u0 = project([&] {
        std::vector<double> u(dim);
        for (std::size_t i = 0; i < dim; ++i) u[i] = std::log(x0[i]);
        return u;
    }());

    auto sort_simplex = [](std::vector<Vertex>& simplex) {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.cost < b.cost; });
    };
    auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> u(dim);
        for (std::size_t i = 0; i < dim; ++i) u[i] = a[i] + t * (b[i] - a[i]);
        return project(u);
    };

    // One Nelder-Mead descent from a fresh axis-aligned simplex around u.
    // Returns true on convergence, false when the budget ran out.
    auto descend = [&](const std::vector<double>& start, double start_cost, double step) {
        std::vector<Vertex> simplex{Vertex{start, start_cost}};
        for (std::size_t i = 0; i < dim && budget_left(); ++i) {
            auto u = start;
            u[i] += step;
            if (u[i] > hi[i]) u[i] = start[i] - step;
            u = project(u);
            simplex.push_back(Vertex{u, evaluate(u)});
        }
        if (simplex.size() < dim + 1) return false;
        while (true) {
            sort_simplex(simplex);
            const double best = simplex.front().cost;
            const double worst = simplex.back().cost;
            double diameter = 0.0;
            for (std::size_t v = 1; v < simplex.size(); ++v) {
                for (std::size_t i = 0; i < dim; ++i) {
                    diameter = std::max(diameter, std::fabs(simplex[v].u[i] - simplex[0].u[i]));
                }
            }
            const double spread = worst - best;
            if ((spread <= options.rel_tol * std::fabs(best) + 1e-12 && diameter <= 1e-3) || diameter <= 1e-7) {
                return true;
            }
            if (!budget_left()) return false;

            std::vector<double> centroid(dim, 0.0);
            for (std::size_t v = 0; v + 1 < simplex.size(); ++v) {
                for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].u[i];
            }
            for (auto& c : centroid) c /= static_cast<double>(dim);

            Vertex& worst_v = simplex.back();
            const auto reflected = combine(centroid, worst_v.u, -1.0);
            const double fr = evaluate(reflected);
            if (fr < simplex.front().cost) {
                if (!budget_left()) {
                    worst_v = Vertex{reflected, fr};
                    continue;
                }
                const auto expanded = combine(centroid, worst_v.u, -2.0);
                const double fe = evaluate(expanded);
                worst_v = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
                continue;
            }
            if (fr < simplex[simplex.size() - 2].cost) {
                worst_v = Vertex{reflected, fr};
                continue;
            }
            if (!budget_left()) continue;
            const bool outside = fr < worst_v.cost;
            const auto contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, worst_v.u, 0.5);
            const double fc = evaluate(contracted);
            if (fc < std::min(fr, worst_v.cost)) {
                worst_v = Vertex{contracted, fc};
                continue;
            }
            // Shrink toward the best vertex.
            for (std::size_t v = 1; v < simplex.size() && budget_left(); ++v) {
                simplex[v].u = combine(simplex[0].u, simplex[v].u, 0.5);
                simplex[v].cost = evaluate(simplex[v].u);
            }
        }
    };

    // A collapsed simplex on a noisy objective is often a false stop, so the
    // search restarts around the incumbent, each time with a smaller simplex,
    // until a restart stops paying off.
    auto to_u = [&](const std::vector<double>& x) {
        std::vector<double> u(dim);
        for (std::size_t i = 0; i < dim; ++i) u[i] = std::log(x[i]);
        return project(u);
    };
    const double first = evaluate_at(x0);
    double step = options.initial_step;
    bool done = descend(u0, first, step);
    for (int restart = 0; done && restart < options.max_restarts && budget_left(); ++restart) {
        const double before = result.value;
        step = std::max(options.min_restart_step, step * options.restart_step_factor);
        done = descend(to_u(result.x), -result.value, step);
        if (done && result.value - before <= options.rel_tol * std::fabs(before)) break;
    }
    result.converged = done;
    result.budget_exhausted = !done;
    return result;
}

}  // namespace cogdep
