#include "cogdep/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "cogdep/csv.hpp"
#include "cogdep/digest.hpp"
#include "cogdep/error.hpp"
#include "cogdep/metrics.hpp"
#include "cogdep/parallel.hpp"

namespace cogdep {

namespace {

std::size_t get_size(const KeyValueConfig& c, const std::string& key, std::size_t fallback) {
    const long long v = c.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw InputError("config: " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void SplitSpec::apply(const KeyValueConfig& c) {
    train_min_attempts = get_size(c, "split.train_min_attempts", train_min_attempts);
    max_train_users = get_size(c, "split.max_train_users", max_train_users);
    train_first_attempt = get_size(c, "split.train_first_attempt", train_first_attempt);
    train_end_attempt = get_size(c, "split.train_end_attempt", train_end_attempt);
    test_min_attempts = get_size(c, "split.test_min_attempts", test_min_attempts);
    test_min_accuracy = c.get_double("split.test_min_accuracy", test_min_accuracy);
    min_train_users = get_size(c, "split.min_train_users", min_train_users);
}

void SplitSpec::store(KeyValueConfig& c) const {
    c.set("split.train_min_attempts", static_cast<long long>(train_min_attempts));
    c.set("split.max_train_users", static_cast<long long>(max_train_users));
    c.set("split.train_first_attempt", static_cast<long long>(train_first_attempt));
    c.set("split.train_end_attempt", static_cast<long long>(train_end_attempt));
    c.set("split.test_min_attempts", static_cast<long long>(test_min_attempts));
    c.set("split.test_min_accuracy", test_min_accuracy);
    c.set("split.min_train_users", static_cast<long long>(min_train_users));
}

Split split_train_test(std::span<const Timeline> timelines, const SplitSpec& spec) {
    Split split;
    std::vector<bool> in_train(timelines.size(), false);
    for (std::size_t u = 0; u < timelines.size() && split.train.size() < spec.max_train_users; ++u) {
        if (timelines[u].attempts.size() >= spec.train_min_attempts) {
            split.train.push_back(u);
            in_train[u] = true;
        }
    }
    if (split.train.size() < spec.min_train_users) {
        throw PreconditionError("split: " + std::to_string(split.train.size()) + " users have at least " +
                                std::to_string(spec.train_min_attempts) + " attempts; " +
                                std::to_string(spec.min_train_users) + " are required");
    }
    for (std::size_t u = 0; u < timelines.size(); ++u) {
        const auto& a = timelines[u].attempts;
        if (in_train[u] || a.size() < spec.test_min_attempts || a.empty()) continue;
        const auto correct = std::count_if(a.begin(), a.end(), [](const Attempt& x) { return x.correct(); });
        if (static_cast<double>(correct) >= spec.test_min_accuracy * static_cast<double>(a.size())) {
            split.test.push_back(u);
        }
    }
    return split;
}

std::string split_hash(std::span<const Timeline> timelines, const Split& split) {
    std::string text = "train\n";
    for (auto u : split.train) text += timelines[u].user_id + "\n";
    text += "test\n";
    for (auto u : split.test) text += timelines[u].user_id + "\n";
    return sha256_hex(text);
}

UserPool make_pool(std::span<const Timeline> timelines, std::span<const std::size_t> members, const CorpusStats& corpus,
                   std::size_t first_attempt, std::size_t end_attempt) {
    UserPool pool;
    pool.first_attempt = first_attempt;
    pool.end_attempt = end_attempt;
    pool.timelines.reserve(members.size());
    for (auto u : members) {
        if (u >= timelines.size()) throw PreconditionError("make_pool: user index out of range");
        pool.timelines.push_back(&timelines[u]);
    }
    pool.profiles.resize(members.size());
    parallel_for(members.size(), [&](std::size_t i) { pool.profiles[i] = build_profile(*pool.timelines[i], corpus); });
    return pool;
}

std::vector<ResourceTrajectory> pool_trajectories(const UserPool& pool, const KineticParams& global,
                                                  const IntegratorOptions& options) {
    std::vector<ResourceTrajectory> out(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) {
        out[i] = trajectory(*pool.timelines[i], scaled_track_params(global, pool.profiles[i]), options,
                            pool.end_attempt);
    });
    return out;
}

ResourceSamples collect_resources(const UserPool& pool, std::span<const ResourceTrajectory> trajectories,
                                  ModelKind kind) {
    if (trajectories.size() != pool.size()) throw PreconditionError("collect_resources: trajectory count mismatch");
    const std::size_t cols = kind == ModelKind::two_resource ? 4 : 2;
    ResourceSamples s;
    std::vector<double> values;
    for (std::size_t u = 0; u < pool.size(); ++u) {
        const auto& entries = trajectories[u].entries;
        const std::size_t end = std::min(entries.size(), pool.end_attempt);
        for (std::size_t i = pool.first_attempt; i < end; ++i) {
            const auto& e = entries[i];
            if (!e.valid) continue;
            s.user.push_back(u);
            s.attempt.push_back(i);
            values.push_back(e.A_start);
            values.push_back(e.A_end);
            if (cols == 4) {
                values.push_back(e.B_start);
                values.push_back(e.B_end);
            }
        }
    }
    s.R = SampleMatrix(s.user.size(), cols);
    for (std::size_t r = 0; r < s.user.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) s.R(r, c) = values[r * cols + c];
    }
    return s;
}

double objective(const KineticParams& global, const UserPool& pool, const MIOptions& mi,
                 const IntegratorOptions& integrator) {
    std::vector<ResourceTrajectory> traj;
    try {
        traj = pool_trajectories(pool, global, integrator);
    } catch (const NumericalError&) {
        return kObjectivePenalty;
    }
    const auto samples = collect_resources(pool, traj, model_kind(global));
    for (double v : samples.R.data()) {
        if (!std::isfinite(v)) return kObjectivePenalty;
    }
    std::vector<double> outcome(samples.user.size());
    for (std::size_t r = 0; r < outcome.size(); ++r) {
        outcome[r] = pool.timelines[samples.user[r]]->attempts[samples.attempt[r]].correct() ? 1.0 : 0.0;
    }
    const double value = mutual_information(SampleMatrix::column_vector(outcome), samples.R, mi).value;
    return std::isfinite(value) ? value : kObjectivePenalty;
}

void FitConfig::apply(const KeyValueConfig& c) {
    if (auto m = c.get("model")) {
        auto k = parse_model_kind(*m);
        if (!k) throw InputError("config: unknown model '" + *m + "'");
        kind = *k;
    }
    lower = c.get_double("fit.lower", lower);
    upper = c.get_double("fit.upper", upper);
    max_evals = static_cast<int>(c.get_int("fit.max_evals", max_evals));
    rel_tol = c.get_double("fit.rel_tol", rel_tol);
    n_shuffles = static_cast<int>(c.get_int("fit.n_shuffles", n_shuffles));
    seed = static_cast<std::uint64_t>(c.get_int("seed", static_cast<long long>(seed)));
    if (!(lower > 0.0 && lower < upper)) throw InputError("config: fit bounds need 0 < lower < upper");
    if (max_evals < 1) throw InputError("config: fit.max_evals must be at least 1");
}

void FitConfig::store(KeyValueConfig& c) const {
    c.set("model", std::string(to_string(kind)));
    c.set("fit.lower", lower);
    c.set("fit.upper", upper);
    c.set("fit.max_evals", static_cast<long long>(max_evals));
    c.set("fit.rel_tol", rel_tol);
    c.set("fit.n_shuffles", static_cast<long long>(n_shuffles));
    c.set("seed", static_cast<long long>(seed));
}

std::vector<std::string> free_parameter_names(ModelKind kind) {
    if (kind == ModelKind::one_resource) return {"k", "k_r", "rho", "K_m"};
    return {"k_w", "k_b", "k_r", "B_max", "rho"};
}

std::vector<double> free_parameters(const KineticParams& params) {
    if (const auto* p = std::get_if<OneResourceParams>(&params)) return {p->k, p->k_r, p->rho, p->K_m};
    const auto& p = std::get<TwoResourceParams>(params);
    return {p.k_w, p.k_b, p.k_r, p.B_max, p.rho};
}

KineticParams with_free_parameters(const KineticParams& base, std::span<const double> v) {
    if (const auto* p = std::get_if<OneResourceParams>(&base)) {
        if (v.size() != 4) throw PreconditionError("one-resource model has 4 free parameters");
        OneResourceParams q = *p;
        q.k = v[0];
        q.k_r = v[1];
        q.rho = v[2];
        q.K_m = v[3];
        return q;
    }
    if (v.size() != 5) throw PreconditionError("two-resource model has 5 free parameters");
    TwoResourceParams q = std::get<TwoResourceParams>(base);
    q.k_w = v[0];
    q.k_b = v[1];
    q.k_r = v[2];
    q.B_max = v[3];
    q.rho = v[4];
    return q;
}

FitResult fit(const FitConfig& config, const UserPool& train) {
    if (train.size() == 0) throw PreconditionError("fit: empty training set");
    KineticParams start = config.start ? *config.start
                          : config.kind == ModelKind::one_resource ? KineticParams(OneResourceParams::fitted())
                                                                   : KineticParams(TwoResourceParams::fitted());
    if (model_kind(start) != config.kind) throw PreconditionError("fit: start point does not match model kind");

    auto x0 = free_parameters(start);
    OptimizerOptions opt;
    opt.lower.assign(x0.size(), config.lower);
    opt.upper.assign(x0.size(), config.upper);
    opt.max_evals = config.max_evals;
    opt.rel_tol = config.rel_tol;
    // The starting point must lie inside the box; bound midpoints otherwise.
    for (double& x : x0) {
        if (!(x >= config.lower && x <= config.upper)) x = 0.5 * (config.lower + config.upper);
    }

    MIOptions mi;
    mi.seed = config.seed;
    mi.n_shuffles = config.n_shuffles;
    auto f = [&](std::span<const double> x) { return objective(with_free_parameters(start, x), train, mi); };
    const OptimizeResult r = maximize_bounded(f, x0, opt);

    FitResult result;
    result.kind = config.kind;
    result.params = with_free_parameters(start, r.x);
    result.train_mi = r.value;
    result.evals = r.evals;
    result.converged = r.converged;
    result.budget_exhausted = r.budget_exhausted;
    result.seed = config.seed;
    result.trace = r.trace;
    const auto traj = pool_trajectories(train, result.params);
    result.train_samples = collect_resources(train, traj, config.kind).user.size();
    return result;
}

double entropy_fraction(double bits, double entropy) { return entropy > 0.0 ? bits / entropy : kNaN; }

namespace {

std::vector<double> shuffled(std::vector<double> v, std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xc0u};
    std::mt19937_64 engine(seq);
    std::shuffle(v.begin(), v.end(), engine);
    return v;
}

SampleMatrix select_rows(const SampleMatrix& m, std::span<const std::size_t> rows, std::size_t cols) {
    SampleMatrix out(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) out(r, c) = m(rows[r], c);
    }
    return out;
}

ReportRow mi_row(std::string name, const std::vector<double>& target, const SampleMatrix& R, bool binary,
                 const MIOptions& mi) {
    ReportRow row;
    row.name = std::move(name);
    row.n = target.size();
    if (row.n < 10 * (R.cols() + 1)) {
        row.bits = row.dispersion = row.entropy = row.fraction = row.control = kNaN;
        return row;
    }
    const auto est = mutual_information(SampleMatrix::column_vector(target), R, mi);
    row.bits = est.value;
    row.dispersion = est.dispersion;
    row.entropy = binary ? binary_entropy(stats::mean(target)) : discrete_entropy(target);
    row.fraction = entropy_fraction(row.bits, row.entropy);
    row.control = mutual_information(SampleMatrix::column_vector(shuffled(target, mi.seed)), R, mi).value;
    return row;
}

ConditionalRow cmi_row(std::string name, const std::vector<double>& target, const SampleMatrix& R,
                       const SampleMatrix& Z, const MIOptions& mi) {
    ConditionalRow row;
    row.name = std::move(name);
    row.n = target.size();
    if (row.n < 10 * (1 + R.cols() + Z.cols())) {
        row.bits = row.dispersion = kNaN;
        return row;
    }
    const auto est = conditional_mi(SampleMatrix::column_vector(target), R, Z, mi);
    row.bits = est.value;
    row.dispersion = est.dispersion;
    return row;
}

// Everything evaluate and cmi_report need, gathered in one pass.
struct EvalPool {
    ModelKind kind = ModelKind::two_resource;
    ResourceSamples attempts;              // all modeled attempts
    std::vector<std::size_t> learn_rows;   // rows of `attempts` that are first exposures
    std::vector<double> learned;
    std::vector<std::size_t> gap_rows;     // rows with an observed following gap
};

EvalPool gather(const KineticParams& global, const UserPool& test) {
    EvalPool p;
    p.kind = model_kind(global);
    const auto traj = pool_trajectories(test, global);
    p.attempts = collect_resources(test, traj, p.kind);
    // Map (user, attempt) to row for the learning lookups.
    std::vector<std::unordered_map<std::size_t, std::size_t>> row_of(test.size());
    for (std::size_t r = 0; r < p.attempts.user.size(); ++r) row_of[p.attempts.user[r]][p.attempts.attempt[r]] = r;
    for (std::size_t u = 0; u < test.size(); ++u) {
        for (const auto& s : learning_outcomes(*test.timelines[u])) {
            auto it = row_of[u].find(s.first);
            if (it == row_of[u].end()) continue;
            p.learn_rows.push_back(it->second);
            p.learned.push_back(s.learned ? 1.0 : 0.0);
        }
    }
    for (std::size_t r = 0; r < p.attempts.user.size(); ++r) {
        if (test.timelines[p.attempts.user[r]]->attempts[p.attempts.attempt[r]].gap_after) p.gap_rows.push_back(r);
    }
    return p;
}

const Attempt& attempt_at(const UserPool& test, const ResourceSamples& s, std::size_t row) {
    return test.timelines[s.user[row]]->attempts[s.attempt[row]];
}

MIOptions mi_options(const EvalOptions& o) {
    MIOptions mi;
    mi.seed = o.seed;
    mi.n_shuffles = o.n_shuffles;
    return mi;
}

}  // namespace

std::vector<ReportRow> evaluate(const KineticParams& global, const UserPool& test, const EvalOptions& options) {
    const EvalPool p = gather(global, test);
    const auto mi = mi_options(options);
    const auto& s = p.attempts;
    const std::size_t cols = s.R.cols();
    const std::size_t n = s.user.size();

    std::vector<double> correct(n), duration(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& a = attempt_at(test, s, r);
        correct[r] = a.correct() ? 1.0 : 0.0;
        duration[r] = static_cast<double>(a.duration);
    }
    // R_b: the start-of-question columns.
    SampleMatrix Rb(n, cols / 2);
    for (std::size_t r = 0; r < n; ++r) {
        Rb(r, 0) = s.R(r, 0);
        if (cols == 4) Rb(r, 1) = s.R(r, 2);
    }
    std::vector<double> gaps;
    gaps.reserve(p.gap_rows.size());
    for (auto r : p.gap_rows) gaps.push_back(static_cast<double>(*attempt_at(test, s, r).gap_after));

    std::vector<ReportRow> rows;
    rows.push_back(mi_row("MI(A;R)", correct, s.R, true, mi));
    rows.push_back(mi_row("MI(L;R)", p.learned, select_rows(s.R, p.learn_rows, cols), true, mi));
    rows.push_back(mi_row("MI(T;R_b)", duration, Rb, false, mi));
    rows.push_back(mi_row("MI(dT;R)", gaps, select_rows(s.R, p.gap_rows, cols), false, mi));
    return rows;
}

std::optional<double> recent_accuracy(const Timeline& timeline, std::size_t index, std::size_t window) {
    if (index >= timeline.attempts.size() || window == 0) return std::nullopt;
    const Track track = timeline.attempts[index].track;
    std::size_t seen = 0, correct = 0;
    for (std::size_t j = index; j-- > 0 && seen < window;) {
        const auto& a = timeline.attempts[j];
        if (a.track != track) continue;
        ++seen;
        if (a.correct()) ++correct;
    }
    if (seen < window) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(window);
}

std::vector<ConditionalRow> cmi_report(const KineticParams& global, const UserPool& test,
                                       std::span<const Timeline> corpus_timelines, const EvalOptions& options) {
    const EvalPool p = gather(global, test);
    const auto mi = mi_options(options);
    const auto& s = p.attempts;
    const std::size_t cols = s.R.cols();
    const std::size_t n = s.user.size();

    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> q_counts;
    for (const auto& t : corpus_timelines) {
        for (const auto& a : t.attempts) {
            auto& c = q_counts[a.question_id];
            ++c.second;
            if (a.correct()) ++c.first;
        }
    }

    std::vector<double> correct(n), duration(n), difficulty(n), longest(n), speed(n);
    std::vector<std::optional<double>> u5(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& tl = *test.timelines[s.user[r]];
        const auto& a = tl.attempts[s.attempt[r]];
        correct[r] = a.correct() ? 1.0 : 0.0;
        duration[r] = static_cast<double>(a.duration);
        const auto it = q_counts.find(a.question_id);
        difficulty[r] = it == q_counts.end() || it->second.second == 0
                            ? 0.0
                            : static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
        const auto& prof = test.profiles[s.user[r]].track(a.track);
        longest[r] = prof ? prof->longest_time : 0.0;
        speed[r] = prof ? prof->relative_speed : 0.0;
        u5[r] = recent_accuracy(tl, s.attempt[r]);
    }

    auto pick = [](const std::vector<double>& v, std::span<const std::size_t> rows) {
        std::vector<double> out;
        out.reserve(rows.size());
        for (auto r : rows) out.push_back(v[r]);
        return out;
    };

    std::vector<std::size_t> u5_rows;
    std::vector<double> u5_values;
    for (std::size_t r = 0; r < n; ++r) {
        if (u5[r]) {
            u5_rows.push_back(r);
            u5_values.push_back(*u5[r]);
        }
    }
    std::vector<std::size_t> gap_u5_rows;
    std::vector<double> gap_u5_values;
    for (auto r : p.gap_rows) {
        if (u5[r]) {
            gap_u5_rows.push_back(r);
            gap_u5_values.push_back(*u5[r]);
        }
    }
    std::vector<double> gaps(n, 0.0);
    for (auto r : p.gap_rows) gaps[r] = static_cast<double>(*attempt_at(test, s, r).gap_after);

    // Learning rows conditioned on the exposure's gap need that gap observed.
    std::vector<std::size_t> learn_gap_rows;
    std::vector<double> learn_gap_target, learn_gap_values;
    for (std::size_t i = 0; i < p.learn_rows.size(); ++i) {
        const auto r = p.learn_rows[i];
        if (!attempt_at(test, s, r).gap_after) continue;
        learn_gap_rows.push_back(r);
        learn_gap_target.push_back(p.learned[i]);
        learn_gap_values.push_back(gaps[r]);
    }

    std::vector<ConditionalRow> rows;
    rows.push_back(cmi_row("CMI(L;R|dT)", learn_gap_target, select_rows(s.R, learn_gap_rows, cols),
                           SampleMatrix::column_vector(learn_gap_values), mi));
    rows.push_back(cmi_row("CMI(L;R|T)", p.learned, select_rows(s.R, p.learn_rows, cols),
                           SampleMatrix::column_vector(pick(duration, p.learn_rows)), mi));
    rows.push_back(cmi_row("CMI(A;R|U5)", pick(correct, u5_rows), select_rows(s.R, u5_rows, cols),
                           SampleMatrix::column_vector(u5_values), mi));
    rows.push_back(cmi_row("CMI(A;R|P)", correct, s.R, SampleMatrix::from_columns({longest, speed}), mi));
    rows.push_back(cmi_row("CMI(A;R|T)", correct, s.R, SampleMatrix::column_vector(duration), mi));
    rows.push_back(cmi_row("CMI(A;R|D)", correct, s.R, SampleMatrix::column_vector(difficulty), mi));
    rows.push_back(cmi_row("CMI(dT;R|U5)", pick(gaps, gap_u5_rows), select_rows(s.R, gap_u5_rows, cols),
                           SampleMatrix::column_vector(gap_u5_values), mi));
    return rows;
}

void store_params(KeyValueConfig& out, const KineticParams& params) {
    out.set("model", std::string(to_string(model_kind(params))));
    if (const auto* p = std::get_if<OneResourceParams>(&params)) {
        out.set("param.k", p->k);
        out.set("param.k_r", p->k_r);
        out.set("param.rho", p->rho);
        out.set("param.K_m", p->K_m);
        out.set("param.A_max", p->A_max);
        return;
    }
    const auto& p = std::get<TwoResourceParams>(params);
    out.set("param.k_w", p.k_w);
    out.set("param.k_b", p.k_b);
    out.set("param.k_r", p.k_r);
    out.set("param.B_max", p.B_max);
    out.set("param.rho", p.rho);
    out.set("param.K_A", p.K_A);
    out.set("param.K_B", p.K_B);
}

KineticParams load_params(const KeyValueConfig& in) {
    const auto model = in.get("model");
    if (!model) throw InputError("params: missing 'model'");
    const auto kind = parse_model_kind(*model);
    if (!kind) throw InputError("params: unknown model '" + *model + "'");
    if (*kind == ModelKind::one_resource) {
        OneResourceParams p;
        p.k = in.get_double("param.k", p.k);
        p.k_r = in.get_double("param.k_r", p.k_r);
        p.rho = in.get_double("param.rho", p.rho);
        p.K_m = in.get_double("param.K_m", p.K_m);
        p.A_max = in.get_double("param.A_max", p.A_max);
        return p;
    }
    TwoResourceParams p;
    p.k_w = in.get_double("param.k_w", p.k_w);
    p.k_b = in.get_double("param.k_b", p.k_b);
    p.k_r = in.get_double("param.k_r", p.k_r);
    p.B_max = in.get_double("param.B_max", p.B_max);
    p.rho = in.get_double("param.rho", p.rho);
    p.K_A = in.get_double("param.K_A", p.K_A);
    p.K_B = in.get_double("param.K_B", p.K_B);
    return p;
}

KeyValueConfig to_config(const FitResult& r) {
    KeyValueConfig c;
    store_params(c, r.params);
    c.set("fit.train_mi", r.train_mi);
    c.set("fit.train_samples", static_cast<long long>(r.train_samples));
    c.set("fit.evals", static_cast<long long>(r.evals));
    c.set("fit.converged", std::string(r.converged ? "true" : "false"));
    c.set("fit.budget_exhausted", std::string(r.budget_exhausted ? "true" : "false"));
    c.set("fit.warning", std::string(r.budget_exhausted ? "evaluation budget exhausted; best-so-far returned" : "none"));
    c.set("seed", static_cast<long long>(r.seed));
    if (!r.split_digest.empty()) c.set("split_hash", r.split_digest);
    return c;
}

void write_trace_csv(std::ostream& out, const FitResult& result) {
    std::vector<std::string> header{"eval", "value", "best"};
    for (auto& n : free_parameter_names(result.kind)) header.push_back(n);
    csv::write_row(out, header);
    for (const auto& t : result.trace) {
        std::vector<std::string> row{std::to_string(t.eval), csv::format_double(t.value), csv::format_double(t.best)};
        for (double x : t.x) row.push_back(csv::format_double(x));
        csv::write_row(out, row);
    }
}

void write_table1_csv(std::ostream& out, std::span<const ReportRow> rows) {
    out << "row,n,bits,dispersion,entropy_bits,percent_entropy,control_bits\n";
    for (const auto& r : rows) {
        csv::write_row(out, {r.name, std::to_string(r.n), csv::format_double(r.bits), csv::format_double(r.dispersion),
                             csv::format_double(r.entropy), csv::format_double(100.0 * r.fraction),
                             csv::format_double(r.control)});
    }
}

void write_table2_csv(std::ostream& out, std::span<const ConditionalRow> rows) {
    out << "row,n,bits,dispersion\n";
    for (const auto& r : rows) {
        csv::write_row(out, {r.name, std::to_string(r.n), csv::format_double(r.bits), csv::format_double(r.dispersion)});
    }
}

void write_trajectories_csv(std::ostream& out, std::span<const Timeline> timelines,
                            std::span<const ResourceTrajectory> trajectories) {
    if (timelines.size() != trajectories.size()) throw PreconditionError("write_trajectories: size mismatch");
    out << "user_id,attempt,track,valid,A_start,A_end,B_start,B_end\n";
    for (std::size_t u = 0; u < timelines.size(); ++u) {
        const auto& entries = trajectories[u].entries;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            csv::write_row(out, {timelines[u].user_id, std::to_string(i), std::string(to_string(e.track)),
                                 e.valid ? "1" : "0", csv::format_double(e.A_start), csv::format_double(e.A_end),
                                 csv::format_double(e.B_start), csv::format_double(e.B_end)});
        }
    }
}

std::vector<ResourceTrajectory> read_trajectories_csv(std::istream& in, std::span<const Timeline> timelines) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t u = 0; u < timelines.size(); ++u) index.emplace(timelines[u].user_id, u);
    std::vector<ResourceTrajectory> out(timelines.size());
    csv::Reader reader(in);
    std::vector<std::string> f;
    if (!reader.next(f) || f.size() < 8 || f[0] != "user_id") throw DataQualityError("trajectory file: bad header");
    while (reader.next(f)) {
        const auto where = " at line " + std::to_string(reader.line_number());
        if (f.size() < 8) throw DataQualityError("trajectory file: short row" + where);
        const auto it = index.find(f[0]);
        if (it == index.end()) throw DataQualityError("trajectory file: unknown user " + f[0] + where);
        auto& entries = out[it->second].entries;
        const auto attempt = csv::parse_int(f[1]);
        const auto track = parse_track(f[2]);
        if (!attempt || !track || static_cast<std::size_t>(*attempt) != entries.size()) {
            throw DataQualityError("trajectory file: out-of-order row" + where);
        }
        ResourceEntry e;
        e.track = *track;
        e.valid = f[3] == "1";
        const auto a0 = csv::parse_double(f[4]), a1 = csv::parse_double(f[5]);
        const auto b0 = csv::parse_double(f[6]), b1 = csv::parse_double(f[7]);
        if (!a0 || !a1 || !b0 || !b1) throw DataQualityError("trajectory file: bad number" + where);
        e.A_start = *a0;
        e.A_end = *a1;
        e.B_start = *b0;
        e.B_end = *b1;
        entries.push_back(e);
    }
    for (std::size_t u = 0; u < timelines.size(); ++u) {
        if (out[u].entries.size() > timelines[u].attempts.size()) {
            throw DataQualityError("trajectory file: more entries than attempts for " + timelines[u].user_id);
        }
    }
    return out;
}

}  // namespace cogdep
