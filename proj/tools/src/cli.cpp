#include "cogdep_cli/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cogdep/config.hpp"
#include "cogdep/csv.hpp"
#include "cogdep/digest.hpp"
#include "cogdep/error.hpp"
#include "cogdep/fitting.hpp"
#include "cogdep/infotheory.hpp"
#include "cogdep/ingest.hpp"
#include "cogdep/metrics.hpp"
#include "cogdep/parallel.hpp"
#include "cogdep/profiles.hpp"
#include "cogdep/stats.hpp"
#include "cogdep/synth.hpp"

namespace fs = std::filesystem;

namespace cogdep::cli {

namespace {

struct Common {
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string config_path;
};

// Values given on the command line; unset ones fall back to the config file.
struct Overrides {
    std::optional<long long> min_attempts;
    std::optional<long long> break_seconds;
    std::optional<long long> train_min_attempts;
    std::optional<long long> max_train_users;
    std::optional<long long> min_train_users;
    std::optional<long long> test_min_attempts;
    std::optional<double> test_min_accuracy;
    std::optional<std::string> model;
    std::optional<long long> max_evals;
    std::optional<long long> n_shuffles;
};

struct Paths {
    std::string input;
    std::string attempts;
    std::string output;
    std::string out_dir;
    std::string params;
    std::string trajectory;
};

struct SimArgs {
    std::string preset = "depleting";
    std::optional<long long> users, questions, heavy_users, heavy_questions;
    std::optional<double> beta0, beta1, learning_beta, difficulty_sd;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    return in;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

KeyValueConfig effective_config(const Common& common, const Overrides& o) {
    KeyValueConfig c;
    if (!common.config_path.empty()) c = KeyValueConfig::load(common.config_path);
    c.set("seed", static_cast<long long>(common.seed));
    if (o.min_attempts) c.set("min_attempts", *o.min_attempts);
    if (o.break_seconds) c.set("break_seconds", *o.break_seconds);
    if (o.train_min_attempts) c.set("split.train_min_attempts", *o.train_min_attempts);
    if (o.max_train_users) c.set("split.max_train_users", *o.max_train_users);
    if (o.min_train_users) c.set("split.min_train_users", *o.min_train_users);
    if (o.test_min_attempts) c.set("split.test_min_attempts", *o.test_min_attempts);
    if (o.test_min_accuracy) c.set("split.test_min_accuracy", *o.test_min_accuracy);
    if (o.model) c.set("model", *o.model);
    if (o.max_evals) c.set("fit.max_evals", *o.max_evals);
    if (o.n_shuffles) c.set("fit.n_shuffles", *o.n_shuffles);
    return c;
}

IngestOptions ingest_options(const KeyValueConfig& c) {
    IngestOptions o;
    const long long min_attempts = c.get_int("min_attempts", static_cast<long long>(o.min_attempts));
    const long long gap = c.get_int("break_seconds", o.break_threshold_seconds);
    if (min_attempts < 0 || gap <= 0) throw InputError("min_attempts must be >= 0 and break_seconds > 0");
    o.min_attempts = static_cast<std::size_t>(min_attempts);
    o.break_threshold_seconds = gap;
    return o;
}

// Records what produced a set of outputs: command, config, seed, input
// digests and version. No timestamps, so equal manifests mean equal runs.
void write_manifest(const fs::path& path, const std::string& command, const KeyValueConfig& config,
                    const std::vector<std::pair<std::string, std::string>>& inputs) {
    KeyValueConfig m;
    m.set("command", command);
    m.set("version", std::string(COGDEP_VERSION));
    for (const auto& [key, value] : config.entries()) m.set("config." + key, value);
    for (const auto& [name, file] : inputs) {
        m.set("input." + name + ".path", file);
        m.set("input." + name + ".sha256", sha256_file_hex(file));
    }
    auto out = open_output(path);
    m.write(out);
}

std::vector<Timeline> load_attempts(const std::string& path, const KeyValueConfig& config) {
    auto in = open_input(path);
    return read_attempt_table(in, ingest_options(config).break_threshold_seconds);
}

int cmd_ingest(const Paths& p, const KeyValueConfig& config, std::ostream& out) {
    auto in = open_input(p.input);
    auto parsed = parse_records(in);
    Corpus corpus = build_corpus(std::move(parsed.records), ingest_options(config));
    corpus.stats.malformed_rows = parsed.skipped;
    corpus.stats.rows = parsed.rows;
    {
        auto o = open_output(p.output);
        write_attempt_table(o, corpus.timelines);
    }
    const auto& s = corpus.stats;
    out << "rows=" << s.rows << " malformed=" << s.malformed_rows << " duplicates=" << s.duplicates
        << " negative_durations=" << s.negative_durations << " unterminated=" << s.unterminated << "\n";
    out << "users=" << s.users << " attempts=" << s.attempts << " questions=" << s.questions << "\n";
    write_manifest(p.output + ".manifest", "ingest", config, {{"raw", p.input}});
    return kExitOk;
}

std::optional<KineticParams> params_from(const Paths& p, const KeyValueConfig& config) {
    if (!p.params.empty()) return load_params(KeyValueConfig::load(p.params));
    if (auto m = config.get("model")) {
        const auto kind = parse_model_kind(*m);
        if (!kind) throw InputError("unknown model '" + *m + "'");
        return *kind == ModelKind::one_resource ? KineticParams(OneResourceParams::fitted())
                                                : KineticParams(TwoResourceParams::fitted());
    }
    return std::nullopt;
}

int cmd_profile(const Paths& p, const KeyValueConfig& config, std::ostream& out) {
    const auto timelines = load_attempts(p.attempts, config);
    const auto stats = build_corpus_stats(timelines);
    const auto profiles = build_profiles(timelines, stats);
    const auto params = params_from(p, config).value_or(TwoResourceParams::fitted());
    {
        auto o = open_output(p.output);
        write_profiles(o, profiles, anomalous_exponent(params));
    }
    out << "profiles=" << profiles.size() << "\n";
    std::vector<std::pair<std::string, std::string>> inputs{{"attempts", p.attempts}};
    if (!p.params.empty()) inputs.emplace_back("params", p.params);
    write_manifest(p.output + ".manifest", "profile", config, inputs);
    return kExitOk;
}

SynthConfig synth_config(const SimArgs& a, const KeyValueConfig& config) {
    SynthConfig c;
    if (a.preset == "depleting") c = SynthConfig::depleting();
    else if (a.preset == "frozen") c = SynthConfig::frozen();
    else throw InputError("unknown preset '" + a.preset + "'");
    auto count = [](std::optional<long long> v, std::size_t fallback) {
        if (!v) return fallback;
        if (*v < 0) throw InputError("counts must be non-negative");
        return static_cast<std::size_t>(*v);
    };
    c.n_users = count(a.users, c.n_users);
    c.questions_per_user = count(a.questions, c.questions_per_user);
    c.heavy_users = count(a.heavy_users, c.heavy_users);
    c.heavy_questions = count(a.heavy_questions, c.heavy_questions);
    c.beta0 = a.beta0.value_or(c.beta0);
    c.beta1 = a.beta1.value_or(c.beta1);
    c.learning_beta = a.learning_beta.value_or(c.learning_beta);
    c.question_difficulty_sd = a.difficulty_sd.value_or(c.question_difficulty_sd);
    c.seed = static_cast<std::uint64_t>(config.get_int("seed", 0));
    return c;
}

int cmd_simulate(const Paths& p, const SimArgs& a, KeyValueConfig config, std::ostream& out) {
    const auto sc = synth_config(a, config);
    config.set("synth.preset", a.preset);
    config.set("synth.n_users", static_cast<long long>(sc.n_users));
    config.set("synth.questions_per_user", static_cast<long long>(sc.questions_per_user));
    config.set("synth.heavy_users", static_cast<long long>(sc.heavy_users));
    config.set("synth.heavy_questions", static_cast<long long>(sc.heavy_questions));
    config.set("synth.beta0", sc.beta0);
    config.set("synth.beta1", sc.beta1);
    config.set("synth.learning_beta", sc.learning_beta);
    config.set("synth.question_difficulty_sd", sc.question_difficulty_sd);
    const auto cohort = generate_cohort(sc);
    const fs::path dir(p.out_dir);
    {
        auto o = open_output(dir / "raw.csv");
        write_raw_records(o, cohort.records);
    }
    {
        auto o = open_output(dir / "truth.csv");
        write_truth(o, cohort.truth);
    }
    out << "users=" << sc.n_users << " attempts=" << cohort.records.size()
        << " oracle_mi=" << csv::format_double(oracle_mi(cohort)) << "\n";
    write_manifest(dir / "manifest.txt", "simulate", config, {});
    return kExitOk;
}

void write_reports(const fs::path& dir, const KineticParams& params, std::span<const Timeline> timelines,
                   const UserPool& test, const CorpusStats& stats, std::uint64_t seed, int n_shuffles,
                   std::ostream& out) {
    EvalOptions eo;
    eo.seed = seed;
    eo.n_shuffles = n_shuffles;
    const auto rows = evaluate(params, test, eo);
    const auto cond = cmi_report(params, test, timelines, eo);
    {
        auto o = open_output(dir / "table1.csv");
        write_table1_csv(o, rows);
    }
    {
        auto o = open_output(dir / "table2.csv");
        write_table2_csv(o, cond);
    }
    std::vector<std::size_t> everyone(timelines.size());
    std::iota(everyone.begin(), everyone.end(), 0);
    const auto all = make_pool(timelines, everyone, stats);
    {
        auto o = open_output(dir / "trajectory.csv");
        write_trajectories_csv(o, timelines, pool_trajectories(all, params));
    }
    for (const auto& r : rows) {
        std::ostringstream pct;
        pct.setf(std::ios::fixed);
        pct.precision(1);
        pct << 100.0 * r.fraction;
        out << r.name << " bits=" << csv::format_double(r.bits) << " dispersion=" << csv::format_double(r.dispersion)
            << " entropy=" << pct.str() << "% control=" << csv::format_double(r.control) << " n=" << r.n << "\n";
    }
}

int cmd_fit(const Paths& p, const KeyValueConfig& config, std::ostream& out, std::ostream& err) {
    const auto timelines = load_attempts(p.attempts, config);
    SplitSpec spec;
    spec.apply(config);
    FitConfig fc;
    fc.apply(config);
    const Split split = split_train_test(timelines, spec);
    if (split.test.empty()) throw PreconditionError("split: no users qualify for the test set");
    const auto stats = build_corpus_stats(timelines);
    const auto train = make_pool(timelines, split.train, stats, spec.train_first_attempt, spec.train_end_attempt);
    const auto test = make_pool(timelines, split.test, stats);

    FitResult result = fit(fc, train);
    result.split_digest = split_hash(timelines, split);
    if (result.budget_exhausted) err << "warning: evaluation budget exhausted; returning best-so-far parameters\n";

    const fs::path dir(p.out_dir);
    {
        auto c = to_config(result);
        c.set("split.train_users", static_cast<long long>(split.train.size()));
        c.set("split.test_users", static_cast<long long>(split.test.size()));
        auto o = open_output(dir / "params.txt");
        c.write(o);
    }
    {
        auto o = open_output(dir / "trace.csv");
        write_trace_csv(o, result);
    }
    out << "model=" << to_string(fc.kind) << " train_users=" << split.train.size()
        << " test_users=" << split.test.size() << " evals=" << result.evals
        << " train_mi=" << csv::format_double(result.train_mi) << "\n";
    write_reports(dir, result.params, timelines, test, stats, fc.seed, fc.n_shuffles, out);
    KeyValueConfig manifest_config = config;
    spec.store(manifest_config);
    fc.store(manifest_config);
    write_manifest(dir / "manifest.txt", "fit", manifest_config, {{"attempts", p.attempts}});
    return kExitOk;
}

int cmd_evaluate(const Paths& p, const KeyValueConfig& config, std::ostream& out) {
    const auto timelines = load_attempts(p.attempts, config);
    const auto params = params_from(p, config);
    if (!params) throw InputError("evaluate needs --params or --model");
    SplitSpec spec;
    spec.apply(config);
    const Split split = split_train_test(timelines, spec);
    if (split.test.empty()) throw PreconditionError("split: no users qualify for the test set");
    const auto stats = build_corpus_stats(timelines);
    const auto test = make_pool(timelines, split.test, stats);
    const fs::path dir(p.out_dir);
    {
        KeyValueConfig c;
        store_params(c, *params);
        c.set("split_hash", split_hash(timelines, split));
        c.set("split.test_users", static_cast<long long>(split.test.size()));
        auto o = open_output(dir / "params.txt");
        c.write(o);
    }
    const int shuffles = static_cast<int>(config.get_int("fit.n_shuffles", 10));
    write_reports(dir, *params, timelines, test, stats, static_cast<std::uint64_t>(config.get_int("seed", 0)),
                  shuffles, out);
    KeyValueConfig manifest_config = config;
    spec.store(manifest_config);
    std::vector<std::pair<std::string, std::string>> inputs{{"attempts", p.attempts}};
    if (!p.params.empty()) inputs.emplace_back("params", p.params);
    write_manifest(dir / "manifest.txt", "evaluate", manifest_config, inputs);
    return kExitOk;
}

int cmd_report(const Paths& p, const KeyValueConfig& config, std::ostream& out) {
    const auto timelines = load_attempts(p.attempts, config);
    if (timelines.empty()) throw DataQualityError("report: attempt table has no users");
    const auto stats = build_corpus_stats(timelines);
    const auto table = build_expected_accuracy(timelines);
    const fs::path dir(p.out_dir);

    const auto series = align_to_break(timelines, table, stats);
    auto emit_series = [&](const char* name, const std::vector<SeriesPoint>& s) {
        auto o = open_output(dir / name);
        write_series_csv(o, s);
    };
    emit_series("fig1a.csv", series.performance);
    emit_series("fig1b.csv", series.speed);
    emit_series("fig1c.csv", series.learning);
    const auto changes = performance_change_vs_gap(timelines, table);
    {
        auto o = open_output(dir / "fig1d.csv");
        write_bins_csv(o, bin_by_log_gap(changes));
    }
    std::vector<std::pair<std::string, std::string>> inputs{{"attempts", p.attempts}};
    if (!p.trajectory.empty()) {
        auto in = open_input(p.trajectory);
        const auto traj = read_trajectories_csv(in, timelines);
        bool secondary = false;
        for (const auto& t : traj) {
            for (const auto& e : t.entries) secondary = secondary || (e.valid && e.B_start + e.B_end > 0.0);
        }
        auto o = open_output(dir / "fig2.csv");
        write_resource_curves_csv(o, resource_binned_curves(timelines, traj, table, stats, secondary));
        inputs.emplace_back("trajectory", p.trajectory);
    }
    out << "users=" << timelines.size() << " gap_pairs=" << changes.size() << "\n";
    write_manifest(dir / "manifest.txt", "report", config, inputs);
    return kExitOk;
}

}  // namespace

std::string odds_string(double probability) {
    const long p = std::lround(100.0 * probability);
    return std::to_string(p) + ":" + std::to_string(100 - p);
}

namespace {

int cmd_odds(double bits, std::ostream& out) {
    if (!(bits >= 0.0 && bits <= 1.0)) throw InputError("odds: entropy must lie in [0, 1] bits");
    const double p = invert_binary_entropy(bits);
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(4);
    s << p;
    out << "p*=" << s.str() << "\n" << "odds=" << odds_string(p) << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fit and evaluate cognitive-resource depletion models on question-answering logs", "cogdep"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(COGDEP_VERSION));

    Common common;
    Overrides o;
    Paths p;
    SimArgs sim;
    double bits = 0.0;

    app.add_option("--seed", common.seed, "Seed for every random stream")->capture_default_str();
    app.add_option("--threads", common.threads, "Worker thread cap (0 = hardware)");
    app.add_option("--config", common.config_path, "key=value config file");
    app.add_option("--min-attempts", o.min_attempts, "Minimum attempts per user");
    app.add_option("--break-seconds", o.break_seconds, "Gap that ends a session");

    auto split_flags = [&](CLI::App* s) {
        s->add_option("--train-min-attempts", o.train_min_attempts);
        s->add_option("--max-train-users", o.max_train_users);
        s->add_option("--min-train-users", o.min_train_users);
        s->add_option("--test-min-attempts", o.test_min_attempts);
        s->add_option("--test-min-accuracy", o.test_min_accuracy);
        s->add_option("--shuffles", o.n_shuffles, "Shuffle terms per MI estimate");
    };

    auto* ingest = app.add_subcommand("ingest", "Clean a raw event log into an attempt table");
    ingest->add_option("input", p.input, "Raw CSV")->required();
    ingest->add_option("-o,--output", p.output, "Attempt table CSV")->required();

    auto* profile = app.add_subcommand("profile", "Per-user track profiles");
    profile->add_option("attempts", p.attempts)->required();
    profile->add_option("-o,--output", p.output)->required();
    profile->add_option("--params", p.params, "Fitted parameter file (for f0)");
    profile->add_option("--model", o.model);

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort");
    simulate->add_option("-o,--out-dir", p.out_dir)->required();
    simulate->add_option("--preset", sim.preset, "depleting or frozen")->capture_default_str();
    simulate->add_option("--users", sim.users);
    simulate->add_option("--questions", sim.questions);
    simulate->add_option("--heavy-users", sim.heavy_users);
    simulate->add_option("--heavy-questions", sim.heavy_questions);
    simulate->add_option("--beta0", sim.beta0);
    simulate->add_option("--beta1", sim.beta1);
    simulate->add_option("--learning-beta", sim.learning_beta);
    simulate->add_option("--difficulty-sd", sim.difficulty_sd);

    auto* fitcmd = app.add_subcommand("fit", "Fit a model on the training users and report on the test users");
    fitcmd->add_option("attempts", p.attempts)->required();
    fitcmd->add_option("-o,--out-dir", p.out_dir)->required();
    fitcmd->add_option("--model", o.model, "one-resource or two-resource");
    fitcmd->add_option("--max-evals", o.max_evals);
    split_flags(fitcmd);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Report MI rows for given parameters on the test users");
    evaluate_cmd->add_option("attempts", p.attempts)->required();
    evaluate_cmd->add_option("-o,--out-dir", p.out_dir)->required();
    evaluate_cmd->add_option("--params", p.params);
    evaluate_cmd->add_option("--model", o.model, "Use the published parameters of this model");
    split_flags(evaluate_cmd);

    auto* report = app.add_subcommand("report", "Figure data: break-aligned series and resource curves");
    report->add_option("attempts", p.attempts)->required();
    report->add_option("-o,--out-dir", p.out_dir)->required();
    report->add_option("--trajectory", p.trajectory, "Trajectory CSV from fit or evaluate");

    auto* odds = app.add_subcommand("odds", "Odds implied by a remaining binary entropy");
    odds->add_option("bits", bits)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << COGDEP_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (*odds) return cmd_odds(bits, out);
        if (common.threads > 0) set_thread_limit(common.threads);
        const KeyValueConfig config = effective_config(common, o);
        if (*ingest) return cmd_ingest(p, config, out);
        if (*profile) return cmd_profile(p, config, out);
        if (*simulate) return cmd_simulate(p, sim, config, out);
        if (*fitcmd) return cmd_fit(p, config, out, err);
        if (*evaluate_cmd) return cmd_evaluate(p, config, out);
        if (*report) return cmd_report(p, config, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DataQualityError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const PreconditionError& e) {
        err << "precondition failed: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace cogdep::cli
