#include "cogdep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cogdep/csv.hpp"
#include "cogdep/error.hpp"

namespace cogdep {

int ExpectedAccuracyTable::grid_index(double fraction) {
    const int i = static_cast<int>(std::floor(fraction * kGrid));
    return std::clamp(i, 0, kGrid - 1);
}

double ExpectedAccuracyTable::cell_probability(int user_bin, int question_bin) const {
    const auto c = static_cast<std::size_t>(user_bin * kGrid + question_bin);
    return (static_cast<double>(successes_[c]) + 1.0) / (static_cast<double>(counts_[c]) + 2.0);
}

std::size_t ExpectedAccuracyTable::cell_count(int user_bin, int question_bin) const {
    return counts_[static_cast<std::size_t>(user_bin * kGrid + question_bin)];
}

std::size_t ExpectedAccuracyTable::cell_successes(int user_bin, int question_bin) const {
    return successes_[static_cast<std::size_t>(user_bin * kGrid + question_bin)];
}

std::optional<double> ExpectedAccuracyTable::user_accuracy(const std::string& user_id) const {
    auto it = users_.find(user_id);
    if (it == users_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> ExpectedAccuracyTable::question_accuracy(const std::string& question_id) const {
    auto it = questions_.find(question_id);
    if (it == questions_.end()) return std::nullopt;
    return it->second;
}

double ExpectedAccuracyTable::probability(const std::string& user_id, const std::string& question_id) const {
    const auto u = user_accuracy(user_id);
    const auto q = question_accuracy(question_id);
    if (!u || !q) return overall_;
    return cell_probability(grid_index(*u), grid_index(*q));
}

ExpectedAccuracyTable build_expected_accuracy(std::span<const Timeline> timelines) {
    ExpectedAccuracyTable table;
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> q_counts;
    std::size_t total = 0, correct = 0;
    for (const auto& t : timelines) {
        std::size_t uc = 0;
        for (const auto& a : t.attempts) {
            auto& q = q_counts[a.question_id];
            ++q.first;
            if (a.correct()) {
                ++q.second;
                ++uc;
            }
        }
        if (!t.attempts.empty()) {
            table.users_[t.user_id] = static_cast<double>(uc) / static_cast<double>(t.attempts.size());
        }
        total += t.attempts.size();
        correct += uc;
    }
    if (total == 0) throw PreconditionError("build_expected_accuracy: no attempts");
    for (const auto& [id, c] : q_counts) {
        table.questions_[id] = static_cast<double>(c.second) / static_cast<double>(c.first);
    }
    table.overall_ = static_cast<double>(correct) / static_cast<double>(total);

    for (const auto& t : timelines) {
        const int ub = ExpectedAccuracyTable::grid_index(table.users_[t.user_id]);
        for (const auto& a : t.attempts) {
            const int qb = ExpectedAccuracyTable::grid_index(table.questions_[a.question_id]);
            const auto c = static_cast<std::size_t>(ub * ExpectedAccuracyTable::kGrid + qb);
            ++table.counts_[c];
            if (a.correct()) ++table.successes_[c];
        }
    }
    return table;
}

double performance(const Attempt& attempt, const ExpectedAccuracyTable& table) {
    return (attempt.correct() ? 1.0 : 0.0) - table.probability(attempt.user_id, attempt.question_id);
}

namespace {

std::vector<std::size_t> session_index(const Timeline& timeline) {
    std::vector<std::size_t> out(timeline.attempts.size(), 0);
    for (std::size_t s = 0; s < timeline.sessions.size(); ++s) {
        for (std::size_t i = timeline.sessions[s].begin; i < timeline.sessions[s].end; ++i) out[i] = s;
    }
    return out;
}

}  // namespace

std::vector<LearningSample> learning_outcomes(const Timeline& timeline) {
    const auto& attempts = timeline.attempts;
    const auto sessions = session_index(timeline);
    std::unordered_map<std::string, std::size_t> next_seen;
    std::vector<std::optional<std::size_t>> next(attempts.size());
    for (std::size_t i = attempts.size(); i-- > 0;) {
        auto it = next_seen.find(attempts[i].question_id);
        if (it != next_seen.end()) next[i] = it->second;
        next_seen[attempts[i].question_id] = i;
    }
    std::vector<LearningSample> out;
    for (std::size_t i = 0; i < attempts.size(); ++i) {
        if (!next[i] || !attempts[i].answered()) continue;
        LearningSample s;
        s.first = i;
        s.repeat = *next[i];
        s.learned = attempts[s.repeat].correct();
        if (!timeline.sessions.empty()) {
            const auto& session = timeline.sessions[sessions[i]];
            s.position_before_break = session.end - 1 - i;
            s.time_before_break = static_cast<double>(attempts[session.end - 1].end - attempts[i].end);
        }
        out.push_back(s);
    }
    return out;
}

std::optional<double> relative_answer_speed(const Attempt& attempt, const CorpusStats& corpus) {
    if (attempt.duration <= 0) return std::nullopt;
    const auto ref = corpus.mean_time(attempt.question_id);
    if (!ref) return std::nullopt;
    return *ref / static_cast<double>(attempt.duration);
}

BreakAlignedSamples break_aligned_samples(std::span<const Timeline> timelines, const ExpectedAccuracyTable& table,
                                          const CorpusStats& corpus, const AlignOptions& options) {
    BreakAlignedSamples out;
    for (const auto& t : timelines) {
        const std::size_t n_sessions = t.sessions.size();
        std::vector<char> eligible(t.attempts.size(), 0);
        for (std::size_t s = 0; s < n_sessions; ++s) {
            const bool final_session = s + 1 == n_sessions;
            if (final_session && !options.include_final_session) continue;
            const auto& session = t.sessions[s];
            for (std::size_t i = session.begin; i < session.end; ++i) {
                const std::size_t pos = session.end - 1 - i;
                if (pos >= options.max_positions) continue;
                eligible[i] = 1;
                const auto p = static_cast<double>(pos);
                out.performance_position.push_back(p);
                out.performance.push_back(performance(t.attempts[i], table));
                if (auto sp = relative_answer_speed(t.attempts[i], corpus)) {
                    out.speed_position.push_back(p);
                    out.speed.push_back(*sp);
                }
            }
        }
        for (const auto& ls : learning_outcomes(t)) {
            if (!eligible[ls.first]) continue;
            out.learning_position.push_back(static_cast<double>(ls.position_before_break));
            out.learned.push_back(ls.learned ? 1.0 : 0.0);
        }
    }
    return out;
}

namespace {

std::vector<SeriesPoint> by_position(const std::vector<double>& position, const std::vector<double>& value,
                                     std::size_t max_positions) {
    std::vector<std::vector<double>> groups(max_positions);
    for (std::size_t i = 0; i < position.size(); ++i) {
        const auto p = static_cast<std::size_t>(position[i]);
        if (p < max_positions) groups[p].push_back(value[i]);
    }
    std::vector<SeriesPoint> out;
    for (std::size_t p = 0; p < max_positions; ++p) out.push_back(SeriesPoint{p, stats::summarize(groups[p])});
    return out;
}

}  // namespace

BreakAlignedSeries align_to_break(std::span<const Timeline> timelines, const ExpectedAccuracyTable& table,
                                  const CorpusStats& corpus, const AlignOptions& options) {
    const auto samples = break_aligned_samples(timelines, table, corpus, options);
    BreakAlignedSeries out;
    out.performance = by_position(samples.performance_position, samples.performance, options.max_positions);
    out.speed = by_position(samples.speed_position, samples.speed, options.max_positions);
    out.learning = by_position(samples.learning_position, samples.learned, options.max_positions);
    return out;
}

std::vector<GapChange> performance_change_vs_gap(std::span<const Timeline> timelines,
                                                 const ExpectedAccuracyTable& table) {
    std::vector<GapChange> out;
    for (const auto& t : timelines) {
        for (std::size_t i = 0; i + 1 < t.attempts.size(); ++i) {
            const auto& a = t.attempts[i];
            if (!a.gap_after) continue;
            out.push_back(GapChange{static_cast<double>(*a.gap_after),
                                    performance(t.attempts[i + 1], table) - performance(a, table)});
        }
    }
    return out;
}

std::vector<Bin> bin_by_log_gap(std::span<const GapChange> changes, int bins_per_decade) {
    std::map<int, std::vector<double>> groups;  // bin -1 holds gaps below one second
    for (const auto& c : changes) {
        const int b = c.gap < 1.0 ? -1
                                  : static_cast<int>(std::floor(std::log10(c.gap) * bins_per_decade + 1e-9));
        groups[b].push_back(c.delta_performance);
    }
    std::vector<Bin> out;
    for (const auto& [b, values] : groups) {
        Bin bin;
        if (b < 0) {
            bin.lo = 0.0;
            bin.hi = 1.0;
        } else {
            bin.lo = std::pow(10.0, static_cast<double>(b) / bins_per_decade);
            bin.hi = std::pow(10.0, static_cast<double>(b + 1) / bins_per_decade);
        }
        bin.summary = stats::summarize(values);
        out.push_back(bin);
    }
    return out;
}

std::vector<Bin> bin_equal_width(std::span<const double> x, std::span<const double> y, int bins) {
    std::vector<Bin> out;
    if (x.empty() || bins < 1) return out;
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    const double lo = *mn, hi = *mx;
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(bins));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int b = std::clamp(static_cast<int>((x[i] - lo) / width), 0, bins - 1);
        groups[static_cast<std::size_t>(b)].push_back(y[i]);
    }
    for (int b = 0; b < bins; ++b) {
        out.push_back(Bin{lo + b * width, lo + (b + 1) * width, stats::summarize(groups[static_cast<std::size_t>(b)])});
    }
    return out;
}

std::vector<ResourceCurve> resource_binned_curves(std::span<const Timeline> timelines,
                                                  std::span<const ResourceTrajectory> trajectories,
                                                  const ExpectedAccuracyTable& table, const CorpusStats& corpus,
                                                  bool has_secondary, int bins) {
    if (timelines.size() != trajectories.size()) {
        throw PreconditionError("resource_binned_curves: one trajectory per timeline required");
    }
    std::vector<std::string> resources = {"A_start", "A_end"};
    if (has_secondary) {
        resources.push_back("B_start");
        resources.push_back("B_end");
    }
    const std::vector<std::string> quantities = {"relative_duration", "learning", "performance", "difficulty"};
    // [resource][quantity] -> (x, y)
    std::vector<std::vector<std::pair<std::vector<double>, std::vector<double>>>> data(
        resources.size(), std::vector<std::pair<std::vector<double>, std::vector<double>>>(quantities.size()));

    for (std::size_t u = 0; u < timelines.size(); ++u) {
        const auto& t = timelines[u];
        const auto& traj = trajectories[u];
        std::unordered_map<std::size_t, bool> learned;
        for (const auto& ls : learning_outcomes(t)) learned[ls.first] = ls.learned;
        for (std::size_t i = 0; i < t.attempts.size() && i < traj.entries.size(); ++i) {
            const auto& e = traj.entries[i];
            if (!e.valid) continue;
            const auto& a = t.attempts[i];
            const double levels[4] = {e.A_start, e.A_end, e.B_start, e.B_end};
            std::array<std::optional<double>, 4> q;
            if (a.duration > 0) {
                if (auto ref = corpus.mean_time(a.question_id)) q[0] = static_cast<double>(a.duration) / *ref;
            }
            if (auto it = learned.find(i); it != learned.end()) q[1] = it->second ? 1.0 : 0.0;
            q[2] = performance(a, table);
            q[3] = table.question_accuracy(a.question_id);
            for (std::size_t r = 0; r < resources.size(); ++r) {
                for (std::size_t k = 0; k < quantities.size(); ++k) {
                    if (!q[k]) continue;
                    data[r][k].first.push_back(levels[r]);
                    data[r][k].second.push_back(*q[k]);
                }
            }
        }
    }
    std::vector<ResourceCurve> out;
    for (std::size_t r = 0; r < resources.size(); ++r) {
        for (std::size_t k = 0; k < quantities.size(); ++k) {
            out.push_back(ResourceCurve{resources[r], quantities[k],
                                        bin_equal_width(data[r][k].first, data[r][k].second, bins)});
        }
    }
    return out;
}

void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series, std::size_t min_samples) {
    out << "position,mean,standard_error,n\n";
    for (const auto& p : series) {
        if (p.summary.n < min_samples) continue;
        csv::write_row(out, {std::to_string(p.position), csv::format_double(p.summary.mean),
                             csv::format_double(p.summary.standard_error), std::to_string(p.summary.n)});
    }
}

void write_bins_csv(std::ostream& out, std::span<const Bin> bins, std::size_t min_samples) {
    out << "bin_lo,bin_hi,mean,standard_error,n\n";
    for (const auto& b : bins) {
        if (b.summary.n < min_samples) continue;
        csv::write_row(out, {csv::format_double(b.lo), csv::format_double(b.hi), csv::format_double(b.summary.mean),
                             csv::format_double(b.summary.standard_error), std::to_string(b.summary.n)});
    }
}

void write_resource_curves_csv(std::ostream& out, std::span<const ResourceCurve> curves, std::size_t min_samples) {
    out << "resource,quantity,bin_lo,bin_hi,mean,standard_error,n\n";
    for (const auto& c : curves) {
        for (const auto& b : c.bins) {
            if (b.summary.n < min_samples) continue;
            csv::write_row(out, {c.resource, c.quantity, csv::format_double(b.lo), csv::format_double(b.hi),
                                 csv::format_double(b.summary.mean), csv::format_double(b.summary.standard_error),
                                 std::to_string(b.summary.n)});
        }
    }
}

}  // namespace cogdep
