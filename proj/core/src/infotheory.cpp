#include "cogdep/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/special_functions/digamma.hpp>

#include "cogdep/error.hpp"
#include "cogdep/kdtree.hpp"
#include "cogdep/parallel.hpp"
#include "cogdep/stats.hpp"

namespace cogdep {

SampleMatrix SampleMatrix::from_columns(const std::vector<std::vector<double>>& columns) {
    if (columns.empty()) return {};
    const std::size_t n = columns.front().size();
    SampleMatrix m(n, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != n) throw PreconditionError("from_columns: ragged columns");
        for (std::size_t r = 0; r < n; ++r) m(r, c) = columns[c][r];
    }
    return m;
}

SampleMatrix SampleMatrix::column_vector(std::span<const double> values) {
    SampleMatrix m(values.size(), 1);
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
}

std::vector<double> SampleMatrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

SampleMatrix SampleMatrix::permuted_rows(std::span<const std::size_t> perm) const {
    SampleMatrix out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(perm[r] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
    }
    return out;
}

SampleMatrix hstack(const SampleMatrix& a, const SampleMatrix& b) {
    if (a.rows() != b.rows()) throw PreconditionError("hstack: row counts differ");
    SampleMatrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
    }
    return out;
}

SampleMatrix copula_transform(const SampleMatrix& m) {
    SampleMatrix out(m.rows(), m.cols());
    const double scale = 1.0 / static_cast<double>(m.rows() + 1);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        const auto ranks = stats::average_ranks(m.column(c));
        for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = ranks[r] * scale;
    }
    return out;
}

namespace {

std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

constexpr std::uint64_t kDitherX = 0x11;
constexpr std::uint64_t kDitherY = 0x12;
constexpr std::uint64_t kShuffle = 0x21;
constexpr std::uint64_t kEntropyDither = 0x31;

void require_finite(const SampleMatrix& m, const char* what) {
    for (double v : m.data()) {
        if (!std::isfinite(v)) throw PreconditionError(std::string(what) + ": non-finite sample");
    }
}

// Natural-log Renyi estimate from per-point log "volumes" l_i:
//   H_alpha = log(mean(exp((1 - alpha) l_i))) / (1 - alpha),
// evaluated around the mean with expm1/log1p because 1 - alpha is tiny.
double renyi_from_logs(const std::vector<double>& l, double alpha) {
    const double centre = stats::mean(l);
    if (alpha == 1.0) return centre;
    const double e = 1.0 - alpha;
    double acc = 0.0;
    for (double v : l) acc += std::expm1(e * (v - centre));
    return centre + std::log1p(acc / static_cast<double>(l.size())) / e;
}

// Exact copies of an earlier column add no information but put the sample on
// a lower-dimensional set, which the neighbour estimator handles badly.
SampleMatrix distinct_columns(const SampleMatrix& m) {
    std::vector<std::vector<double>> kept;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        auto col = m.column(c);
        if (std::find(kept.begin(), kept.end(), col) == kept.end()) kept.push_back(std::move(col));
    }
    if (kept.size() == m.cols()) return m;
    return SampleMatrix::from_columns(kept);
}

}  // namespace

SampleMatrix dither_ties(const SampleMatrix& m, double width_factor, std::uint64_t seed) {
    SampleMatrix out = m;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        auto values = m.column(c);
        std::sort(values.begin(), values.end());
        double min_gap = std::numeric_limits<double>::infinity();
        bool ties = false;
        for (std::size_t i = 1; i < values.size(); ++i) {
            const double g = values[i] - values[i - 1];
            if (g == 0.0) ties = true;
            else min_gap = std::min(min_gap, g);
        }
        if (!ties) continue;
        auto engine = keyed_engine(seed, c, kEntropyDither);
        if (!std::isfinite(min_gap)) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = u(engine);
            continue;
        }
        const double half = 0.5 * width_factor * min_gap;
        std::uniform_real_distribution<double> u(-half, half);
        for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = m(r, c) + u(engine);
    }
    return out;
}

double renyi_entropy(const SampleMatrix& m, const EntropyOptions& options) {
    const std::size_t n = m.rows();
    const std::size_t d = m.cols();
    if (options.k < 1 || n <= static_cast<std::size_t>(options.k)) {
        throw PreconditionError("renyi_entropy: need more samples than neighbours");
    }
    if (!(options.alpha > 0.0 && options.alpha <= 1.0)) {
        throw PreconditionError("renyi_entropy: alpha must lie in (0, 1]");
    }
    require_finite(m, "renyi_entropy");

    const SampleMatrix* points = &m;
    SampleMatrix dithered;
    std::vector<double> dist(n);
    for (int attempt = 0; attempt < 2; ++attempt) {
        KdTree tree(points->data(), d);
        parallel_for(n, [&](std::size_t i) { dist[i] = tree.kth_neighbor_distance(i, options.k); });
        if (std::all_of(dist.begin(), dist.end(), [](double v) { return v > 0.0; })) break;
        if (attempt == 1) throw NumericalError("renyi_entropy: zero neighbour distance after dithering");
        dithered = dither_ties(m, 0.3, 0);
        points = &dithered;
    }

    // Ball volume under the max norm is (2 r)^d; C_k = [Gamma(k)/Gamma(k+1-alpha)]^(1/(1-alpha))
    // which tends to exp(-psi(k)) as alpha -> 1.
    const double k = options.k;
    const double log_ck = options.alpha == 1.0
                              ? -boost::math::digamma(k)
                              : (std::lgamma(k) - std::lgamma(k + 1.0 - options.alpha)) / (1.0 - options.alpha);
    const double base = std::log(static_cast<double>(n - 1)) + log_ck;
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = base + static_cast<double>(d) * std::log(2.0 * dist[i]);
    return renyi_from_logs(l, options.alpha) / std::numbers::ln2;
}

MIEstimate mutual_information(const SampleMatrix& X, const SampleMatrix& Y, const MIOptions& options) {
    if (X.rows() != Y.rows()) throw PreconditionError("mutual_information: row counts differ");
    const std::size_t n = X.rows();
    const std::size_t dims = X.cols() + Y.cols();
    if (X.cols() == 0 || Y.cols() == 0) throw PreconditionError("mutual_information: empty variable");
    if (n < 10 * dims) {
        throw PreconditionError("mutual_information: need at least 10 samples per dimension, got " +
                                std::to_string(n) + " for " + std::to_string(dims));
    }
    if (options.n_shuffles < 1) throw PreconditionError("mutual_information: n_shuffles must be >= 1");
    require_finite(X, "mutual_information");
    require_finite(Y, "mutual_information");

    const SampleMatrix xd = distinct_columns(X);
    const SampleMatrix yd = distinct_columns(Y);
    const SampleMatrix xc = copula_transform(options.dither ? dither_ties(xd, options.dither_width, options.seed ^ kDitherX) : xd);
    const SampleMatrix yc = copula_transform(options.dither ? dither_ties(yd, options.dither_width, options.seed ^ kDitherY) : yd);

    const auto shuffles = static_cast<std::size_t>(options.n_shuffles);
    std::vector<std::vector<std::size_t>> perm_x(shuffles), perm_y(shuffles);
    for (std::size_t i = 0; i < shuffles; ++i) {
        auto engine = keyed_engine(options.seed, i, kShuffle);
        perm_x[i].resize(n);
        perm_y[i].resize(n);
        std::iota(perm_x[i].begin(), perm_x[i].end(), 0);
        std::iota(perm_y[i].begin(), perm_y[i].end(), 0);
        std::shuffle(perm_x[i].begin(), perm_x[i].end(), engine);
        std::shuffle(perm_y[i].begin(), perm_y[i].end(), engine);
    }

    // Term 0 is the joint; then for shuffle i: 1+3i [X Y~], 2+3i [X~ Y], 3+3i [X~ Y~].
    std::vector<double> h(1 + 3 * shuffles);
    parallel_for(h.size(), [&](std::size_t t) {
        if (t == 0) {
            h[t] = renyi_entropy(hstack(xc, yc), options.entropy);
            return;
        }
        const std::size_t i = (t - 1) / 3;
        switch ((t - 1) % 3) {
            case 0: h[t] = renyi_entropy(hstack(xc, yc.permuted_rows(perm_y[i])), options.entropy); break;
            case 1: h[t] = renyi_entropy(hstack(xc.permuted_rows(perm_x[i]), yc), options.entropy); break;
            default:
                h[t] = renyi_entropy(hstack(xc.permuted_rows(perm_x[i]), yc.permuted_rows(perm_y[i])),
                                     options.entropy);
        }
    });

    MIEstimate est;
    est.seed = options.seed;
    est.shuffle_values.resize(shuffles);
    for (std::size_t i = 0; i < shuffles; ++i) {
        est.shuffle_values[i] = -h[0] + h[1 + 3 * i] + h[2 + 3 * i] - h[3 + 3 * i];
    }
    est.value = stats::mean(est.shuffle_values);
    est.dispersion = stats::stddev(est.shuffle_values);
    return est;
}

MIEstimate conditional_mi(const SampleMatrix& X, const SampleMatrix& Y, const SampleMatrix& Z,
                          const MIOptions& options) {
    const MIEstimate joint = mutual_information(X, hstack(Y, Z), options);
    const MIEstimate cond = mutual_information(X, Z, options);
    MIEstimate est;
    est.seed = options.seed;
    est.shuffle_values.resize(joint.shuffle_values.size());
    for (std::size_t i = 0; i < est.shuffle_values.size(); ++i) {
        est.shuffle_values[i] = joint.shuffle_values[i] - cond.shuffle_values[i];
    }
    est.value = joint.value - cond.value;
    est.dispersion = stats::stddev(est.shuffle_values);
    return est;
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double invert_binary_entropy(double h) {
    if (!(h >= 0.0 && h <= 1.0)) throw PreconditionError("invert_binary_entropy: h must lie in [0, 1]");
    double lo = 0.5, hi = 1.0;  // binary_entropy falls from 1 to 0 on this interval
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (binary_entropy(mid) > h) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double discrete_entropy(std::span<const double> values) {
    if (values.empty()) return 0.0;
    std::map<double, std::size_t> counts;
    for (double v : values) ++counts[v];
    const double n = static_cast<double>(values.size());
    double h = 0.0;
    for (const auto& [v, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace cogdep
