#include "cogdep/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cogdep {

KdTree::KdTree(std::span<const double> points, std::size_t dims, std::size_t leaf_size)
    : dims_(dims), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    if (dims == 0 || points.size() % dims != 0) throw std::invalid_argument("KdTree: bad point buffer");
    const std::size_t n = points.size() / dims;
    if (n > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("KdTree: too many points");
    index_.resize(n);
    std::iota(index_.begin(), index_.end(), 0u);
    coords_.assign(points.begin(), points.end());
    nodes_.reserve(2 * n / leaf_size_ + 2);
    if (n > 0) build(0, static_cast<std::uint32_t>(n));

    std::vector<double> ordered(points.size());
    where_.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(index_[t] * dims), dims,
                    ordered.begin() + static_cast<std::ptrdiff_t>(t * dims));
        where_[index_[t]] = static_cast<std::uint32_t>(t);
    }
    coords_ = std::move(ordered);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    // Split the widest dimension at its median. coords_ is still in original
    // order here and is addressed through index_.
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < dims_; ++d) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::uint32_t i = begin; i < end; ++i) {
            const double v = coords_[index_[i] * dims_ + d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = d;
        }
    }
    if (best_spread <= 0.0) return id;  // all points identical: keep as a leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return coords_[a * dims_ + best_dim] < coords_[b * dims_ + best_dim];
                     });
    const double split = coords_[index_[mid] * dims_ + best_dim];
    nodes_[id].split_dim = static_cast<std::int32_t>(best_dim);
    nodes_[id].split_value = split;
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(std::int32_t node_id, const double* query, std::uint32_t self, int k, double* best) const {
    const Node& node = nodes_[node_id];
    if (node.split_dim < 0) {
        for (std::uint32_t t = node.begin; t < node.end; ++t) {
            if (t == self) continue;
            const double* p = &coords_[t * dims_];
            double dist = 0.0;
            for (std::size_t d = 0; d < dims_; ++d) {
                dist = std::max(dist, std::fabs(p[d] - query[d]));
                if (dist >= best[k - 1]) break;
            }
            if (dist < best[k - 1]) {
                int j = k - 1;
                while (j > 0 && best[j - 1] > dist) {
                    best[j] = best[j - 1];
                    --j;
                }
                best[j] = dist;
            }
        }
        return;
    }
    const double diff = query[node.split_dim] - node.split_value;
    const std::int32_t near = diff < 0 ? node.left : node.right;
    const std::int32_t far = diff < 0 ? node.right : node.left;
    search(near, query, self, k, best);
    if (std::fabs(diff) <= best[k - 1]) search(far, query, self, k, best);
}

double KdTree::kth_neighbor_distance(std::size_t point, int k) const {
    if (k < 1 || static_cast<std::size_t>(k) >= index_.size()) {
        throw std::invalid_argument("KdTree: k must be in [1, n)");
    }
    double best_small[16];
    std::vector<double> best_large;
    double* best = best_small;
    if (k > 16) {
        best_large.resize(static_cast<std::size_t>(k));
        best = best_large.data();
    }
    std::fill(best, best + k, std::numeric_limits<double>::infinity());
    const std::uint32_t self = where_[point];
    search(0, &coords_[self * dims_], self, k, best);
    return best[k - 1];
}

}  // namespace cogdep
