#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cogdep {

// Static kd-tree over n points in d dimensions for k-nearest-neighbour
// distances under the maximum (Chebyshev) norm.
class KdTree {
public:
    // points: row-major n x dims.
    KdTree(std::span<const double> points, std::size_t dims, std::size_t leaf_size = 12);

    std::size_t size() const { return index_.size(); }
    std::size_t dims() const { return dims_; }

    // Distance from stored point `point` to its k-th nearest other point.
    double kth_neighbor_distance(std::size_t point, int k) const;

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t split_dim = -1;
        double split_value = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, const double* query, std::uint32_t self, int k, double* best) const;

    std::size_t dims_;
    std::size_t leaf_size_;
    std::vector<double> coords_;         // points reordered to tree order
    std::vector<std::uint32_t> index_;   // tree order -> original index
    std::vector<std::uint32_t> where_;   // original index -> tree order
    std::vector<Node> nodes_;
};

}  // namespace cogdep
