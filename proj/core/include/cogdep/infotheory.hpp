#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cogdep {

// Dense row-major sample matrix: rows are samples, columns are variables.
class SampleMatrix {
public:
    SampleMatrix() = default;
    SampleMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static SampleMatrix from_columns(const std::vector<std::vector<double>>& columns);
    static SampleMatrix column_vector(std::span<const double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> data() const { return data_; }
    std::vector<double> column(std::size_t c) const;

    // Row i of the result is row perm[i] of this matrix.
    SampleMatrix permuted_rows(std::span<const std::size_t> perm) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Column concatenation [a b]; row counts must match.
SampleMatrix hstack(const SampleMatrix& a, const SampleMatrix& b);

// Each column replaced by rank / (n + 1), ties sharing their average rank.
SampleMatrix copula_transform(const SampleMatrix& m);

// Breaks ties in every column that has repeated values by adding uniform
// noise of width width_factor * (smallest gap between distinct values), which
// cannot reorder distinct values. A constant column becomes uniform noise on
// (0, 1). Deterministic in seed.
SampleMatrix dither_ties(const SampleMatrix& m, double width_factor, std::uint64_t seed);

struct EntropyOptions {
    double alpha = 0.99999;  // Renyi exponent, in (0, 1]; 1 means Shannon
    int k = 3;               // neighbour order
};

// Nearest-neighbour Renyi-alpha entropy of the density behind the sample,
// in bits. Zero neighbour distances from duplicate rows are removed by
// dithering the tied columns first.
double renyi_entropy(const SampleMatrix& m, const EntropyOptions& options = {});

struct MIOptions {
    int n_shuffles = 10;
    std::uint64_t seed = 0;
    EntropyOptions entropy;
    bool dither = true;
    double dither_width = 0.3;
};

struct MIEstimate {
    double value = 0.0;                 // bits
    std::vector<double> shuffle_values;  // per-shuffle estimates; value is their mean
    double dispersion = 0.0;            // standard deviation of shuffle_values
    std::uint64_t seed = 0;
};

// MI(X, Y) = -H([X Y]) + mean_i { H([X Y~_i]) + H([X~_i Y]) - H([X~_i Y~_i]) }
// on copula-transformed columns, where X~_i and Y~_i are independent row
// permutations drawn from a stream keyed by (seed, i). Same seed, same bits.
// Exact duplicate columns within X or within Y are dropped first.
MIEstimate mutual_information(const SampleMatrix& X, const SampleMatrix& Y, const MIOptions& options = {});

// CMI(X, Y | Z) = MI(X, [Y Z]) - MI(X, Z) with both terms sharing the seed.
MIEstimate conditional_mi(const SampleMatrix& X, const SampleMatrix& Y, const SampleMatrix& Z,
                          const MIOptions& options = {});

double binary_entropy(double p);

// Root p >= 0.5 of binary_entropy(p) == h, by bisection.
double invert_binary_entropy(double h);

// Plug-in Shannon entropy (bits) of the empirical distribution of exact values.
double discrete_entropy(std::span<const double> values);

}  // namespace cogdep
