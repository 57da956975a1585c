#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cogdep::stats {

double mean(std::span<const double> v);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> v);

double standard_error(std::span<const double> v);

// Linear-interpolation quantile, q in [0, 1] (type 7, as in R and numpy).
double quantile(std::vector<double> v, double q);

// 1-based ranks with ties replaced by their average rank.
std::vector<double> average_ranks(std::span<const double> v);

double pearson(std::span<const double> x, std::span<const double> y);

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;  // two-sided, Student-t approximation
    std::size_t n = 0;
};

SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

// Summary of one group of samples for report tables.
struct Summary {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n = 0;
};

Summary summarize(std::span<const double> v);

}  // namespace cogdep::stats
