#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgdlab/numerics/linalg.hpp"

namespace sgdlab {

struct Histogram {
    Vec bin_edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;  // in-range samples only

    std::size_t bins() const { return counts.size(); }
    double center(std::size_t b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
    double width(std::size_t b) const { return bin_edges[b + 1] - bin_edges[b]; }
};

/// Bins samples into [edges[b], edges[b+1]); the last bin is closed on the
/// right. Out-of-range samples are ignored. Edges must be strictly increasing.
Histogram histogram(std::span<const double> samples, std::span<const double> edges);

Vec uniform_edges(double lo, double hi, std::size_t bins);

/// Linear-interpolated empirical quantile, q in [0, 1]. Sorts a copy.
double quantile(std::span<const double> samples, double q);

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    /// Standard error of the slope from the weighted residuals.
    double slope_se = 0.0;
    std::size_t points = 0;
};

/// Weighted least squares of log(y) on log(x). Zero-weight points are
/// dropped; fewer than two usable points throws FitError.
LogLogFit loglog_fit(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights);
LogLogFit loglog_fit(std::span<const double> xs, std::span<const double> ys);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean and standard error (sample std / sqrt(n)); pairwise accumulation.
MeanSe mean_se(std::span<const double> values);

/// Kolmogorov-Smirnov distance between two weighted empirical CDFs.
double ks_distance(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                   std::span<const double> wb);

struct ChiSquare {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 0.0;
};

/// Pearson goodness of fit. expected_prob sums to the probability mass the
/// observed bins cover; cells are merged left to right until each expects at
/// least min_expected counts.
ChiSquare chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_prob,
                         double min_expected = 5.0);

}  // namespace sgdlab
