// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qcars {

struct Histogram {
    std::vector<double> bin_edges; // length = counts.size() + 1
    std::vector<std::size_t> counts;
    double mean = 0.0;
    double stddev = 0.0; // unbiased sample standard deviation

    std::size_t total_count() const;
    double bin_center(std::size_t i) const;
};

/// Bins the samples into n_bins equal-width bins spanning [min, max].
/// Constant input collapses into a single occupied bin of unit width.
Histogram make_histogram(std::span<const double> samples, int n_bins);

double sample_mean(std::span<const double> samples);
double sample_stddev(std::span<const double> samples);

} // namespace qcars
