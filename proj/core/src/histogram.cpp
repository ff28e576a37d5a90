// SPDX-License-Identifier: Apache-2.0

#include "qcars/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcars {

std::size_t Histogram::total_count() const {
    std::size_t n = 0;
    for (std::size_t c : counts)
        n += c;
    return n;
}

double Histogram::bin_center(std::size_t i) const {
    return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
}

double sample_mean(std::span<const double> samples) {
    if (samples.empty())
        throw std::invalid_argument("mean of empty sample set");
    double sum = 0.0;
    for (double s : samples)
        sum += s;
    return sum / static_cast<double>(samples.size());
}

double sample_stddev(std::span<const double> samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("standard deviation needs at least two samples");
    const double mean = sample_mean(samples);
    double ss = 0.0;
    for (double s : samples)
        ss += (s - mean) * (s - mean);
    return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

Histogram make_histogram(std::span<const double> samples, int n_bins) {
    if (samples.empty())
        throw std::invalid_argument("cannot histogram an empty sample set");
    if (n_bins < 1)
        throw std::invalid_argument("histogram needs at least one bin");

    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (lo == hi) {
        // Degenerate span: one unit-width bin holds everything.
        lo -= 0.5;
        hi += 0.5;
        n_bins = 1;
    }

    Histogram h;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    h.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    const double width = (hi - lo) / n_bins;
    for (int i = 0; i <= n_bins; ++i)
        h.bin_edges[static_cast<std::size_t>(i)] = lo + width * i;

    for (double s : samples) {
        auto idx = static_cast<long long>((s - lo) / width);
        idx = std::clamp<long long>(idx, 0, n_bins - 1);
        ++h.counts[static_cast<std::size_t>(idx)];
    }

    h.mean = sample_mean(samples);
    h.stddev = samples.size() >= 2 ? sample_stddev(samples) : 0.0;
    return h;
}

} // namespace qcars
