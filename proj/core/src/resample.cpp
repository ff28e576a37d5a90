// SPDX-License-Identifier: Apache-2.0

#include "resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcars::detail {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-18 * sum)
            break;
    }
    return sum;
}

std::vector<double> kaiser_window(std::size_t length, double beta) {
    std::vector<double> w(length);
    const double denom = bessel_i0(beta);
    const double half = 0.5 * static_cast<double>(length - 1);
    for (std::size_t n = 0; n < length; ++n) {
        const double r = (static_cast<double>(n) - half) / half;
        w[n] = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
    }
    return w;
}

// Odd polyphase branch of a 63-tap half-band filter: the coefficients that
// estimate the midpoint between two adjacent input samples.
const std::vector<double>& halfband_midpoint_taps() {
    static const std::vector<double> taps = [] {
        constexpr int kHalf = 16;
        const std::vector<double> win = kaiser_window(2 * kHalf, 8.0);
        std::vector<double> c(2 * kHalf);
        for (int j = -kHalf + 1; j <= kHalf; ++j) {
            const double x = static_cast<double>(j) - 0.5; // offset from the midpoint
            c[static_cast<std::size_t>(j + kHalf - 1)] =
                sinc(kPi * x) * win[static_cast<std::size_t>(j + kHalf - 1)];
        }
        double sum = 0.0;
        for (double v : c)
            sum += v;
        for (double& v : c)
            v /= sum; // exact DC gain
        return c;
    }();
    return taps;
}

const std::vector<double>& decimation_taps() {
    static const std::vector<double> taps = [] {
        constexpr int kTaps = 87;
        constexpr double kCutoff = 0.225; // cycles per input sample
        const std::vector<double> win = kaiser_window(kTaps, 6.755);
        std::vector<double> h(kTaps);
        const int c = kTaps / 2;
        for (int n = 0; n < kTaps; ++n)
            h[static_cast<std::size_t>(n)] = 2.0 * kCutoff *
                                             sinc(2.0 * kPi * kCutoff * (n - c)) *
                                             win[static_cast<std::size_t>(n)];
        double sum = 0.0;
        for (double v : h)
            sum += v;
        for (double& v : h)
            v /= sum;
        return h;
    }();
    return taps;
}

} // namespace

void check_resample_factor(int factor) {
    if (factor != 1 && factor != 2 && factor != 4 && factor != 8)
        throw std::invalid_argument("resampling factor must be one of 1, 2, 4, 8");
}

std::vector<std::complex<double>> upsample2(std::span<const std::complex<double>> x) {
    const auto& c = halfband_midpoint_taps();
    const int k_half = static_cast<int>(c.size()) / 2;
    const auto n = static_cast<long long>(x.size());
    // Edge samples are held outside the stream to keep constants constant.
    auto at = [&](long long i) {
        return x[static_cast<std::size_t>(std::clamp<long long>(i, 0, n - 1))];
    };

    std::vector<std::complex<double>> y(x.size() * 2);
    for (long long k = 0; k < n; ++k) {
        y[static_cast<std::size_t>(2 * k)] = x[static_cast<std::size_t>(k)];
        std::complex<double> mid(0.0, 0.0);
        for (int j = -k_half + 1; j <= k_half; ++j)
            mid += c[static_cast<std::size_t>(j + k_half - 1)] * at(k + j);
        y[static_cast<std::size_t>(2 * k + 1)] = mid;
    }
    return y;
}

std::vector<std::complex<double>> downsample2(std::span<const std::complex<double>> x) {
    const auto& h = decimation_taps();
    const int c = static_cast<int>(h.size()) / 2;
    const auto n = static_cast<long long>(x.size());
    auto at = [&](long long i) {
        return x[static_cast<std::size_t>(std::clamp<long long>(i, 0, n - 1))];
    };

    std::vector<std::complex<double>> y(x.size() / 2);
    for (long long k = 0; k < static_cast<long long>(y.size()); ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (int m = 0; m < static_cast<int>(h.size()); ++m)
            acc += h[static_cast<std::size_t>(m)] * at(2 * k + c - m);
        y[static_cast<std::size_t>(k)] = acc;
    }
    return y;
}

} // namespace qcars::detail
