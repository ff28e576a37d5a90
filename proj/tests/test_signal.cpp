// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcars/fft.hpp"
#include "qcars/signal.hpp"

using namespace qcars;

namespace {

// Reference DFT, quadratic but obviously correct.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double arg = -2.0 * std::numbers::pi * static_cast<double>(k * j) /
                               static_cast<double>(n);
            acc += x[j] * std::complex<double>(std::cos(arg), std::sin(arg));
        }
        out[k] = acc;
    }
    return out;
}

Waveform tone(double cycles, std::size_t n, double amplitude, SampleRate rate) {
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k)
        s[k] = amplitude *
               std::cos(2.0 * std::numbers::pi * cycles * static_cast<double>(k) /
                        static_cast<double>(n));
    return Waveform(std::move(s), rate);
}

} // namespace

TEST_SUITE("signal") {

TEST_CASE("fft matches the reference transform") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::complex<double>> x(64);
    for (auto& v : x)
        v = {u(rng), u(rng)};

    auto fast = x;
    fft(fast);
    const auto slow = naive_dft(x);
    for (std::size_t k = 0; k < x.size(); ++k)
        CHECK(std::abs(fast[k] - slow[k]) < 1e-10 * 64);

    ifft(fast);
    for (std::size_t k = 0; k < x.size(); ++k)
        CHECK(std::abs(fast[k] - x[k]) < 1e-12);
}

TEST_CASE("fft rejects non-power-of-two lengths") {
    std::vector<std::complex<double>> x(12, 0.0);
    CHECK_THROWS_AS(fft(x), std::invalid_argument);
}

TEST_CASE("gaussian envelope reproduces the configured pulse") {
    const auto w = gaussian_envelope(900.0, 400.0, SampleRate(768e6));
    CHECK(w.size() == 691);
    CHECK(w.samples()[345] == 1.0);
    for (std::size_t k = 0; k < w.size(); ++k)
        CHECK(w.samples()[k] == doctest::Approx(w.samples()[w.size() - 1 - k]).epsilon(1e-12));
}

TEST_CASE("short gaussian spans four standard deviations") {
    const auto w = gaussian_envelope(260.0, 65.0, SampleRate(768e6));
    CHECK(w.duration_ns() == doctest::Approx(4.0 * 65.0).epsilon(2e-3));
    // Truncation level at the edges of a 4-sigma window.
    CHECK(w.samples()[0] == doctest::Approx(std::exp(-2.0)).epsilon(0.05));
}

TEST_CASE("gaussian envelope rejects bad arguments") {
    CHECK_THROWS_AS(gaussian_envelope(0.0, 65.0, SampleRate(768e6)), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_envelope(260.0, -1.0, SampleRate(768e6)), std::invalid_argument);
    CHECK_THROWS_AS(SampleRate(0.0), std::invalid_argument);
}

TEST_CASE("gaussian envelope integral matches the closed form") {
    for (const double sigma_ns : {65.0, 400.0}) {
        for (const double mult : {4.0, 6.0, 8.0}) {
            const double duration_ns = mult * sigma_ns;
            const auto w = gaussian_envelope(duration_ns, sigma_ns, SampleRate(768e6));
            double sum = 0.0;
            for (double v : w.samples())
                sum += v;
            const double dt_ns = w.rate().period_ns();
            const double expected =
                sigma_ns * std::sqrt(2.0 * std::numbers::pi) *
                std::erf(duration_ns / (2.0 * std::sqrt(2.0) * sigma_ns));
            CHECK(sum * dt_ns == doctest::Approx(expected).epsilon(0.005));
        }
    }
}

TEST_CASE("quantization spot values") {
    const SampleRate rate(768e6);
    const std::vector<double> s{1.0, 0.0, 0.5, -1.0};
    const auto q16 = quantize(s, rate, 16);
    CHECK(q16.codes[0] == 32767);
    CHECK(q16.codes[1] == 0);
    CHECK(q16.codes[3] == -32767);

    const auto q14 = quantize(s, rate, 14);
    CHECK(q14.codes[2] == 4096); // round(0.5 * 8191)
}

TEST_CASE("quantization rejects out-of-range samples and bit widths") {
    const SampleRate rate(768e6);
    const std::vector<double> bad{1.5};
    CHECK_THROWS_AS(quantize(bad, rate, 14), std::range_error);
    const std::vector<double> ok{0.25};
    CHECK_THROWS_AS(quantize(ok, rate, 17), std::invalid_argument);
    CHECK_THROWS_AS(quantize(ok, rate, 1), std::invalid_argument);
}

TEST_CASE("quantize round trip stays within half a step") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int bits : {8, 12, 14, 16}) {
        std::vector<double> s(257);
        for (auto& v : s)
            v = u(rng);
        const auto q = quantize(s, SampleRate(768e6), bits);
        const auto back = dequantize(q);
        const double half_step = 0.5 * quantization_step(bits);
        for (std::size_t k = 0; k < s.size(); ++k)
            CHECK(std::abs(back.samples()[k] - s[k]) <= half_step + 1e-15);
    }
}

TEST_CASE("spectrum reads a bin-centered full-scale tone at 0 dBFS") {
    const SampleRate rate(768e6);
    const std::size_t n = 1024;
    const auto w = tone(static_cast<double>(n / 8), n, 1.0, rate); // F_S / 8
    const auto spec = spectrum(w, n);
    CHECK(spec.bins.size() == n / 2 + 1);

    std::size_t peak = 0;
    for (std::size_t k = 1; k < spec.bins.size(); ++k)
        if (spec.bins[k].power_dbfs > spec.bins[peak].power_dbfs)
            peak = k;
    CHECK(spec.bins[peak].freq_hz == doctest::Approx(rate.hertz() / 8.0));
    CHECK(spec.bins[peak].power_dbfs == doctest::Approx(0.0).epsilon(0.1));
}

TEST_CASE("spectrum of silence sits at the documented floor") {
    const auto w = Waveform(std::vector<double>(256, 0.0), SampleRate(768e6));
    const auto spec = spectrum(w, 256);
    for (const auto& bin : spec.bins)
        CHECK(bin.power_dbfs == kSpectrumFloorDb);
}

TEST_CASE("two half-scale tones read -6 dBFS each") {
    const SampleRate rate(768e6);
    const std::size_t n = 2048;
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        s[k] = 0.5 * std::cos(2.0 * std::numbers::pi * 128.0 * t) +
               0.5 * std::cos(2.0 * std::numbers::pi * 512.0 * t);
    }
    const auto spec = spectrum(Waveform(std::move(s), rate), n);
    const double expected = amplitude_to_db(0.5);
    CHECK(spec.bins[128].power_dbfs == doctest::Approx(expected).epsilon(0.2));
    CHECK(spec.bins[512].power_dbfs == doctest::Approx(expected).epsilon(0.2));
}

TEST_CASE("flat-top window holds amplitude accuracy off bin centers") {
    const SampleRate rate(768e6);
    const std::size_t n = 2048;
    std::vector<double> s(n);
    const double cycles = 300.31; // deliberately between bins
    for (std::size_t k = 0; k < n; ++k)
        s[k] = 0.8 * std::cos(2.0 * std::numbers::pi * cycles * static_cast<double>(k) /
                              static_cast<double>(n));
    const auto spec = spectrum(Waveform(std::move(s), rate), n, Window::flat_top);
    double peak = kSpectrumFloorDb;
    for (const auto& bin : spec.bins)
        peak = std::max(peak, bin.power_dbfs);
    CHECK(peak == doctest::Approx(amplitude_to_db(0.8)).epsilon(0.02));
}

TEST_CASE("spectrum input validation") {
    const auto w = Waveform(std::vector<double>(100, 0.1), SampleRate(768e6));
    CHECK_THROWS_AS(spectrum(w, 64), std::invalid_argument);  // too few bins
    CHECK_THROWS_AS(spectrum(w, 100), std::invalid_argument); // not a power of two
    CHECK_THROWS_AS(spectrum(std::span<const double>{}, SampleRate(768e6), 64),
                    std::invalid_argument);
}

TEST_CASE("real waveform spectra are conjugate symmetric") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 512;
    std::vector<std::complex<double>> x(n);
    for (auto& v : x)
        v = {u(rng), 0.0};

    auto transformed = x;
    fft(transformed);
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double p_pos = 20.0 * std::log10(std::abs(transformed[k]) + 1e-300);
        const double p_neg = 20.0 * std::log10(std::abs(transformed[n - k]) + 1e-300);
        CHECK(std::abs(p_pos - p_neg) < 1e-9);
    }
}

TEST_CASE("waveform type enforces its bounds") {
    CHECK_THROWS_AS(Waveform(std::vector<double>{}, SampleRate(1e9)), std::invalid_argument);
    CHECK_THROWS_AS(Waveform(std::vector<double>{1.2}, SampleRate(1e9)), std::invalid_argument);
    CHECK_THROWS_AS(Waveform(std::vector<double>{std::nan("")}, SampleRate(1e9)),
                    std::invalid_argument);
}

} // TEST_SUITE
