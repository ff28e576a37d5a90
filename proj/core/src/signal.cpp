// SPDX-License-Identifier: Apache-2.0

#include "qcars/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qcars/fft.hpp"

namespace qcars {

SampleRate::SampleRate(double hertz) : hertz_(hertz) {
    if (!(hertz > 0.0) || !std::isfinite(hertz))
        throw std::invalid_argument("sample rate must be positive and finite");
}

Waveform::Waveform(std::vector<double> samples, SampleRate rate, double start_time_ns)
    : samples_(std::move(samples)), rate_(rate), start_time_ns_(start_time_ns) {
    if (samples_.empty())
        throw std::invalid_argument("waveform must contain at least one sample");
    for (double s : samples_) {
        if (!(s >= -1.0 && s <= 1.0))
            throw std::invalid_argument("waveform sample outside [-1, 1] full scale");
    }
}

IqStream::IqStream(std::vector<std::complex<double>> samples, SampleRate rate)
    : samples_(std::move(samples)), rate_(rate) {
    for (const auto& s : samples_) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::invalid_argument("IQ stream contains a non-finite sample");
    }
}

Waveform gaussian_envelope(double duration_ns, double sigma_ns, SampleRate rate) {
    if (!(duration_ns > 0.0))
        throw std::invalid_argument("gaussian envelope duration must be positive");
    if (!(sigma_ns > 0.0))
        throw std::invalid_argument("gaussian envelope sigma must be positive");

    const auto n = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(duration_ns * 1e-9 * rate.hertz())));
    const double sigma_samples = sigma_ns * 1e-9 * rate.hertz();
    // Centering on the sample-grid midpoint makes the envelope exactly
    // mirror-symmetric and puts a peak of 1 on the middle sample for odd n.
    const double center = 0.5 * static_cast<double>(n - 1);

    std::vector<double> samples(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = (static_cast<double>(k) - center) / sigma_samples;
        samples[k] = std::exp(-0.5 * d * d);
    }
    return Waveform(std::move(samples), rate);
}

double quantization_step(int full_scale_bits) {
    if (full_scale_bits < 2 || full_scale_bits > 16)
        throw std::invalid_argument("full_scale_bits must be in [2, 16]");
    return 1.0 / static_cast<double>((1 << (full_scale_bits - 1)) - 1);
}

QuantizedWaveform quantize(std::span<const double> samples, SampleRate rate,
                           int full_scale_bits) {
    const double full_scale = 1.0 / quantization_step(full_scale_bits);
    QuantizedWaveform q;
    q.rate = rate;
    q.full_scale_bits = full_scale_bits;
    q.codes.reserve(samples.size());
    for (double s : samples) {
        if (!(s >= -1.0 && s <= 1.0))
            throw std::range_error("sample outside [-1, 1] cannot be quantized");
        q.codes.push_back(static_cast<std::int16_t>(std::llround(s * full_scale)));
    }
    return q;
}

QuantizedWaveform quantize(const Waveform& w, int full_scale_bits) {
    return quantize(w.samples(), w.rate(), full_scale_bits);
}

Waveform dequantize(const QuantizedWaveform& q) {
    const double step = quantization_step(q.full_scale_bits);
    std::vector<double> samples;
    samples.reserve(q.codes.size());
    for (std::int16_t c : q.codes)
        samples.push_back(static_cast<double>(c) * step);
    return Waveform(std::move(samples), q.rate);
}

std::vector<double> window_coefficients(Window window, std::size_t length) {
    std::vector<double> w(length, 1.0);
    if (length <= 1 || window == Window::rectangular)
        return w;
    const double den = static_cast<double>(length - 1);
    for (std::size_t k = 0; k < length; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / den;
        switch (window) {
        case Window::hann:
            w[k] = 0.5 - 0.5 * std::cos(t);
            break;
        case Window::flat_top:
            w[k] = 0.21557895 - 0.41663158 * std::cos(t) + 0.277263158 * std::cos(2.0 * t) -
                   0.083578947 * std::cos(3.0 * t) + 0.006947368 * std::cos(4.0 * t);
            break;
        case Window::rectangular:
            break;
        }
    }
    return w;
}

double amplitude_to_db(double amplitude) {
    const double floor_amp = db_to_amplitude(kSpectrumFloorDb);
    return 20.0 * std::log10(std::max(amplitude, floor_amp));
}

double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

Spectrum spectrum(std::span<const double> samples, SampleRate rate, std::size_t n_bins,
                  Window window) {
    if (samples.empty())
        throw std::invalid_argument("cannot take the spectrum of an empty waveform");
    if (!is_power_of_two(n_bins) || n_bins < samples.size())
        throw std::invalid_argument(
            "spectrum bin count must be a power of two no smaller than the waveform");

    const std::vector<double> win = window_coefficients(window, samples.size());
    double win_sum = 0.0;
    for (double v : win)
        win_sum += v;

    std::vector<std::complex<double>> buf(n_bins, 0.0);
    for (std::size_t k = 0; k < samples.size(); ++k)
        buf[k] = samples[k] * win[k];
    fft(buf);

    // Amplitude normalization: a bin-centered tone of amplitude A reads A
    // after dividing by the coherent gain of the window (sum/2 for the two
    // spectral halves of a real tone; DC and Nyquist have no mirror).
    Spectrum spec;
    spec.bins.reserve(n_bins / 2 + 1);
    const double bin_hz = rate.hertz() / static_cast<double>(n_bins);
    for (std::size_t k = 0; k <= n_bins / 2; ++k) {
        const double pair_factor = (k == 0 || k == n_bins / 2) ? 1.0 : 2.0;
        const double amp = std::abs(buf[k]) * pair_factor / win_sum;
        spec.bins.push_back({static_cast<double>(k) * bin_hz, amplitude_to_db(amp)});
    }
    return spec;
}

Spectrum spectrum(const Waveform& w, std::size_t n_bins, Window window) {
    return spectrum(w.samples(), w.rate(), n_bins, window);
}

} // namespace qcars
