// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace qcars {

/// Power reported for bins with no signal content, in dB relative to full scale.
inline constexpr double kSpectrumFloorDb = -300.0;

/// Converter sample clock. Defaults follow the board configuration used
/// throughout: DACs at 6.144 GSPS, ADCs at 3.840 GSPS.
class SampleRate {
  public:
    explicit SampleRate(double hertz);

    static SampleRate dac_default() { return SampleRate(6.144e9); }
    static SampleRate adc_default() { return SampleRate(3.84e9); }

    double hertz() const { return hertz_; }
    double period_s() const { return 1.0 / hertz_; }
    double period_ns() const { return 1e9 / hertz_; }

    friend bool operator==(const SampleRate& a, const SampleRate& b) {
        return a.hertz_ == b.hertz_;
    }

  private:
    double hertz_;
};

/// Real-valued sample sequence, normalized to [-1, 1] full scale.
class Waveform {
  public:
    Waveform(std::vector<double> samples, SampleRate rate, double start_time_ns = 0.0);

    std::span<const double> samples() const { return samples_; }
    const SampleRate& rate() const { return rate_; }
    double start_time_ns() const { return start_time_ns_; }
    std::size_t size() const { return samples_.size(); }
    double duration_ns() const { return static_cast<double>(samples_.size()) * rate_.period_ns(); }

  private:
    std::vector<double> samples_;
    SampleRate rate_;
    double start_time_ns_;
};

/// Complex baseband sample sequence; real part carries I, imaginary part Q.
class IqStream {
  public:
    IqStream(std::vector<std::complex<double>> samples, SampleRate rate);

    std::span<const std::complex<double>> samples() const { return samples_; }
    const SampleRate& rate() const { return rate_; }
    std::size_t size() const { return samples_.size(); }
    double duration_ns() const { return static_cast<double>(samples_.size()) * rate_.period_ns(); }

  private:
    std::vector<std::complex<double>> samples_;
    SampleRate rate_;
};

/// Signed integer sample codes as stored in channel memory; two bytes per sample.
struct QuantizedWaveform {
    std::vector<std::int16_t> codes;
    SampleRate rate = SampleRate::dac_default();
    int full_scale_bits = 14;
};

/// One-sided power spectrum; frequencies strictly increasing, power in dBFS.
struct Spectrum {
    struct Bin {
        double freq_hz;
        double power_dbfs;
    };
    std::vector<Bin> bins;
};

enum class Window { rectangular, hann, flat_top };

/// Gaussian pulse envelope truncated to [0, duration], peak 1 at the center of
/// the sample grid. The sample count is round(duration * rate).
Waveform gaussian_envelope(double duration_ns, double sigma_ns, SampleRate rate);

/// Rounds samples to signed codes with full scale 2^(bits-1)-1, half away from zero.
QuantizedWaveform quantize(const Waveform& w, int full_scale_bits = 14);
QuantizedWaveform quantize(std::span<const double> samples, SampleRate rate,
                           int full_scale_bits = 14);

Waveform dequantize(const QuantizedWaveform& q);

/// Full-scale step of a code with the given bit width (1 / (2^(bits-1)-1)).
double quantization_step(int full_scale_bits);

/// Windowed power spectrum in dB relative to full scale. n_bins must be a
/// power of two and at least the waveform length; a bin-centered full-scale
/// tone reads 0 dBFS. Bins below the numerical floor clamp to kSpectrumFloorDb.
Spectrum spectrum(const Waveform& w, std::size_t n_bins, Window window = Window::hann);
Spectrum spectrum(std::span<const double> samples, SampleRate rate, std::size_t n_bins,
                  Window window = Window::hann);

/// Window coefficients of the given length.
std::vector<double> window_coefficients(Window window, std::size_t length);

double amplitude_to_db(double amplitude);
double db_to_amplitude(double db);

} // namespace qcars
