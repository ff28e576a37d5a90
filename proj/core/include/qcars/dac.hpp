// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qcars/signal.hpp"

namespace qcars {

/// Output-stage reconstruction waveform of the RF-DAC. NRZ holds each sample
/// for a full period and concentrates power in the first Nyquist zone; RTC
/// (mix mode) inverts the sample for the second half period, which moves the
/// power maximum into the second and third zones and nulls DC.
enum class ReconstructionMode { nrz, rtc };

struct NcoConfig {
    double freq_hz = 0.0;
    double phase_deg = 0.0; // [0, 360)
};

struct ResponseCurve {
    struct Point {
        double freq_hz;
        double mag_norm; // |R| / T, in [0, 1]
        double phase_rad;
    };
    std::vector<Point> points;
};

/// Idealized coaxial band-pass conditioning filter: flat passband with half
/// the ripple budget applied, hard stopband attenuation outside.
struct BandpassModel {
    double pass_lo_hz = 0.0;
    double pass_hi_hz = 0.0;
    double stopband_atten_db = 45.0;
    double passband_ripple_db = 1.0;
};

/// Digital upsampling by 1x, 2x, 4x or 8x with a half-band filter cascade.
/// Content below 80% of the input Nyquist is preserved within 0.1 dB and
/// stuffing images are suppressed by at least 60 dB.
IqStream interpolate(const IqStream& s, int factor);

/// Digital IQ mixer driven by the on-chip NCO:
/// y[k] = I[k] cos(2 pi f t_k + phi) - Q[k] sin(2 pi f t_k + phi).
Waveform nco_upconvert(const IqStream& s, const NcoConfig& nco);

/// Complex reconstruction transfer function R(omega):
///   NRZ: T exp(-i w T/2) sinc(w T/2)
///   RTC: T i exp(-i w T/2) sinc(w T/4) sin(w T/4)
/// with sinc(x) = sin(x)/x and T the converter period.
std::complex<double> reconstruction_response(double f_hz, SampleRate fs,
                                             ReconstructionMode mode);

/// |R| normalized by T; 1 at the NRZ DC limit.
double reconstruction_magnitude(double f_hz, SampleRate fs, ReconstructionMode mode);

/// Zone index of a frequency: floor(2 f / fs) + 1.
int nyquist_zone(double f_hz, SampleRate fs);

struct ZoneImage {
    double freq_hz;
    int zone;
};

/// Image frequencies of a first-zone signal in zones 1..n_zones:
/// odd zone z -> (z-1)/2 * fs + f, even zone z -> z/2 * fs - f.
std::vector<ZoneImage> zone_images(double f_signal_hz, SampleRate fs, int n_zones);

/// First-zone spectrum of the upconverted stream replicated into each zone
/// and weighted by the reconstruction magnitude at the image frequency.
Spectrum synthesize_output_spectrum(const IqStream& s, const NcoConfig& nco,
                                    ReconstructionMode mode, int n_zones,
                                    Window window = Window::hann);

struct InverseSincResult {
    IqStream stream;
    bool gain_clamped = false; // a requested gain above 20 dB was limited
};

/// Pre-emphasis flattening the synthesized magnitude across the target zone:
/// each frequency component is boosted by the ratio of the zone's maximum
/// reconstruction magnitude to the magnitude at its image frequency.
InverseSincResult inverse_sinc(const IqStream& s, SampleRate fs, ReconstructionMode mode,
                               int target_zone);

Spectrum apply_bandpass(const Spectrum& spec, const BandpassModel& bp);

/// Carrier power minus the largest spur outside +/-2 bins of the carrier.
double sfdr_db(const Spectrum& spec, double carrier_hz);

/// Analytic response over [0, fmax], n_points equally spaced samples.
ResponseCurve response_curve(SampleRate fs, ReconstructionMode mode, double fmax_hz,
                             int n_points);

struct ResponseProbe {
    double freq_hz; // snapped onto the probe grid
    double mag_db;  // 20 log10(|R|/T) measured from the reconstructed waveform
};

/// Independent route to the reconstruction response: synthesizes a first-zone
/// tone per requested frequency, reconstructs it as an oversampled hold
/// waveform and reads the image amplitude from its DFT. The residual hold
/// roll-off of the oversampled grid is divided out exactly.
std::vector<ResponseProbe> simulate_reconstruction_sweep(SampleRate fs, ReconstructionMode mode,
                                                         std::span<const double> freqs_hz,
                                                         int base_len = 4096,
                                                         int oversample = 32);

} // namespace qcars
