// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qcars/awg.hpp"
#include "qcars/signal.hpp"

namespace qcars {

/// Tunable low-pass filter settings: cascade of `order` identical one-pole
/// sections, calibrated so the cascade is -3 dB at cutoff_mhz.
struct IirConfig {
    double cutoff_mhz = 0.53;
    int order = 1;
};

struct RotationConfig {
    double theta_deg = 0.0;
};

/// Trigger-framed slice of the processed stream.
struct CaptureRecord {
    IqStream iq;
    double trigger_time_ns = 0.0;
    int channel = 0;
    int record_index = 0;
};

struct AliasResult {
    double image_hz;
    int zone;
};

/// First-zone image of a signal sampled at fs: zone floor(2 f / fs) + 1,
/// image f mod fs reflected off the Nyquist edge when needed.
AliasResult alias_fold(double f_in_hz, SampleRate fs);

/// NCO down-mix of a real input: I = s cos(2 pi f t + phi), Q = -s sin(...).
IqStream downmix(const Waveform& s, double nco_f_hz, double phase_deg = 0.0);
/// Complex variant: multiplies by exp(-i (2 pi f t + phi)).
IqStream downmix(const IqStream& s, double nco_f_hz, double phase_deg = 0.0);

/// Rate reduction by 1, 2, 4 or 8 with anti-alias filtering (>= 60 dB above
/// the new Nyquist).
IqStream decimate(const IqStream& s, int factor);

IqStream iir_lowpass(const IqStream& s, const IirConfig& cfg);

/// Trailing mean over `window` samples with zero-padded warm-up.
IqStream moving_average(const IqStream& s, int window);

/// Lock-in style phase alignment:
///   i' =  i cos(theta) + q sin(theta)
///   q' = -i sin(theta) + q cos(theta)
std::complex<double> rotate(std::complex<double> iq, const RotationConfig& cfg);
IqStream rotate(const IqStream& s, const RotationConfig& cfg);

/// One fixed-length record per trigger, starting at the trigger time.
/// Overlapping windows raise FramingError; a window past the end of the
/// stream raises TruncationError.
std::vector<CaptureRecord> capture(const IqStream& s, const std::vector<TriggerEvent>& triggers,
                                   double window_ns, int channel = 0);

/// Per-record time mean, then the mean across records.
std::complex<double> average_records(const std::vector<CaptureRecord>& records);

/// Record dump: CSV rows `record_index, sample_index, i, q`.
void write_records_csv(const std::vector<CaptureRecord>& records, const std::string& path);

} // namespace qcars
