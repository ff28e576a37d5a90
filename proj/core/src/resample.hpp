// SPDX-License-Identifier: Apache-2.0
//
// Internal resampling kernels shared by the DAC and readout pipelines.
// Not part of the installed interface.

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qcars::detail {

void check_resample_factor(int factor);

/// One half-band 2x upsampling stage. Input samples pass through unchanged on
/// the even output phase; midpoints come from a Kaiser-windowed half-band
/// kernel normalized for exact DC gain.
std::vector<std::complex<double>> upsample2(std::span<const std::complex<double>> x);

/// One 2x decimation stage: Kaiser-windowed anti-alias lowpass (>= 60 dB
/// above the new Nyquist, passband flat to 80% of it) followed by downsampling.
std::vector<std::complex<double>> downsample2(std::span<const std::complex<double>> x);

} // namespace qcars::detail
