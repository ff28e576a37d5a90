// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

namespace qcars {

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 FFT. The length must be a power of two.
void fft(std::vector<std::complex<double>>& data);

/// Inverse of fft(), including the 1/N normalization.
void ifft(std::vector<std::complex<double>>& data);

} // namespace qcars
