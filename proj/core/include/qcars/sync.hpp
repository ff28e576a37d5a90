// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qcars/awg.hpp"
#include "qcars/histogram.hpp"

namespace qcars {

/// Converter packaging: DACs in 2 tiles of 4 channels, ADCs in 4 tiles of 2.
struct TileTopology {
    int dac_tiles = 2;
    int dac_per_tile = 4;
    int adc_tiles = 4;
    int adc_per_tile = 2;

    int dac_tile_of(int channel) const;
    int adc_tile_of(int channel) const;
};

struct LatencyConfig {
    int interp_factor = 8;
    int decim_factor = 4;
    double fpga_clock_hz = 192e6;
    bool mixers_enabled = true;
};

struct JitterModel {
    double sigma_ps = 0.6;
    double sample_interval_us = 100.0;
    int n_samples = 4000;
};

/// Per-tile FIFO startup offsets in clock cycles. Channels of a tile share
/// the clocking infrastructure, so they always report the tile's offset.
struct TileOffsets {
    std::vector<int> dac_tile_cycles;
    std::vector<int> adc_tile_cycles;

    int dac_channel_offset(int channel, const TileTopology& topo = {}) const;
    int adc_channel_offset(int channel, const TileTopology& topo = {}) const;
    int max_offset() const;
    int max_skew() const;
};

/// Draws one FIFO offset per tile from [0, 3]; reproducible per seed.
TileOffsets assign_tile_offsets(const TileTopology& topo, std::uint64_t seed);

/// Multi-tile alignment: every tile is padded up to the slowest FIFO, so all
/// channels report one common offset and the relative skew is zero.
TileOffsets run_mts(TileOffsets offsets);

/// Adds an independent Gaussian draw (mean 0, std sigma_ps) to each event
/// time; deterministic per seed.
std::vector<TriggerEvent> inject_jitter(std::vector<TriggerEvent> events, const JitterModel& jm,
                                        std::uint64_t seed);

/// Channel-to-channel jitter observations in picoseconds, n_samples draws.
std::vector<double> sample_channel_jitter(const JitterModel& jm, std::uint64_t seed);

struct LatencyReport {
    int cycles = 0;
    int dac_cycles = 0;
    int adc_cycles = 0;
    double ns = 0.0;
    bool extrapolated = false; // true away from the measured anchor point
};

/// Round-trip pipeline latency in FPGA cycles and ns. The 8x-interpolation,
/// 4x-decimation, mixers-on configuration is the measured anchor at 48 cycles
/// (24 per converter half); other factor combinations follow a documented
/// linear model in log2(factor) and are flagged as extrapolated.
LatencyReport roundtrip_latency(const LatencyConfig& cfg);

/// Histogram with the unbiased sample standard deviation; needs >= 2 samples.
Histogram jitter_histogram(std::span<const double> samples_ps, int n_bins);

} // namespace qcars
