// SPDX-License-Identifier: Apache-2.0

#include "qcars/sync.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qcars {

int TileTopology::dac_tile_of(int channel) const {
    if (channel < 0 || channel >= dac_tiles * dac_per_tile)
        throw std::invalid_argument("DAC channel out of range");
    return channel / dac_per_tile;
}

int TileTopology::adc_tile_of(int channel) const {
    if (channel < 0 || channel >= adc_tiles * adc_per_tile)
        throw std::invalid_argument("ADC channel out of range");
    return channel / adc_per_tile;
}

int TileOffsets::dac_channel_offset(int channel, const TileTopology& topo) const {
    return dac_tile_cycles.at(static_cast<std::size_t>(topo.dac_tile_of(channel)));
}

int TileOffsets::adc_channel_offset(int channel, const TileTopology& topo) const {
    return adc_tile_cycles.at(static_cast<std::size_t>(topo.adc_tile_of(channel)));
}

int TileOffsets::max_offset() const {
    int best = 0;
    for (int v : dac_tile_cycles)
        best = std::max(best, v);
    for (int v : adc_tile_cycles)
        best = std::max(best, v);
    return best;
}

int TileOffsets::max_skew() const {
    int lo = max_offset();
    int hi = 0;
    for (int v : dac_tile_cycles) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (int v : adc_tile_cycles) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

TileOffsets assign_tile_offsets(const TileTopology& topo, std::uint64_t seed) {
    if (topo.dac_tiles < 1 || topo.adc_tiles < 1 || topo.dac_per_tile < 1 ||
        topo.adc_per_tile < 1)
        throw std::invalid_argument("tile topology must have at least one tile per converter");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> offset(0, 3);

    TileOffsets out;
    out.dac_tile_cycles.resize(static_cast<std::size_t>(topo.dac_tiles));
    out.adc_tile_cycles.resize(static_cast<std::size_t>(topo.adc_tiles));
    for (auto& v : out.dac_tile_cycles)
        v = offset(rng);
    for (auto& v : out.adc_tile_cycles)
        v = offset(rng);
    return out;
}

TileOffsets run_mts(TileOffsets offsets) {
    const int target = offsets.max_offset();
    for (auto& v : offsets.dac_tile_cycles)
        v = target;
    for (auto& v : offsets.adc_tile_cycles)
        v = target;
    return offsets;
}

std::vector<TriggerEvent> inject_jitter(std::vector<TriggerEvent> events, const JitterModel& jm,
                                        std::uint64_t seed) {
    if (!(jm.sigma_ps >= 0.0))
        throw std::invalid_argument("jitter sigma must be non-negative");
    if (jm.sigma_ps == 0.0)
        return events;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, jm.sigma_ps * 1e-3); // ps -> ns
    for (auto& ev : events)
        ev.time_ns += noise(rng);
    return events;
}

std::vector<double> sample_channel_jitter(const JitterModel& jm, std::uint64_t seed) {
    if (jm.n_samples < 1)
        throw std::invalid_argument("jitter sampling needs at least one draw");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, jm.sigma_ps);
    std::vector<double> out(static_cast<std::size_t>(jm.n_samples));
    for (auto& v : out)
        v = noise(rng);
    return out;
}

LatencyReport roundtrip_latency(const LatencyConfig& cfg) {
    const auto log2_factor = [](int factor) {
        switch (factor) {
        case 1:
            return 0;
        case 2:
            return 1;
        case 4:
            return 2;
        case 8:
            return 3;
        default:
            throw std::invalid_argument("pipeline factor must be one of 1, 2, 4, 8");
        }
    };
    const int li = log2_factor(cfg.interp_factor);
    const int ld = log2_factor(cfg.decim_factor);
    if (!(cfg.fpga_clock_hz > 0.0))
        throw std::invalid_argument("FPGA clock must be positive");

    // Anchor: interp 8x, decim 4x, mixers on -> 24 + 24 = 48 cycles. Away
    // from the anchor the per-half cycle counts extrapolate linearly in
    // log2(factor) with 4 cycles per octave and 2 cycles per mixer.
    const int mixer = cfg.mixers_enabled ? 2 : 0;
    LatencyReport rep;
    rep.dac_cycles = 10 + 4 * li + mixer;
    rep.adc_cycles = 14 + 4 * ld + mixer;
    rep.cycles = rep.dac_cycles + rep.adc_cycles;
    rep.ns = static_cast<double>(rep.cycles) / cfg.fpga_clock_hz * 1e9;
    rep.extrapolated = !(cfg.interp_factor == 8 && cfg.decim_factor == 4 && cfg.mixers_enabled);
    return rep;
}

Histogram jitter_histogram(std::span<const double> samples_ps, int n_bins) {
    if (samples_ps.size() < 2)
        throw std::invalid_argument("jitter histogram needs at least two samples");
    return make_histogram(samples_ps, n_bins);
}

} // namespace qcars
