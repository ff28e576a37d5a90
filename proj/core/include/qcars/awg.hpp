// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "qcars/signal.hpp"

namespace qcars {

inline constexpr int kAwgChannelCount = 8;
inline constexpr std::size_t kDefaultBramCapacity = 65536; // 64K samples per channel

struct TriggerSpec {
    double delay_ns = 0.0; // from the start of each pulse period
    double width_ns = 1.0;
};

struct TriggerEvent {
    double time_ns = 0.0;
    double width_ns = 0.0;
    int pulse_index = 0;
};

struct PlayMode {
    enum class Kind { continuous, fixed_count };
    Kind kind = Kind::fixed_count;
    int n_pulses = 1;

    static PlayMode continuous() { return {Kind::continuous, 1}; }
    static PlayMode fixed(int n_pulses);
};

/// Reference to a waveform stored in a channel's sample memory.
struct WaveformHandle {
    int channel = 0;
    int slot = 0;

    friend bool operator==(const WaveformHandle&, const WaveformHandle&) = default;
};

/// Per-channel sample memory. Each channel stores up to capacity_samples
/// codes in total across its loaded waveforms.
class BramBank {
  public:
    explicit BramBank(std::size_t capacity_samples = kDefaultBramCapacity)
        : capacity_samples_(capacity_samples) {}

    WaveformHandle load_waveform(int channel, QuantizedWaveform w);
    const QuantizedWaveform& stored(const WaveformHandle& h) const;
    std::size_t used_samples(int channel) const;
    std::size_t capacity_samples() const { return capacity_samples_; }
    void clear(int channel);

  private:
    std::size_t capacity_samples_;
    std::array<std::vector<QuantizedWaveform>, kAwgChannelCount> channels_;
};

/// Segment backed by stored samples, played `repeat` times back to back.
struct StoredSegment {
    WaveformHandle wave;
    int repeat = 1;
};

/// Constant-level segment produced by the internal counter; consumes no
/// sample memory, which is how inter-pulse gaps and long flat tops are played.
struct FlatSegment {
    double level = 0.0;
    double duration_ns = 0.0;
};

using Segment = std::variant<StoredSegment, FlatSegment>;

struct PulseSequence {
    std::vector<Segment> segments;
    TriggerSpec trigger;
    double period_ns = 0.0; // 0 = natural duration; otherwise pad with zeros
};

struct RenderResult {
    IqStream stream;
    std::vector<TriggerEvent> triggers;
};

/// One rendered segment: either final-amplitude samples or a described gap.
struct RenderedSegment {
    std::vector<double> samples; // empty for zero-level flat segments
    double duration_ns = 0.0;
    bool is_flat = false;
    double level = 0.0;
};

/// Playback duration of n_samples streamed at dac_rate / interp_factor, in ns.
double playtime_ns(std::size_t n_samples, SampleRate dac_rate, int interp_factor);

/// Sample-memory footprint of a sequence: unique stored segments only.
std::size_t bram_usage(const PulseSequence& seq, const BramBank& bank);

double sequence_duration_ns(const PulseSequence& seq, const BramBank& bank, SampleRate rate);

/// Expands segments to final-amplitude sample blocks. Stored samples are
/// dequantized, scaled by scale_percent/100 and requantized; flat levels are
/// emitted as given.
std::vector<RenderedSegment> render_segments(const PulseSequence& seq, const BramBank& bank,
                                             SampleRate rate, double scale_percent);

/// Emits the concatenated sample stream (I on the real part, Q zero) plus one
/// trigger event per pulse period. Continuous mode renders whole periods
/// until horizon_ns (at least one).
RenderResult render(const PulseSequence& seq, const BramBank& bank, SampleRate rate,
                    PlayMode mode, double scale_percent, double horizon_ns = 0.0);

/// Raw little-endian signed 16-bit sample file, one file per channel.
QuantizedWaveform read_raw_i16(const std::string& path, SampleRate rate,
                               int full_scale_bits = 14);
void write_raw_i16(const QuantizedWaveform& w, const std::string& path);

} // namespace qcars
