// SPDX-License-Identifier: Apache-2.0

#include "qcars/awg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "qcars/errors.hpp"

namespace qcars {

PlayMode PlayMode::fixed(int n_pulses) {
    if (n_pulses < 1)
        throw std::invalid_argument("fixed-count play mode needs at least one pulse");
    return {Kind::fixed_count, n_pulses};
}

WaveformHandle BramBank::load_waveform(int channel, QuantizedWaveform w) {
    if (channel < 0 || channel >= kAwgChannelCount)
        throw std::invalid_argument("channel must be in [0, 7]");
    auto& slots = channels_[static_cast<std::size_t>(channel)];
    const std::size_t used = used_samples(channel);
    if (used + w.codes.size() > capacity_samples_)
        throw CapacityError(used + w.codes.size(), capacity_samples_, channel);
    slots.push_back(std::move(w));
    return {channel, static_cast<int>(slots.size() - 1)};
}

const QuantizedWaveform& BramBank::stored(const WaveformHandle& h) const {
    if (h.channel < 0 || h.channel >= kAwgChannelCount)
        throw std::invalid_argument("invalid waveform handle channel");
    const auto& slots = channels_[static_cast<std::size_t>(h.channel)];
    if (h.slot < 0 || static_cast<std::size_t>(h.slot) >= slots.size())
        throw std::invalid_argument("invalid waveform handle slot");
    return slots[static_cast<std::size_t>(h.slot)];
}

std::size_t BramBank::used_samples(int channel) const {
    if (channel < 0 || channel >= kAwgChannelCount)
        throw std::invalid_argument("channel must be in [0, 7]");
    std::size_t used = 0;
    for (const auto& w : channels_[static_cast<std::size_t>(channel)])
        used += w.codes.size();
    return used;
}

void BramBank::clear(int channel) {
    if (channel < 0 || channel >= kAwgChannelCount)
        throw std::invalid_argument("channel must be in [0, 7]");
    channels_[static_cast<std::size_t>(channel)].clear();
}

double playtime_ns(std::size_t n_samples, SampleRate dac_rate, int interp_factor) {
    if (interp_factor != 1 && interp_factor != 2 && interp_factor != 4 && interp_factor != 8)
        throw std::invalid_argument("interpolation factor must be one of 1, 2, 4, 8");
    const double stream_rate = dac_rate.hertz() / interp_factor;
    return static_cast<double>(n_samples) / stream_rate * 1e9;
}

std::size_t bram_usage(const PulseSequence& seq, const BramBank& bank) {
    std::set<std::pair<int, int>> seen;
    std::size_t usage = 0;
    for (const auto& seg : seq.segments) {
        if (const auto* s = std::get_if<StoredSegment>(&seg)) {
            if (seen.insert({s->wave.channel, s->wave.slot}).second)
                usage += bank.stored(s->wave).codes.size();
        }
    }
    return usage;
}

namespace {

std::size_t flat_sample_count(const FlatSegment& f, SampleRate rate) {
    if (f.duration_ns < 0.0)
        throw std::invalid_argument("flat segment duration must be non-negative");
    return static_cast<std::size_t>(std::llround(f.duration_ns * 1e-9 * rate.hertz()));
}

std::size_t natural_sample_count(const PulseSequence& seq, const BramBank& bank,
                                 SampleRate rate) {
    std::size_t n = 0;
    for (const auto& seg : seq.segments) {
        if (const auto* s = std::get_if<StoredSegment>(&seg)) {
            if (s->repeat < 1)
                throw std::invalid_argument("stored segment repeat must be at least 1");
            const auto& w = bank.stored(s->wave);
            if (!(w.rate == rate))
                throw std::invalid_argument("stored waveform rate differs from stream rate");
            n += w.codes.size() * static_cast<std::size_t>(s->repeat);
        } else {
            n += flat_sample_count(std::get<FlatSegment>(seg), rate);
        }
    }
    return n;
}

} // namespace

double sequence_duration_ns(const PulseSequence& seq, const BramBank& bank, SampleRate rate) {
    const double natural =
        static_cast<double>(natural_sample_count(seq, bank, rate)) * rate.period_ns();
    return std::max(natural, seq.period_ns);
}

std::vector<RenderedSegment> render_segments(const PulseSequence& seq, const BramBank& bank,
                                             SampleRate rate, double scale_percent) {
    if (seq.segments.empty())
        throw std::invalid_argument("pulse sequence has no segments");
    if (!(scale_percent >= 0.0 && scale_percent <= 100.0))
        throw std::invalid_argument("scale percent must be in [0, 100]");
    const double scale = scale_percent / 100.0;

    std::vector<RenderedSegment> out;
    out.reserve(seq.segments.size());
    for (const auto& seg : seq.segments) {
        RenderedSegment rs;
        if (const auto* s = std::get_if<StoredSegment>(&seg)) {
            const auto& w = bank.stored(s->wave);
            if (!(w.rate == rate))
                throw std::invalid_argument("stored waveform rate differs from stream rate");
            const double step = quantization_step(w.full_scale_bits);
            const double full_scale = 1.0 / step;
            std::vector<double> block;
            block.reserve(w.codes.size());
            // The scaler operates on dequantized values and requantizes, so a
            // 100% scale reproduces the stored codes exactly.
            for (std::int16_t c : w.codes) {
                const auto scaled =
                    std::llround(static_cast<double>(c) * step * scale * full_scale);
                block.push_back(static_cast<double>(scaled) * step);
            }
            rs.samples.reserve(block.size() * static_cast<std::size_t>(s->repeat));
            for (int r = 0; r < s->repeat; ++r)
                rs.samples.insert(rs.samples.end(), block.begin(), block.end());
            rs.duration_ns = static_cast<double>(rs.samples.size()) * rate.period_ns();
        } else {
            const auto& f = std::get<FlatSegment>(seg);
            rs.is_flat = true;
            rs.level = f.level;
            const std::size_t n = flat_sample_count(f, rate);
            rs.duration_ns = static_cast<double>(n) * rate.period_ns();
            if (f.level != 0.0)
                rs.samples.assign(n, f.level);
            else
                rs.duration_ns = f.duration_ns; // zero gaps keep their exact length
        }
        out.push_back(std::move(rs));
    }
    return out;
}

RenderResult render(const PulseSequence& seq, const BramBank& bank, SampleRate rate,
                    PlayMode mode, double scale_percent, double horizon_ns) {
    const auto segments = render_segments(seq, bank, rate, scale_percent);

    std::size_t natural = natural_sample_count(seq, bank, rate);
    std::size_t period_samples = natural;
    if (seq.period_ns > 0.0) {
        const auto requested =
            static_cast<std::size_t>(std::llround(seq.period_ns * 1e-9 * rate.hertz()));
        period_samples = std::max(period_samples, requested);
    }
    if (period_samples == 0)
        throw std::invalid_argument("pulse sequence has zero duration");

    int n_pulses = 1;
    if (mode.kind == PlayMode::Kind::fixed_count) {
        n_pulses = mode.n_pulses;
    } else if (horizon_ns > 0.0) {
        const double period_ns = static_cast<double>(period_samples) * rate.period_ns();
        n_pulses = std::max(1, static_cast<int>(horizon_ns / period_ns));
    }

    std::vector<std::complex<double>> stream;
    stream.reserve(period_samples * static_cast<std::size_t>(n_pulses));
    std::vector<TriggerEvent> triggers;
    triggers.reserve(static_cast<std::size_t>(n_pulses));

    const double period_ns = static_cast<double>(period_samples) * rate.period_ns();
    for (int p = 0; p < n_pulses; ++p) {
        const std::size_t start = stream.size();
        for (const auto& rs : segments) {
            if (!rs.samples.empty()) {
                for (double v : rs.samples)
                    stream.emplace_back(v, 0.0);
            } else if (rs.is_flat) {
                const auto n = static_cast<std::size_t>(
                    std::llround(rs.duration_ns * 1e-9 * rate.hertz()));
                stream.insert(stream.end(), n, std::complex<double>(0.0, 0.0));
            }
        }
        stream.resize(start + period_samples, std::complex<double>(0.0, 0.0));
        triggers.push_back(
            {static_cast<double>(p) * period_ns + seq.trigger.delay_ns, seq.trigger.width_ns, p});
    }

    return {IqStream(std::move(stream), rate), std::move(triggers)};
}

QuantizedWaveform read_raw_i16(const std::string& path, SampleRate rate, int full_scale_bits) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open waveform file: " + path);
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % 2 != 0)
        throw std::runtime_error("waveform file has an odd byte count: " + path);

    QuantizedWaveform w;
    w.rate = rate;
    w.full_scale_bits = full_scale_bits;
    w.codes.reserve(raw.size() / 2);
    for (std::size_t i = 0; i + 1 < raw.size(); i += 2) {
        const auto lo = static_cast<std::uint16_t>(static_cast<std::uint8_t>(raw[i]));
        const auto hi = static_cast<std::uint16_t>(static_cast<std::uint8_t>(raw[i + 1]));
        w.codes.push_back(static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8))));
    }
    return w;
}

void write_raw_i16(const QuantizedWaveform& w, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write waveform file: " + path);
    for (std::int16_t c : w.codes) {
        const auto u = static_cast<std::uint16_t>(c);
        const char bytes[2] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff)};
        out.write(bytes, 2);
    }
}

} // namespace qcars
