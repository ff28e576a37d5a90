// SPDX-License-Identifier: Apache-2.0

#include "qcars/readout.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "qcars/errors.hpp"
#include "resample.hpp"

namespace qcars {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

AliasResult alias_fold(double f_in_hz, SampleRate fs) {
    if (f_in_hz < 0.0)
        throw std::invalid_argument("alias folding is defined for f >= 0");
    const double fs_hz = fs.hertz();
    const int zone = static_cast<int>(std::floor(2.0 * f_in_hz / fs_hz)) + 1;
    double m = std::fmod(f_in_hz, fs_hz);
    if (m > 0.5 * fs_hz)
        m = fs_hz - m;
    return {m, zone};
}

IqStream downmix(const Waveform& s, double nco_f_hz, double phase_deg) {
    if (!(nco_f_hz >= 0.0 && nco_f_hz < 0.5 * s.rate().hertz()))
        throw std::invalid_argument("down-mix NCO must lie below the Nyquist frequency");
    const double phi = phase_deg * std::numbers::pi / 180.0;
    const double dt = s.rate().period_s();

    std::vector<std::complex<double>> out;
    out.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double arg = kTwoPi * nco_f_hz * (static_cast<double>(k) * dt) + phi;
        const double v = s.samples()[k];
        out.emplace_back(v * std::cos(arg), -v * std::sin(arg));
    }
    return IqStream(std::move(out), s.rate());
}

IqStream downmix(const IqStream& s, double nco_f_hz, double phase_deg) {
    if (!(nco_f_hz >= 0.0 && nco_f_hz < 0.5 * s.rate().hertz()))
        throw std::invalid_argument("down-mix NCO must lie below the Nyquist frequency");
    const double phi = phase_deg * std::numbers::pi / 180.0;
    const double dt = s.rate().period_s();

    std::vector<std::complex<double>> out;
    out.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double arg = kTwoPi * nco_f_hz * (static_cast<double>(k) * dt) + phi;
        out.push_back(s.samples()[k] * std::exp(std::complex<double>(0.0, -arg)));
    }
    return IqStream(std::move(out), s.rate());
}

IqStream decimate(const IqStream& s, int factor) {
    detail::check_resample_factor(factor);
    std::vector<std::complex<double>> data(s.samples().begin(), s.samples().end());
    for (int f = factor; f > 1; f /= 2)
        data = detail::downsample2(data);
    return IqStream(std::move(data), SampleRate(s.rate().hertz() / factor));
}

IqStream iir_lowpass(const IqStream& s, const IirConfig& cfg) {
    if (cfg.order < 1)
        throw std::invalid_argument("IIR order must be at least 1");
    const double fs_hz = s.rate().hertz();
    const double cutoff_hz = cfg.cutoff_mhz * 1e6;
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * fs_hz))
        throw std::invalid_argument("IIR cutoff must lie strictly below the Nyquist frequency");

    // Identical one-pole sections via the bilinear transform. Each section is
    // detuned so the n-section cascade reaches half power at the requested
    // cutoff: |H1|^2 = 2^(-1/n) there.
    const double half_power_ratio = std::sqrt(std::pow(2.0, 1.0 / cfg.order) - 1.0);
    const double warped = std::tan(std::numbers::pi * cutoff_hz / fs_hz) / half_power_ratio;
    const double b0 = warped / (1.0 + warped);
    const double a1 = (1.0 - warped) / (1.0 + warped);

    std::vector<std::complex<double>> data(s.samples().begin(), s.samples().end());
    for (int stage = 0; stage < cfg.order; ++stage) {
        std::complex<double> prev_in(0.0, 0.0);
        std::complex<double> prev_out(0.0, 0.0);
        for (auto& v : data) {
            const std::complex<double> in = v;
            v = b0 * (in + prev_in) + a1 * prev_out;
            prev_in = in;
            prev_out = v;
        }
    }
    return IqStream(std::move(data), s.rate());
}

IqStream moving_average(const IqStream& s, int window) {
    if (window < 1)
        throw std::invalid_argument("moving-average window must be at least 1");

    std::vector<std::complex<double>> out;
    out.reserve(s.size());
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) {
        acc += s.samples()[k];
        if (k >= static_cast<std::size_t>(window))
            acc -= s.samples()[k - static_cast<std::size_t>(window)];
        out.push_back(acc / static_cast<double>(window));
    }
    return IqStream(std::move(out), s.rate());
}

std::complex<double> rotate(std::complex<double> iq, const RotationConfig& cfg) {
    const double theta = cfg.theta_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {iq.real() * c + iq.imag() * s, -iq.real() * s + iq.imag() * c};
}

IqStream rotate(const IqStream& s, const RotationConfig& cfg) {
    std::vector<std::complex<double>> out;
    out.reserve(s.size());
    for (const auto& v : s.samples())
        out.push_back(rotate(v, cfg));
    return IqStream(std::move(out), s.rate());
}

std::vector<CaptureRecord> capture(const IqStream& s, const std::vector<TriggerEvent>& triggers,
                                   double window_ns, int channel) {
    if (!(window_ns > 0.0))
        throw std::invalid_argument("capture window must be positive");
    const double rate_hz = s.rate().hertz();
    const auto length = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(window_ns * 1e-9 * rate_hz)));

    std::vector<CaptureRecord> records;
    records.reserve(triggers.size());
    long long prev_end = -1;
    for (std::size_t i = 0; i < triggers.size(); ++i) {
        const auto start = static_cast<long long>(
            std::llround(triggers[i].time_ns * 1e-9 * rate_hz));
        if (start < prev_end)
            throw FramingError(static_cast<int>(i) - 1, static_cast<int>(i));
        if (start < 0 || static_cast<std::size_t>(start) + length > s.size())
            throw TruncationError(static_cast<int>(i));
        prev_end = start + static_cast<long long>(length);

        std::vector<std::complex<double>> slice(
            s.samples().begin() + start,
            s.samples().begin() + start + static_cast<long long>(length));
        records.push_back({IqStream(std::move(slice), s.rate()), triggers[i].time_ns, channel,
                           static_cast<int>(i)});
    }
    return records;
}

std::complex<double> average_records(const std::vector<CaptureRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("cannot average zero records");
    const std::size_t len = records.front().iq.size();
    std::complex<double> acc(0.0, 0.0);
    for (const auto& rec : records) {
        if (rec.iq.size() != len)
            throw std::invalid_argument("records have mismatched lengths");
        std::complex<double> sum(0.0, 0.0);
        for (const auto& v : rec.iq.samples())
            sum += v;
        acc += sum / static_cast<double>(len);
    }
    return acc / static_cast<double>(records.size());
}

void write_records_csv(const std::vector<CaptureRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write records file: " + path);
    out << "record_index,sample_index,i,q\n";
    char line[128];
    for (const auto& rec : records) {
        for (std::size_t k = 0; k < rec.iq.size(); ++k) {
            const auto& v = rec.iq.samples()[k];
            std::snprintf(line, sizeof(line), "%d,%zu,%.9g,%.9g\n", rec.record_index, k,
                          v.real(), v.imag());
            out << line;
        }
    }
}

} // namespace qcars
