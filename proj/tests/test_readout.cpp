// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcars/errors.hpp"
#include "qcars/readout.hpp"
#include "qcars/signal.hpp"

using namespace qcars;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Waveform real_tone(double f_hz, double amplitude, std::size_t n, SampleRate rate) {
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k)
        s[k] = amplitude * std::cos(kTwoPi * f_hz * static_cast<double>(k) * rate.period_s());
    return Waveform(std::move(s), rate);
}

IqStream complex_exponential(double f_hz, double amplitude, std::size_t n, SampleRate rate) {
    std::vector<std::complex<double>> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double arg = kTwoPi * f_hz * static_cast<double>(k) * rate.period_s();
        s[k] = amplitude * std::complex<double>(std::cos(arg), std::sin(arg));
    }
    return IqStream(std::move(s), rate);
}

std::complex<double> tail_mean(const IqStream& s) {
    std::complex<double> acc(0.0, 0.0);
    const std::size_t start = s.size() / 2;
    for (std::size_t k = start; k < s.size(); ++k)
        acc += s.samples()[k];
    return acc / static_cast<double>(s.size() - start);
}

// Steady-state amplitude of a tone in the stream, measured lock-in style
// over the second half to skip the filter transient.
double tone_amplitude(const IqStream& s, double f_hz) {
    std::complex<double> acc(0.0, 0.0);
    const std::size_t start = s.size() / 2;
    for (std::size_t k = start; k < s.size(); ++k) {
        const double arg = kTwoPi * f_hz * static_cast<double>(k) * s.rate().period_s();
        acc += s.samples()[k] * std::exp(std::complex<double>(0.0, -arg));
    }
    return std::abs(acc) / static_cast<double>(s.size() - start);
}

} // namespace

TEST_SUITE("readout") {

TEST_CASE("alias folding matches the zone arithmetic") {
    const SampleRate fs(4.096e9);
    const auto a = alias_fold(6000e6, fs);
    CHECK(a.image_hz == 1904e6);
    CHECK(a.zone == 3);

    const auto b = alias_fold(1000e6, fs);
    CHECK(b.image_hz == 1000e6);
    CHECK(b.zone == 1);

    const auto c = alias_fold(3000e6, fs);
    CHECK(c.image_hz == 1096e6);
    CHECK(c.zone == 2);
}

TEST_CASE("alias folding is idempotent on first-zone frequencies") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const SampleRate fs(1e9 + 9e9 * u(rng));
        const double f = 0.4999 * fs.hertz() * u(rng);
        const auto once = alias_fold(f, fs);
        const auto twice = alias_fold(once.image_hz, fs);
        CHECK(once.image_hz == twice.image_hz);
        CHECK(twice.zone == 1);
    }
}

TEST_CASE("down-mix of a tone at the oscillator frequency is DC") {
    const SampleRate rate(3.84e9);
    const double f = 240e6;
    const auto s = real_tone(f, 0.8, 16384, rate);
    const auto mixed = downmix(s, f, 0.0);
    const auto filtered = iir_lowpass(mixed, {20.0, 2});
    const auto dc = tail_mean(filtered);
    CHECK(std::abs(dc) == doctest::Approx(0.8 / 2.0).epsilon(1e-3));
    CHECK(std::abs(dc.imag()) < 1e-3);
}

TEST_CASE("down-mix offset tones beat at the difference frequency") {
    const SampleRate rate(3.84e9);
    const double f_nco = 240e6;
    const double f_beat = 1.875e6; // bin-centered at n = 16384? 3.84e9/2048
    const auto s = real_tone(f_nco + f_beat, 0.5, 32768, rate);
    const auto mixed = downmix(s, f_nco, 0.0);
    // The complex envelope should rotate at f_beat with magnitude a/2.
    CHECK(tone_amplitude(mixed, f_beat) == doctest::Approx(0.25).epsilon(1e-2));

    const auto silent = downmix(real_tone(f_nco, 0.0, 256, rate), f_nco, 0.0);
    for (const auto& v : silent.samples())
        CHECK(std::abs(v) == 0.0);
}

TEST_CASE("decimation identities and tone preservation") {
    const SampleRate rate(3.84e9);
    const auto s = complex_exponential(1.875e6, 0.6, 4096, rate);
    const auto same = decimate(s, 1);
    CHECK(same.size() == s.size());

    const IqStream dc(std::vector<std::complex<double>>(1024, {0.33, -0.41}), rate);
    const auto dec_dc = decimate(dc, 4);
    CHECK(dec_dc.size() == 256);
    CHECK(dec_dc.rate().hertz() == doctest::Approx(0.96e9));
    for (const auto& v : dec_dc.samples())
        CHECK(std::abs(v - std::complex<double>(0.33, -0.41)) < 1e-9);

    // 1 MHz tone at 3.84 GSPS survives 4x decimation within 0.1 dB.
    const double f = 1e6;
    const auto tone = complex_exponential(f, 0.7, 65536, rate);
    const auto dec = decimate(tone, 4);
    const double before = tone_amplitude(tone, f);
    const double after = tone_amplitude(dec, f);
    CHECK(20.0 * std::log10(after / before) == doctest::Approx(0.0).epsilon(0.1));

    CHECK_THROWS_AS(decimate(s, 5), std::invalid_argument);
}

TEST_CASE("decimation suppresses aliases above the new Nyquist") {
    const SampleRate rate(3.84e9);
    // A tone at 0.35 of the input rate folds to -0.15 after 2x decimation;
    // the anti-alias filter must hold the residual 60 dB down.
    const double f = 0.35 * rate.hertz();
    const auto tone = complex_exponential(f, 1.0, 32768, rate);
    const auto dec = decimate(tone, 2);
    const double alias = tone_amplitude(dec, f - 0.5 * rate.hertz());
    CHECK(20.0 * std::log10(alias + 1e-300) <= -60.0);
}

TEST_CASE("iir cascade hits the configured cutoff") {
    const SampleRate rate(245.76e6);
    const IirConfig cfg{0.53, 1};
    const double fc = 0.53e6;

    // -3 dB at the cutoff, measured against the input amplitude.
    const auto probe = complex_exponential(fc, 1.0, 1 << 17, rate);
    const auto out = iir_lowpass(probe, cfg);
    const double gain_db = 20.0 * std::log10(tone_amplitude(out, fc) / 1.0);
    CHECK(gain_db == doctest::Approx(-3.0103).epsilon(0.02));

    // First-order rolloff: a decade above the cutoff sits 20 dB down.
    const auto high = complex_exponential(10.0 * fc, 1.0, 1 << 17, rate);
    const double hi_db =
        20.0 * std::log10(tone_amplitude(iir_lowpass(high, cfg), 10.0 * fc));
    CHECK(hi_db == doctest::Approx(-20.0).epsilon(0.05));
}

TEST_CASE("iir dc gain is one") {
    const SampleRate rate(245.76e6);
    const IqStream dc(std::vector<std::complex<double>>(1 << 16, {1.0, 0.0}), rate);
    for (int order : {1, 2, 4}) {
        const auto out = iir_lowpass(dc, {0.53, order});
        CHECK(std::abs(out.samples().back() - std::complex<double>(1.0, 0.0)) < 1e-6);
    }
}

TEST_CASE("iir validates its configuration") {
    const SampleRate rate(2e6);
    const IqStream s(std::vector<std::complex<double>>(64, {0.1, 0.0}), rate);
    CHECK_THROWS_AS(iir_lowpass(s, {1.5, 1}), std::invalid_argument); // above Nyquist
    CHECK_THROWS_AS(iir_lowpass(s, {0.1, 0}), std::invalid_argument);
}

TEST_CASE("moving average behavior") {
    const SampleRate rate(1e9);
    std::vector<std::complex<double>> alt;
    for (int i = 0; i < 64; ++i)
        alt.emplace_back(i % 2 == 0 ? 1.0 : -1.0, 0.0);
    const IqStream s(std::move(alt), rate);

    const auto identity = moving_average(s, 1);
    for (std::size_t k = 0; k < s.size(); ++k)
        CHECK(identity.samples()[k] == s.samples()[k]);

    const auto smoothed = moving_average(s, 2);
    for (std::size_t k = 1; k < smoothed.size(); ++k)
        CHECK(std::abs(smoothed.samples()[k]) == 0.0);

    const IqStream constant(std::vector<std::complex<double>>(32, {0.5, 0.25}), rate);
    const auto avg = moving_average(constant, 8);
    for (std::size_t k = 8; k < avg.size(); ++k)
        CHECK(std::abs(avg.samples()[k] - std::complex<double>(0.5, 0.25)) < 1e-12);

    CHECK_THROWS_AS(moving_average(s, 0), std::invalid_argument);
}

TEST_CASE("rotation matrix spot values") {
    CHECK(rotate({1.0, 0.0}, {0.0}) == std::complex<double>(1.0, 0.0));

    const auto quarter = rotate({1.0, 0.0}, {90.0});
    CHECK(quarter.real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(quarter.imag() == doctest::Approx(-1.0).epsilon(1e-12));

    const auto aligned = rotate({1.0, 1.0}, {45.0});
    CHECK(aligned.real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(aligned.imag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rotation preserves the quadrature norm and inverts cleanly") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const std::complex<double> v{u(rng), u(rng)};
        const double theta = 360.0 * u(rng);
        const auto w = rotate(v, {theta});
        CHECK(std::norm(w) == doctest::Approx(std::norm(v)).epsilon(1e-12));
        const auto back = rotate(w, {-theta});
        CHECK(std::abs(back - v) < 1e-12);
    }
}

TEST_CASE("capture frames records on triggers") {
    const SampleRate rate(240e6);
    const std::size_t n = 4096;
    std::vector<std::complex<double>> data(n);
    for (std::size_t k = 0; k < n; ++k)
        data[k] = {static_cast<double>(k), 0.0};
    const IqStream s(std::move(data), rate);

    std::vector<TriggerEvent> triggers{{0.0, 4000.0, 0}, {5000.0, 4000.0, 1},
                                       {10000.0, 4000.0, 2}};
    const auto records = capture(s, triggers, 4000.0, 3);
    REQUIRE(records.size() == 3);
    for (const auto& r : records) {
        CHECK(r.iq.size() == 960); // 4000 ns at 240 MSPS
        CHECK(r.channel == 3);
    }
    CHECK(records[1].iq.samples()[0].real() == doctest::Approx(1200.0)); // 5 us at 240 MSPS

    // Overlapping windows must be loud.
    std::vector<TriggerEvent> overlapping{{0.0, 4000.0, 0}, {2000.0, 4000.0, 1}};
    CHECK_THROWS_AS(capture(s, overlapping, 4000.0), FramingError);

    // A window off the end of the stream names its record.
    std::vector<TriggerEvent> late{{16000.0, 4000.0, 0}};
    CHECK_THROWS_WITH_AS(capture(s, late, 4000.0),
                         "record 0 extends past the end of the stream", TruncationError);
    CHECK_THROWS_AS(capture(s, triggers, 0.0), std::invalid_argument);
}

TEST_CASE("record averaging") {
    const SampleRate rate(240e6);
    const auto make_record = [&](double i, double q, int idx) {
        return CaptureRecord{IqStream(std::vector<std::complex<double>>(16, {i, q}), rate), 0.0,
                             0, idx};
    };
    const std::vector<CaptureRecord> symmetric{make_record(1.0, 0.0, 0),
                                               make_record(-1.0, 0.0, 1)};
    CHECK(average_records(symmetric) == std::complex<double>(0.0, 0.0));

    const std::vector<CaptureRecord> identical{make_record(0.25, -0.5, 0),
                                               make_record(0.25, -0.5, 1)};
    CHECK(average_records(identical) == std::complex<double>(0.25, -0.5));

    std::vector<CaptureRecord> mismatched{make_record(1.0, 0.0, 0)};
    mismatched.push_back(
        {IqStream(std::vector<std::complex<double>>(8, {1.0, 0.0}), rate), 0.0, 0, 1});
    CHECK_THROWS_AS(average_records(mismatched), std::invalid_argument);
    CHECK_THROWS_AS(average_records({}), std::invalid_argument);
}

TEST_CASE("noisy records average toward the truth") {
    const SampleRate rate(240e6);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 0.1);
    const std::complex<double> truth{0.3, -0.2};
    const std::size_t len = 64;
    std::vector<CaptureRecord> records;
    for (int r = 0; r < 1000; ++r) {
        std::vector<std::complex<double>> data(len);
        for (auto& v : data)
            v = truth + std::complex<double>(noise(rng), noise(rng));
        records.push_back({IqStream(std::move(data), rate), 0.0, 0, r});
    }
    const auto mean = average_records(records);
    const double bound = 4.0 * 0.1 / std::sqrt(1000.0 * len);
    CHECK(std::abs(mean.real() - truth.real()) < bound);
    CHECK(std::abs(mean.imag() - truth.imag()) < bound);
}

TEST_CASE("the processing chain is linear in its input") {
    const SampleRate rate(3.84e9);
    const double f_nco = 479.4e6;
    const double f_sig = f_nco + 0.2e6;

    const auto chain = [&](double amplitude) {
        const auto s = real_tone(f_sig, amplitude, 16384, rate);
        auto iq = downmix(s, f_nco, 0.0);
        iq = decimate(iq, 4);
        iq = iir_lowpass(iq, {0.53, 1});
        iq = moving_average(iq, 8);
        iq = rotate(iq, {30.0});
        return tail_mean(iq);
    };

    const auto reference = chain(1.0);
    for (const double a : {1e-3, 1e-2, 0.1, 0.5}) {
        const auto scaled = chain(a);
        CHECK(std::abs(scaled - a * reference) <= 1e-9 * std::abs(a * reference));
    }
}

} // TEST_SUITE
