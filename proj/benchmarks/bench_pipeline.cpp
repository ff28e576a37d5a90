// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qcars/awg.hpp"
#include "qcars/dac.hpp"
#include "qcars/device.hpp"
#include "qcars/fft.hpp"
#include "qcars/fitting.hpp"
#include "qcars/readout.hpp"
#include "qcars/signal.hpp"

namespace {

const qcars::SampleRate kAwgRate(768e6);

qcars::IqStream make_tone(std::size_t n, double cycles, double amplitude,
                          qcars::SampleRate rate) {
    std::vector<std::complex<double>> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double arg =
            2.0 * std::numbers::pi * cycles * static_cast<double>(k) / static_cast<double>(n);
        s[k] = {amplitude * std::cos(arg), amplitude * std::sin(arg)};
    }
    return qcars::IqStream(std::move(s), rate);
}

void bm_fft(benchmark::State& state) {
    std::vector<std::complex<double>> data(static_cast<std::size_t>(state.range(0)));
    for (std::size_t k = 0; k < data.size(); ++k)
        data[k] = {std::sin(0.01 * static_cast<double>(k)), 0.0};
    for (auto _ : state) {
        auto copy = data;
        qcars::fft(copy);
        benchmark::DoNotOptimize(copy);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_fft)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void bm_render(benchmark::State& state) {
    qcars::BramBank bank;
    const auto codes = qcars::quantize(qcars::gaussian_envelope(900.0, 400.0, kAwgRate));
    const auto h = bank.load_waveform(0, codes);
    qcars::PulseSequence seq{{qcars::StoredSegment{h, 1}, qcars::FlatSegment{0.0, 2000.0}},
                             qcars::TriggerSpec{0.0, 4000.0},
                             static_cast<double>(state.range(0))};
    for (auto _ : state) {
        auto rr = qcars::render(seq, bank, kAwgRate, qcars::PlayMode::fixed(4), 50.0);
        benchmark::DoNotOptimize(rr.stream);
    }
}
BENCHMARK(bm_render)->Arg(10000)->Arg(100000);

void bm_interpolate8(benchmark::State& state) {
    const auto s = make_tone(static_cast<std::size_t>(state.range(0)), 37.0, 0.5, kAwgRate);
    for (auto _ : state) {
        auto out = qcars::interpolate(s, 8);
        benchmark::DoNotOptimize(out);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_interpolate8)->RangeMultiplier(4)->Range(1 << 8, 1 << 12)->Complexity();

void bm_readout_chain(benchmark::State& state) {
    const qcars::SampleRate adc_rate(3.84e9);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> tone(n);
    for (std::size_t k = 0; k < n; ++k)
        tone[k] = 0.5 * std::cos(2.0 * std::numbers::pi * 479.4e6 *
                                 static_cast<double>(k) * adc_rate.period_s());
    const qcars::Waveform input(std::move(tone), adc_rate);
    for (auto _ : state) {
        auto iq = qcars::downmix(input, 479.2e6, 0.0);
        iq = qcars::decimate(iq, 4);
        iq = qcars::iir_lowpass(iq, {0.53, 1});
        iq = qcars::moving_average(iq, 8);
        iq = qcars::rotate(iq, {30.0});
        benchmark::DoNotOptimize(iq);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_readout_chain)->RangeMultiplier(4)->Range(1 << 12, 1 << 16)->Complexity();

void bm_drive_integration(benchmark::State& state) {
    const auto env = qcars::gaussian_envelope(900.0, 400.0, kAwgRate);
    const qcars::QubitParams p{4.2e9, 30.5, 6.25, qcars::pi_pulse_kappa(env)};
    for (auto _ : state) {
        auto out = qcars::apply_drive(qcars::QubitState{}, env, p.f_q_hz, p);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(bm_drive_integration);

void bm_fit_exponential(benchmark::State& state) {
    std::vector<double> t(48), y(48);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = 150.0 * static_cast<double>(i) / 47.0;
        y[i] = 0.1 + 0.8 * std::exp(-t[i] / 30.5);
    }
    for (auto _ : state) {
        auto fit = qcars::fit_exponential(t, y);
        benchmark::DoNotOptimize(fit);
    }
}
BENCHMARK(bm_fit_exponential);

} // namespace

BENCHMARK_MAIN();
