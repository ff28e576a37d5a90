// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qcars/device.hpp"
#include "qcars/errors.hpp"
#include "qcars/fitting.hpp"
#include "qcars/signal.hpp"

using namespace qcars;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const SampleRate kRate(768e6);

QubitParams lossless(double kappa_hz) { return {4.2e9, kInf, kInf, kappa_hz}; }

Waveform rectangle(double level, double duration_ns) {
    const auto n = static_cast<std::size_t>(std::llround(duration_ns * 1e-9 * kRate.hertz()));
    return Waveform(std::vector<double>(n, level), kRate);
}

// Reference integrator: plain RK4 at a tenth of the production step, written
// independently of the library path.
QubitState reference_drive(QubitState s, const Waveform& env, double drive_f_hz,
                           const QubitParams& p) {
    const double dt = env.rate().period_s();
    const int sub = 20;
    const double h = dt / sub;
    const double delta = 2.0 * std::numbers::pi * (drive_f_hz - p.f_q_hz);
    const double scale = 2.0 * std::numbers::pi * p.rabi_per_unit_amp_hz;
    const double it1 = 1.0 / (p.t1_us * 1e-6);
    const double it2 = 1.0 / (p.t2_us * 1e-6);

    auto deriv = [&](const QubitState& q, double a, double* d) {
        const double w = scale * a;
        d[0] = delta * q.y - q.x * it2;
        d[1] = -delta * q.x - w * q.z - q.y * it2;
        d[2] = w * q.y - (q.z - 1.0) * it1;
    };
    auto step = [&](QubitState q, double a0, double a1) {
        double k1[3], k2[3], k3[3], k4[3];
        const double am = 0.5 * (a0 + a1);
        deriv(q, a0, k1);
        deriv({q.x + 0.5 * h * k1[0], q.y + 0.5 * h * k1[1], q.z + 0.5 * h * k1[2]}, am, k2);
        deriv({q.x + 0.5 * h * k2[0], q.y + 0.5 * h * k2[1], q.z + 0.5 * h * k2[2]}, am, k3);
        deriv({q.x + h * k3[0], q.y + h * k3[1], q.z + h * k3[2]}, a1, k4);
        return QubitState{q.x + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                          q.y + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
                          q.z + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])};
    };

    const auto samples = env.samples();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double a0 = samples[k];
        const double a1 = k + 1 < samples.size() ? samples[k + 1] : samples[k];
        for (int j = 0; j < sub; ++j) {
            const double f0 = static_cast<double>(j) / sub;
            const double f1 = static_cast<double>(j + 1) / sub;
            s = step(s, a0 + (a1 - a0) * f0, a0 + (a1 - a0) * f1);
        }
    }
    return s;
}

} // namespace

TEST_SUITE("device") {

TEST_CASE("calibrated pi pulse inverts the ground state") {
    const auto env = gaussian_envelope(260.0, 65.0, kRate);
    const double kappa = pi_pulse_kappa(env);
    QubitParams p{4.2e9, 1e5, 1e5, kappa}; // decay times far above the pulse length
    const auto out = apply_drive(QubitState{}, env, p.f_q_hz, p);
    CHECK(out.excited_population() >= 0.999);
}

TEST_CASE("zero drive reduces to free decay") {
    QubitParams p{4.2e9, 30.5, 6.25, 5e6};
    const auto env = rectangle(0.0, 2000.0);
    const QubitState start{0.4, -0.3, 0.5};
    const auto driven = apply_drive(start, env, p.f_q_hz, p);
    const auto evolved = free_evolve(start, env.duration_ns(), p, 0.0);
    CHECK(driven.x == doctest::Approx(evolved.x).epsilon(1e-9));
    CHECK(driven.y == doctest::Approx(evolved.y).epsilon(1e-9));
    CHECK(driven.z == doctest::Approx(evolved.z).epsilon(1e-9));
}

TEST_CASE("half-pi rectangle reaches the equator") {
    // 40 samples at unit amplitude; kappa chosen so the area is exactly pi/2.
    const double duration_ns = 40.0 * kRate.period_ns();
    const double kappa = 0.25 / (40.0 * kRate.period_s());
    const auto env = rectangle(1.0, duration_ns);
    REQUIRE(env.size() == 40);
    const auto out = apply_drive(QubitState{}, env, 4.2e9, lossless(kappa));
    CHECK(out.excited_population() == doctest::Approx(0.5).epsilon(1e-3));

    const auto ref = reference_drive(QubitState{}, env, 4.2e9, lossless(kappa));
    CHECK(out.z == doctest::Approx(ref.z).epsilon(1e-9));
}

TEST_CASE("rectangular pulses follow the closed-form rotation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const double kappa = 2e6 + 6e6 * u(rng);
        const double amp = u(rng);
        const double duration_ns = 120.0 + 400.0 * u(rng);
        const auto env = rectangle(amp, duration_ns);
        const auto out = apply_drive(QubitState{}, env, 4.2e9, lossless(kappa));

        const double area = 2.0 * std::numbers::pi * kappa * envelope_area_s(env);
        const double expected = std::sin(0.5 * area) * std::sin(0.5 * area);
        CHECK(out.excited_population() == doctest::Approx(expected).epsilon(1e-4));
    }
}

TEST_CASE("free evolution identities") {
    QubitParams p{4.2e9, 30.5, 6.25, 5e6};
    const QubitState start{0.1, -0.2, 0.3};
    const auto same = free_evolve(start, 0.0, p, 1e6);
    CHECK(same.x == start.x);
    CHECK(same.y == start.y);
    CHECK(same.z == start.z);

    // Excited state decays to 1/e occupancy after T1.
    const QubitState excited{0.0, 0.0, -1.0};
    const auto relaxed = free_evolve(excited, p.t1_us * 1000.0, p, 0.0);
    CHECK(relaxed.excited_population() ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("equator state precesses at the frame detuning") {
    QubitParams p{4.2e9, kInf, kInf, 5e6};
    const QubitState start{0.0, -1.0, 0.0};
    // Half a fringe: 2 pi * 0.8 MHz * 625 ns = pi.
    const auto out = free_evolve(start, 625.0, p, 0.8e6);
    const double phase0 = std::atan2(start.y, start.x);
    const double phase1 = std::atan2(out.y, out.x);
    double advance = std::abs(phase1 - phase0);
    if (advance > std::numbers::pi)
        advance = 2.0 * std::numbers::pi - advance;
    CHECK(advance == doctest::Approx(std::numbers::pi).epsilon(1e-9));
    CHECK(std::sqrt(out.x * out.x + out.y * out.y) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("free evolution rejects negative times") {
    QubitParams p{4.2e9, 30.5, 6.25, 5e6};
    CHECK_THROWS_AS(free_evolve(QubitState{}, -1.0, p, 0.0), std::invalid_argument);
}

TEST_CASE("qubit parameter validation") {
    CHECK_THROWS_AS(validate(QubitParams{4.2e9, 1.0, 3.0, 5e6}), std::invalid_argument);
    CHECK_THROWS_AS(validate(QubitParams{4.2e9, -1.0, 1.0, 5e6}), std::invalid_argument);
    CHECK_NOTHROW(validate(QubitParams{4.2e9, 30.5, 6.25, 5e6}));
}

TEST_CASE("measurement statistics") {
    ReadoutParams r;
    r.iq_ground = {0.7, -0.1};
    r.iq_excited = {-0.4, 0.6};
    r.noise_sigma = 0.0;

    const auto ground = measure(QubitState{0.0, 0.0, 1.0}, r, 100, 1);
    CHECK(ground.mean_iq == r.iq_ground);
    CHECK(ground.p_excited == 0.0);

    const auto single = measure(QubitState{0.0, 0.0, -1.0}, r, 1, 7);
    CHECK(single.mean_iq == r.iq_excited);
    CHECK(single.p_excited == 1.0);

    const auto super = measure(QubitState{1.0, 0.0, 0.0}, r, 50000, 99);
    CHECK(std::abs(super.p_excited - 0.5) <= 0.011); // 4.5 sigma binomial bound
}

TEST_CASE("measurement is reproducible per seed") {
    ReadoutParams r;
    r.noise_sigma = 0.15;
    const QubitState s{0.3, 0.1, 0.2};
    const auto a = measure(s, r, 4096, 1234);
    const auto b = measure(s, r, 4096, 1234);
    CHECK(a.mean_iq == b.mean_iq);
    CHECK(a.p_excited == b.p_excited);
    const auto c = measure(s, r, 4096, 1235);
    CHECK(a.mean_iq != c.mean_iq);
}

TEST_CASE("bloch norm never leaves the unit ball") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    QubitParams p{4.2e9, 30.5, 6.25, 6e6};
    for (int trial = 0; trial < 20; ++trial) {
        QubitState s;
        for (int step = 0; step < 6; ++step) {
            if (u(rng) < 0.5) {
                const auto env = rectangle(0.2 + 0.8 * u(rng), 40.0 + 400.0 * u(rng));
                s = apply_drive(s, env, p.f_q_hz + (u(rng) - 0.5) * 4e6, p);
            } else {
                s = free_evolve(s, 2000.0 * u(rng), p, (u(rng) - 0.5) * 2e6);
            }
            CHECK(s.norm() <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("fitted oscillation rate is linear in drive amplitude") {
    const double kappa = 5e6;
    const auto params = lossless(kappa);
    std::vector<double> amps{0.2, 0.35, 0.5, 0.65, 0.8};
    std::vector<double> rates;
    for (double amp : amps) {
        std::vector<double> t_us, p1;
        for (int k = 0; k < 48; ++k) {
            const double duration_ns = 20.0 + 50.0 * k;
            const auto env = rectangle(amp, duration_ns);
            const auto out = apply_drive(QubitState{}, env, 4.2e9, params);
            t_us.push_back(env.duration_ns() * 1e-3);
            p1.push_back(out.excited_population());
        }
        const auto fit = fit_rabi(t_us, p1);
        REQUIRE(fit.converged);
        rates.push_back(fit.frequency_mhz);
    }
    const auto line = linearity(amps, rates);
    CHECK(line.r_squared > 0.99);
    CHECK(line.slope == doctest::Approx(kappa * 1e-6).epsilon(0.02));
}

TEST_CASE("device definition files parse strictly") {
    const std::string good = R"({
      "qubit": {"f_q_hz": 4.2e9, "t1_us": 30.5, "t2_us": 6.25, "kappa_hz": 5e6},
      "readout": {"cavity_f_hz": 5.995e9, "iq_ground": [1.0, 0.0],
                  "iq_excited": [-1.0, 0.0], "noise_sigma": 0.1}
    })";
    const auto dev = parse_device(good);
    CHECK(dev.qubit.f_q_hz == 4.2e9);
    CHECK(dev.qubit.t1_us == 30.5);
    CHECK(dev.readout.noise_sigma == 0.1);

    const std::string unknown = R"({
      "qubit": {"f_q_hz": 4.2e9, "t1_us": 30.5, "t2_us": 6.25, "kappa_hz": 5e6, "bogus": 1},
      "readout": {"cavity_f_hz": 5.995e9, "iq_ground": [1.0, 0.0],
                  "iq_excited": [-1.0, 0.0], "noise_sigma": 0.1}
    })";
    CHECK_THROWS_WITH_AS(parse_device(unknown), "unknown device key 'qubit.bogus'",
                         std::invalid_argument);

    const std::string missing = R"({
      "qubit": {"f_q_hz": 4.2e9, "t1_us": 30.5, "t2_us": 6.25},
      "readout": {"cavity_f_hz": 5.995e9, "iq_ground": [1.0, 0.0],
                  "iq_excited": [-1.0, 0.0], "noise_sigma": 0.1}
    })";
    CHECK_THROWS_AS(parse_device(missing), std::invalid_argument);
}

} // TEST_SUITE
