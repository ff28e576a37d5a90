// SPDX-License-Identifier: Apache-2.0

#include "qcars/device.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qcars/errors.hpp"

namespace qcars {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Bloch {
    double x, y, z;
};

// Rotating-frame Bloch derivative with drive along +x:
//   x' =  d y - x/T2
//   y' = -d x - w z - y/T2
//   z' =  w y - (z - 1)/T1
Bloch derivative(const Bloch& s, double omega, double delta, double inv_t1, double inv_t2) {
    return {delta * s.y - s.x * inv_t2,
            -delta * s.x - omega * s.z - s.y * inv_t2,
            omega * s.y - (s.z - 1.0) * inv_t1};
}

Bloch rk4_step(const Bloch& s, double a0, double a1, double rabi_scale, double delta,
               double inv_t1, double inv_t2, double h) {
    const double a_mid = 0.5 * (a0 + a1);
    const Bloch k1 = derivative(s, rabi_scale * a0, delta, inv_t1, inv_t2);
    const Bloch s2{s.x + 0.5 * h * k1.x, s.y + 0.5 * h * k1.y, s.z + 0.5 * h * k1.z};
    const Bloch k2 = derivative(s2, rabi_scale * a_mid, delta, inv_t1, inv_t2);
    const Bloch s3{s.x + 0.5 * h * k2.x, s.y + 0.5 * h * k2.y, s.z + 0.5 * h * k2.z};
    const Bloch k3 = derivative(s3, rabi_scale * a_mid, delta, inv_t1, inv_t2);
    const Bloch s4{s.x + h * k3.x, s.y + h * k3.y, s.z + h * k3.z};
    const Bloch k4 = derivative(s4, rabi_scale * a1, delta, inv_t1, inv_t2);
    return {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            s.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

// Integrates the envelope with `substeps` RK4 steps per sample interval,
// interpolating the envelope linearly between samples.
Bloch integrate(Bloch s, std::span<const double> env, double dt_s, int substeps,
                double rabi_scale, double delta, double inv_t1, double inv_t2) {
    const double h = dt_s / substeps;
    for (std::size_t k = 0; k + 1 <= env.size(); ++k) {
        const double a_left = env[k];
        const double a_right = (k + 1 < env.size()) ? env[k + 1] : env[k];
        for (int j = 0; j < substeps; ++j) {
            const double f0 = static_cast<double>(j) / substeps;
            const double f1 = static_cast<double>(j + 1) / substeps;
            const double a0 = a_left + (a_right - a_left) * f0;
            const double a1 = a_left + (a_right - a_left) * f1;
            s = rk4_step(s, a0, a1, rabi_scale, delta, inv_t1, inv_t2, h);
        }
    }
    return s;
}

} // namespace

void validate(const QubitParams& p) {
    if (!(p.f_q_hz > 0.0) || !(p.t1_us > 0.0) || !(p.t2_us > 0.0) ||
        !(p.rabi_per_unit_amp_hz > 0.0))
        throw std::invalid_argument("qubit parameters must be positive");
    if (!(p.t2_us <= 2.0 * p.t1_us))
        throw std::invalid_argument("t2 must not exceed 2 * t1");
}

void validate(const ReadoutParams& r) {
    if (r.iq_ground == r.iq_excited)
        throw std::invalid_argument("readout IQ centers must be distinct");
    if (!(r.noise_sigma >= 0.0))
        throw std::invalid_argument("readout noise sigma must be non-negative");
}

double QubitState::norm() const { return std::sqrt(x * x + y * y + z * z); }

QubitState apply_drive(const QubitState& state, const Waveform& envelope, double drive_f_hz,
                       const QubitParams& p) {
    validate(p);
    const double dt_s = envelope.rate().period_s();
    const double rabi_scale = kTwoPi * p.rabi_per_unit_amp_hz;
    const double delta = kTwoPi * (drive_f_hz - p.f_q_hz);
    const double inv_t1 = 1.0 / (p.t1_us * 1e-6);
    const double inv_t2 = 1.0 / (p.t2_us * 1e-6);

    // Step at or below 0.5 ns, halve once more for the convergence reference.
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt_s / 0.5e-9)));
    const Bloch start{state.x, state.y, state.z};
    const Bloch coarse = integrate(start, envelope.samples(), dt_s, substeps, rabi_scale, delta,
                                   inv_t1, inv_t2);
    const Bloch fine = integrate(start, envelope.samples(), dt_s, 2 * substeps, rabi_scale,
                                 delta, inv_t1, inv_t2);

    const double err = std::sqrt((coarse.x - fine.x) * (coarse.x - fine.x) +
                                 (coarse.y - fine.y) * (coarse.y - fine.y) +
                                 (coarse.z - fine.z) * (coarse.z - fine.z));
    if (!(err < 1e-6))
        throw NumericalError("drive integration failed its halved-step convergence check "
                             "(difference " +
                             std::to_string(err) + ")");
    return {fine.x, fine.y, fine.z};
}

QubitState free_evolve(const QubitState& state, double t_ns, const QubitParams& p,
                       double frame_detuning_hz) {
    validate(p);
    if (t_ns < 0.0)
        throw std::invalid_argument("evolution time must be non-negative");
    const double t_s = t_ns * 1e-9;
    const double decay_t1 = std::exp(-t_s / (p.t1_us * 1e-6));
    const double decay_t2 = std::exp(-t_s / (p.t2_us * 1e-6));
    const double phase = -kTwoPi * frame_detuning_hz * t_s;

    const std::complex<double> transverse =
        std::complex<double>(state.x, state.y) * decay_t2 *
        std::exp(std::complex<double>(0.0, phase));
    // z e + (1 - e) rather than 1 + (z - 1) e keeps t = 0 an exact identity.
    return {transverse.real(), transverse.imag(),
            state.z * decay_t1 + (1.0 - decay_t1)};
}

MeasureResult measure(const QubitState& state, const ReadoutParams& r, int shots,
                      std::uint64_t seed) {
    validate(r);
    if (shots < 1)
        throw std::invalid_argument("measurement needs at least one shot");

    const double p1 = std::clamp(state.excited_population(), 0.0, 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    // Outcomes are counted and the centers weighted once at the end, so a
    // noise-free measurement of a pole state reports its center exactly.
    std::complex<double> noise_sum(0.0, 0.0);
    int excited = 0;
    for (int s = 0; s < shots; ++s) {
        excited += uniform(rng) < p1 ? 1 : 0;
        if (r.noise_sigma > 0.0)
            noise_sum += std::complex<double>(r.noise_sigma * noise(rng),
                                              r.noise_sigma * noise(rng));
    }
    const double frac = static_cast<double>(excited) / shots;
    const std::complex<double> mean =
        r.iq_excited * frac + r.iq_ground * (1.0 - frac) +
        noise_sum / static_cast<double>(shots);
    return {mean, frac};
}

double envelope_area_s(const Waveform& envelope) {
    double sum = 0.0;
    for (double a : envelope.samples())
        sum += a;
    return sum * envelope.rate().period_s();
}

double pi_pulse_kappa(const Waveform& envelope) {
    const double area = envelope_area_s(envelope);
    if (!(area > 0.0))
        throw std::invalid_argument("envelope area must be positive to calibrate a pi pulse");
    // 2 pi kappa * area = pi
    return 0.5 / area;
}

DeviceParams parse_device(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("device file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("qubit") || !doc.contains("readout"))
        throw std::invalid_argument("device file needs 'qubit' and 'readout' sections");
    for (const auto& [key, _] : doc.items()) {
        if (key != "qubit" && key != "readout")
            throw std::invalid_argument("unknown device section '" + key + "'");
    }

    const auto& q = doc["qubit"];
    const auto& r = doc["readout"];
    auto require_number = [](const nlohmann::json& obj, const char* section, const char* key) {
        if (!obj.contains(key))
            throw std::invalid_argument(std::string("device file missing ") + section + "." + key);
        if (!obj[key].is_number())
            throw std::invalid_argument(std::string("device key ") + section + "." + key +
                                        " must be numeric");
        return obj[key].get<double>();
    };

    for (const auto& [key, _] : q.items()) {
        if (key != "f_q_hz" && key != "t1_us" && key != "t2_us" && key != "kappa_hz")
            throw std::invalid_argument("unknown device key 'qubit." + key + "'");
    }
    for (const auto& [key, _] : r.items()) {
        if (key != "cavity_f_hz" && key != "iq_ground" && key != "iq_excited" &&
            key != "noise_sigma")
            throw std::invalid_argument("unknown device key 'readout." + key + "'");
    }

    DeviceParams dev;
    dev.qubit.f_q_hz = require_number(q, "qubit", "f_q_hz");
    dev.qubit.t1_us = require_number(q, "qubit", "t1_us");
    dev.qubit.t2_us = require_number(q, "qubit", "t2_us");
    dev.qubit.rabi_per_unit_amp_hz = require_number(q, "qubit", "kappa_hz");

    auto read_iq = [&](const char* key) {
        if (!r.contains(key) || !r[key].is_array() || r[key].size() != 2 ||
            !r[key][0].is_number() || !r[key][1].is_number())
            throw std::invalid_argument(std::string("device key readout.") + key +
                                        " must be a [i, q] pair");
        return std::complex<double>(r[key][0].get<double>(), r[key][1].get<double>());
    };
    dev.readout.cavity_f_hz = require_number(r, "readout", "cavity_f_hz");
    dev.readout.iq_ground = read_iq("iq_ground");
    dev.readout.iq_excited = read_iq("iq_excited");
    dev.readout.noise_sigma = require_number(r, "readout", "noise_sigma");

    validate(dev.qubit);
    validate(dev.readout);
    return dev;
}

} // namespace qcars
