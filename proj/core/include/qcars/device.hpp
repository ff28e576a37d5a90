// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include "qcars/signal.hpp"

namespace qcars {

/// Two-level device constants. Times are in microseconds; kappa is the Rabi
/// rate in Hz produced by a unit-amplitude drive.
struct QubitParams {
    double f_q_hz = 4.2e9;
    double t1_us = 30.5;
    double t2_us = 6.25;
    double rabi_per_unit_amp_hz = 5e6;
};

void validate(const QubitParams& p);

/// Bloch vector in the rotating frame of the drive; z = +1 is the ground state.
struct QubitState {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    double excited_population() const { return 0.5 * (1.0 - z); }
    double norm() const;
};

struct ReadoutParams {
    double cavity_f_hz = 5.995e9;
    std::complex<double> iq_ground{1.0, 0.0};
    std::complex<double> iq_excited{-1.0, 0.0};
    double noise_sigma = 0.0; // per-shot Gaussian spread on each quadrature
};

void validate(const ReadoutParams& r);

/// Integrates the driven Bloch equations across the envelope with RK4 at
/// sub-nanosecond steps, instantaneous Rabi rate 2 pi kappa a(t), detuning
/// drive_f - f_q, and T1/T2 damping. A halved-step solution must agree to
/// 1e-6 or a NumericalError is raised.
QubitState apply_drive(const QubitState& state, const Waveform& envelope, double drive_f_hz,
                       const QubitParams& p);

/// Closed-form free evolution: z relaxes toward ground with T1, the
/// transverse part decays with T2 and precesses at the frame detuning.
QubitState free_evolve(const QubitState& state, double t_ns, const QubitParams& p,
                       double frame_detuning_hz = 0.0);

struct MeasureResult {
    std::complex<double> mean_iq{0.0, 0.0};
    double p_excited = 0.0;
};

/// Dispersive single-shot readout: each shot reports the excited or ground
/// IQ center plus Gaussian noise; outcome 1 has probability (1 - z) / 2.
/// Deterministic for a fixed seed.
MeasureResult measure(const QubitState& state, const ReadoutParams& r, int shots,
                      std::uint64_t seed);

/// Area of the envelope in seconds (sum of samples times the sample period).
double envelope_area_s(const Waveform& envelope);

/// Rabi calibration constant that turns the given envelope into an X_pi pulse.
double pi_pulse_kappa(const Waveform& envelope);

struct DeviceParams {
    QubitParams qubit;
    ReadoutParams readout;
};

/// Parses a device definition document: a "qubit" section with f_q_hz, t1_us,
/// t2_us and kappa_hz, and a "readout" section with cavity_f_hz, iq_ground,
/// iq_excited and noise_sigma. Unknown keys are rejected by name.
DeviceParams parse_device(const std::string& json_text);

} // namespace qcars
