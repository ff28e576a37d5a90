// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcars/awg.hpp"
#include "qcars/device.hpp"
#include "qcars/fitting.hpp"
#include "qcars/readout.hpp"
#include "qcars/signal.hpp"

namespace qcars {

enum class ExpType { t1, time_rabi, power_rabi, ramsey };

std::string to_string(ExpType type);

/// Experiment configuration document. Key names and units follow the
/// configuration interface exactly; all timing parameters are in nanoseconds,
/// frequencies in MHz, amplitudes in percent of full scale.
struct ExpConfig {
    ExpType exp_type = ExpType::t1;
    int continuous = 0;
    double qubit_freq_mhz = 0.0;
    double readout_freq_mhz = 0.0;
    int mode = 0;
    std::int64_t repetition_rate_ns = 0; // repetition period
    std::int64_t time_between_pulses_ns = 0;
    double initial_amp_percent = 0.0;
    std::int64_t trigger_delay_ns = 0;
    std::int64_t trigger_width_ns = 0;
    double amplitude_factor_percent = 0.0;
    int amplitude_steps = 0;
    double gaussian_sigma_ns = 0.0;
    double gaussian_pulse_duration_ns = 0.0;
    int outer_loop_count = 0;
    int inner_loop_count = 0;
    std::int64_t inner_loop_step_ns = 0; // parsed, surfaced, otherwise unused
    std::int64_t data_fetch_time_ns = 0; // parsed, surfaced, otherwise unused
    int loopback = 0;
    std::string wave_type = "gaussian";

    /// mode 0 plays a fixed number of pulses, mode 1 plays continuously;
    /// "continuous": 1 is an alias for the latter.
    bool is_continuous() const { return continuous == 1 || mode == 1; }
};

/// Parses the JSON experiment document. Lines whose first non-blank character
/// is '#' are treated as comments. Unknown keys, missing keys, non-numeric
/// values and unknown experiment types are rejected by name.
ExpConfig parse_config(const std::string& text);

/// Sweep increments: exactly one of delta_amp / delta_trigger / delta_time is
/// nonzero for a given experiment type (or all are zero for a still sweep).
struct SweepPlan {
    double delta_amp_percent = 0.0;    // power sweeps
    std::int64_t delta_trigger_ns = 0; // relaxation wait sweeps
    std::int64_t delta_time_ns = 0;    // inter-pulse / pulse-length sweeps
    int n_points = 0;
    int n_iter = 0;
    double amp0_percent = 0.0;
    std::int64_t trigger0_ns = 0;
    std::int64_t time0_ns = 0;

    double amp_at(int k) const { return amp0_percent + k * delta_amp_percent; }
    std::int64_t trigger_at(int k) const { return trigger0_ns + k * delta_trigger_ns; }
    std::int64_t time_at(int k) const { return time0_ns + k * delta_time_ns; }
};

SweepPlan plan(const ExpConfig& cfg);

/// A sequence built for one sweep point, together with the bank holding its
/// stored samples and the scale the renderer must apply.
struct BuiltSequence {
    PulseSequence seq;
    BramBank bank;
    double scale_percent = 100.0;
    double drive_f_hz = 0.0;
    SampleRate rate = SampleRate(768e6);
};

/// Experiment-specific pulse train for sweep point k:
///  - T1: X_pi, a wait of trigger0 + k*delta, readout trigger at its end
///  - Ramsey: X_pi/2, wait of k*delta, X_pi/2, trigger at the end of the
///    second pulse (both pulses share one stored waveform and phase)
///  - Time-Rabi: rectangle of k*delta inserted at the center of the X_pi
///    envelope, played by the counter without consuming sample memory
///  - Power-Rabi: the X_pi envelope scaled to amp0 + k*delta percent
BuiltSequence build_sequence(const ExpConfig& cfg, const SweepPlan& plan, int point_index,
                             SampleRate awg_rate);

struct RunOptions {
    SampleRate dac_rate = SampleRate::dac_default();
    int interp_factor = 8;
    int decim_factor = 4;
    RotationConfig rotation;
    std::uint64_t seed = 0;
    int shots_override = 0; // 0 keeps the configured inner loop count
};

struct SweepPoint {
    double axis_value = 0.0;
    double i_mean = 0.0;
    double q_mean = 0.0;
    double p_excited = 0.0;
};

struct SweepResult {
    ExpType exp_type = ExpType::t1;
    std::string axis_label;
    std::string axis_unit;
    std::vector<SweepPoint> points;
    std::uint64_t seed = 0;
    std::string config_hash;
    long long total_shots = 0;
    bool loopback = false;
    double loopback_latency_ns = 0.0;
    std::vector<CaptureRecord> loopback_records;
};

/// Runs the sweep: for every point, plays the point's sequence against the
/// simulated device (or the loopback path), averages the configured number of
/// shots and advances the accumulators. Per-point randomness derives from
/// seed XOR point_index, so results are reproducible for a fixed seed.
SweepResult run(const ExpConfig& cfg, const SweepPlan& plan, const DeviceParams& device,
                const RunOptions& opts);

/// Canonical fit for the experiment type: exponential for T1, fringe fit for
/// Ramsey, oscillation fit for the Rabi variants. Empty for loopback runs.
std::optional<FitResult> fit_sweep(const SweepResult& result);

/// FNV-1a of the configuration text, printed as a 16-digit hex string.
std::string config_hash(const std::string& text);

/// Writes `axis_value, i_mean, q_mean, p_excited` rows. Atomic via temp+rename.
void write_sweep_csv(const SweepResult& result, const std::string& path);

/// Writes the run manifest (seed, config hash, version, shot totals, the
/// surfaced-but-inert keys) as JSON. Atomic via temp+rename.
void write_manifest(const SweepResult& result, const ExpConfig& cfg, const std::string& path);

/// Key-value fit report; returns the text that was written.
std::string write_fit_report(const FitResult& fit, const std::string& path);

/// Writes `axis_value, y, y_fit` rows for plotting.
void write_fitted_curve_csv(std::span<const double> x, std::span<const double> y,
                            const FitResult& fit, const std::string& path);

/// Writes a file atomically (temp file in the same directory, then rename).
void atomic_write(const std::string& path, const std::string& contents);

} // namespace qcars
