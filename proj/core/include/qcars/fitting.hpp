// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "qcars/histogram.hpp"

namespace qcars {

enum class FitModel { exponential, ramsey, rabi };

/// Result of a damped Gauss-Newton fit. Frequencies are in cycles per unit
/// of the fitted axis (MHz when the axis is in microseconds); time constants
/// are in the axis unit.
struct FitResult {
    FitModel model = FitModel::exponential;
    double offset = 0.0;           // A
    double amplitude = 0.0;        // B
    double time_constant_us = 0.0; // T1 / T2R / oscillation decay
    double detuning_mhz = 0.0;     // ramsey fringe frequency
    double frequency_mhz = 0.0;    // rabi oscillation frequency
    double phase_rad = 0.0;
    double rms_residual = 0.0;
    bool converged = false;
    bool degenerate = false;        // no identifiable signal contrast
    bool nyquist_ambiguous = false; // oscillation too close to the grid Nyquist
    bool has_decay = false;         // rabi model included an exponential envelope
    int iterations = 0;
    std::vector<double> residual_history; // rms after each accepted step
    std::string diagnostic;
};

/// Evaluates the fitted model at x.
double fit_eval(const FitResult& fit, double x);

/// y = A + B exp(-t/T1). Optional init overrides the built-in guesses
/// (endpoint offset plus log-linear slope) with {A, B, T1}.
FitResult fit_exponential(std::span<const double> t_us, std::span<const double> y,
                          std::span<const double> init = {});

/// y = A + B cos(2 pi D t + phi) exp(-t/T2R), D initialized from the dominant
/// FFT peak of the detrended data. Falls back to a pure-decay fit (D = 0)
/// when no oscillation is resolvable within the span.
/// Optional init: {A, B, D, phi, T2R}.
FitResult fit_ramsey(std::span<const double> t_us, std::span<const double> y,
                     std::span<const double> init = {});

/// y = A + B cos(2 pi W x + phi), optionally times exp(-x/tau).
/// Optional init: {A, B, W, phi} or {A, B, W, phi, tau}.
FitResult fit_rabi(std::span<const double> x, std::span<const double> y,
                   bool with_decay = false, std::span<const double> init = {});

/// Histogram plus mean/std of the time constants of converged fits.
Histogram t1_repeatability(const std::vector<FitResult>& results, int n_bins = 0);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
LinearFit linearity(std::span<const double> x_db, std::span<const double> y_db);

} // namespace qcars
