// SPDX-License-Identifier: Apache-2.0

#include "qcars/fitting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "qcars/fft.hpp"

namespace qcars {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxIterations = 200;
constexpr double kStepTolerance = 1e-10;

struct LmOutcome {
    Eigen::VectorXd theta;
    double rms = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> history;
    std::string diagnostic;
};

using EvalFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;
using ValidFn = std::function<bool(const Eigen::VectorXd&)>;

// Damped Gauss-Newton: solve (J^T J + lambda diag(J^T J)) step = -J^T r and
// accept only steps that reduce the residual, so the accepted-iteration
// residual sequence is non-increasing by construction.
LmOutcome levenberg(Eigen::VectorXd theta, std::size_t n_residuals, const EvalFn& eval,
                    const ValidFn& valid) {
    LmOutcome out;
    const auto n = static_cast<Eigen::Index>(n_residuals);
    const auto p = theta.size();
    Eigen::VectorXd r(n);
    Eigen::MatrixXd jac(n, p);

    eval(theta, r, jac);
    double sse = r.squaredNorm();
    out.history.push_back(std::sqrt(sse / static_cast<double>(n)));

    double lambda = 1e-3;
    int iterations = 0;
    bool converged = false;
    std::string diag;

    while (iterations < kMaxIterations) {
        ++iterations;
        Eigen::MatrixXd h = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        Eigen::VectorXd d = h.diagonal();
        const double dmax = d.maxCoeff();
        for (Eigen::Index i = 0; i < p; ++i)
            d(i) = std::max(d(i), std::max(1e-14 * dmax, 1e-30));
        h.diagonal() += lambda * d;

        const Eigen::VectorXd step = h.ldlt().solve(-g);
        const Eigen::VectorXd trial = theta + step;

        bool accepted = false;
        if (valid(trial)) {
            Eigen::VectorXd r_try(n);
            Eigen::MatrixXd j_try(n, p);
            eval(trial, r_try, j_try);
            const double sse_try = r_try.squaredNorm();
            if (sse_try <= sse) {
                theta = trial;
                r = r_try;
                jac = j_try;
                sse = sse_try;
                lambda = std::max(lambda / 3.0, 1e-14);
                out.history.push_back(std::sqrt(sse / static_cast<double>(n)));
                accepted = true;
            }
        }

        if (accepted) {
            double rel_step = 0.0;
            for (Eigen::Index i = 0; i < p; ++i)
                rel_step = std::max(rel_step, std::abs(step(i)) / (std::abs(theta(i)) + 1e-12));
            if (rel_step < kStepTolerance) {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e14) {
                diag = "damping exhausted before the step tolerance was reached";
                break;
            }
        }
    }

    if (!converged && diag.empty())
        diag = "no convergence within " + std::to_string(kMaxIterations) + " iterations";

    out.theta = theta;
    out.rms = std::sqrt(sse / static_cast<double>(n));
    out.converged = converged;
    out.iterations = iterations;
    out.diagnostic = converged ? "" : diag;
    return out;
}

void check_series(std::span<const double> x, std::span<const double> y, std::size_t min_points,
                  bool strictly_increasing) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit series lengths differ");
    if (x.size() < min_points)
        throw std::invalid_argument("fit needs at least " + std::to_string(min_points) +
                                    " points");
    if (strictly_increasing) {
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1]))
                throw std::invalid_argument("fit axis must be strictly increasing");
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw std::invalid_argument("fit series contains a non-finite value");
}

double data_range(std::span<const double> y) {
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return *hi - *lo;
}

bool is_degenerate(std::span<const double> y) {
    double scale = 0.0;
    for (double v : y)
        scale = std::max(scale, std::abs(v));
    return data_range(y) <= 1e-12 * std::max(1.0, scale);
}

FitResult degenerate_result(FitModel model, std::span<const double> y, const char* what) {
    FitResult fit;
    fit.model = model;
    fit.offset = sample_mean(y);
    fit.amplitude = 0.0;
    fit.degenerate = true;
    fit.converged = false;
    fit.diagnostic = what;
    return fit;
}

/// Dominant oscillation frequency of the detrended series, in cycles per
/// axis unit, via a zero-padded FFT peak with parabolic refinement.
struct FftPeak {
    double frequency = 0.0;
    double phase = 0.0;
    double amplitude = 0.0;
};

FftPeak dominant_frequency(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double mean = sample_mean(y);
    const double dt = (x.back() - x.front()) / static_cast<double>(n - 1);

    const std::size_t padded = std::bit_ceil(n) * 4;
    std::vector<std::complex<double>> buf(padded, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        buf[i] = y[i] - mean;
    fft(buf);

    std::size_t peak = 1;
    double best = 0.0;
    for (std::size_t k = 1; k <= padded / 2; ++k) {
        const double mag = std::abs(buf[k]);
        if (mag > best) {
            best = mag;
            peak = k;
        }
    }

    double k_refined = static_cast<double>(peak);
    if (peak > 1 && peak < padded / 2) {
        const double m1 = std::abs(buf[peak - 1]);
        const double m2 = std::abs(buf[peak]);
        const double m3 = std::abs(buf[peak + 1]);
        const double denom = m1 - 2.0 * m2 + m3;
        if (std::abs(denom) > 1e-30)
            k_refined += 0.5 * (m1 - m3) / denom;
    }

    FftPeak out;
    out.frequency = k_refined / (static_cast<double>(padded) * dt);
    out.amplitude = 2.0 * best / static_cast<double>(n);

    // Phase of the cosine at x = x.front() for the refined frequency.
    std::complex<double> corr(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        corr += (y[i] - mean) *
                std::exp(std::complex<double>(0.0, -kTwoPi * out.frequency * (x[i] - x.front())));
    out.phase = std::arg(corr);
    return out;
}

} // namespace

double fit_eval(const FitResult& fit, double x) {
    const double decay =
        fit.time_constant_us > 0.0 ? std::exp(-x / fit.time_constant_us) : 1.0;
    switch (fit.model) {
    case FitModel::exponential:
        return fit.offset + fit.amplitude * decay;
    case FitModel::ramsey:
        return fit.offset +
               fit.amplitude * std::cos(kTwoPi * fit.detuning_mhz * x + fit.phase_rad) * decay;
    case FitModel::rabi:
        return fit.offset + fit.amplitude * std::cos(kTwoPi * fit.frequency_mhz * x + fit.phase_rad) *
                                (fit.has_decay ? decay : 1.0);
    }
    return 0.0;
}

FitResult fit_exponential(std::span<const double> t_us, std::span<const double> y,
                          std::span<const double> init) {
    check_series(t_us, y, 4, true);
    if (is_degenerate(y))
        return degenerate_result(FitModel::exponential, y,
                                 "constant data: decay constant is unidentifiable");

    const std::size_t n = t_us.size();
    double a0, b0, tau0;
    if (init.size() == 3) {
        a0 = init[0];
        b0 = init[1];
        tau0 = init[2];
    } else {
        a0 = y.back();
        b0 = y.front() - a0;
        // Log-linear slope over the part of the decay that is clearly above
        // the tail estimate.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (y[i] - a0) / (b0 == 0.0 ? 1.0 : b0);
            if (d > 0.02) {
                const double ly = std::log(std::abs(y[i] - a0));
                sx += t_us[i];
                sy += ly;
                sxx += t_us[i] * t_us[i];
                sxy += t_us[i] * ly;
                ++m;
            }
        }
        tau0 = (t_us.back() - t_us.front()) / 3.0;
        if (m >= 2) {
            const double denom = m * sxx - sx * sx;
            if (std::abs(denom) > 1e-30) {
                const double slope = (m * sxy - sx * sy) / denom;
                if (slope < -1e-30)
                    tau0 = -1.0 / slope;
            }
        }
        if (!(tau0 > 0.0))
            tau0 = (t_us.back() - t_us.front()) / 3.0;
    }

    Eigen::VectorXd theta(3);
    theta << a0, b0, tau0;
    const auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-t_us[i] / th(2));
            r(static_cast<Eigen::Index>(i)) = th(0) + th(1) * e - y[i];
            jac(static_cast<Eigen::Index>(i), 0) = 1.0;
            jac(static_cast<Eigen::Index>(i), 1) = e;
            jac(static_cast<Eigen::Index>(i), 2) = th(1) * e * t_us[i] / (th(2) * th(2));
        }
    };
    const auto valid = [](const Eigen::VectorXd& th) { return th(2) > 0.0; };
    const LmOutcome lm = levenberg(theta, n, eval, valid);

    FitResult fit;
    fit.model = FitModel::exponential;
    fit.offset = lm.theta(0);
    fit.amplitude = lm.theta(1);
    fit.time_constant_us = lm.theta(2);
    fit.rms_residual = lm.rms;
    fit.converged = lm.converged;
    fit.iterations = lm.iterations;
    fit.residual_history = lm.history;
    fit.diagnostic = lm.diagnostic;
    if (std::abs(fit.amplitude) <= 1e-9 * std::max(1.0, std::abs(fit.offset))) {
        fit.degenerate = true;
        fit.converged = false;
        fit.diagnostic = "no decay contrast: time constant is unidentifiable";
    }
    return fit;
}

FitResult fit_ramsey(std::span<const double> t_us, std::span<const double> y,
                     std::span<const double> init) {
    check_series(t_us, y, 8, true);
    if (is_degenerate(y))
        return degenerate_result(FitModel::ramsey, y, "constant data: no fringe contrast");

    const std::size_t n = t_us.size();
    const double span = t_us.back() - t_us.front();
    const double dt_med = span / static_cast<double>(n - 1);

    double a0, b0, f0, phi0, tau0;
    bool oscillating;
    if (init.size() == 5) {
        a0 = init[0];
        b0 = init[1];
        f0 = init[2];
        phi0 = init[3];
        tau0 = init[4];
        oscillating = f0 != 0.0;
    } else {
        const FftPeak peak = dominant_frequency(t_us, y);
        a0 = sample_mean(y);
        b0 = 0.5 * data_range(y);
        f0 = peak.frequency;
        phi0 = peak.phase;
        tau0 = 0.5 * span;
        // Less than three quarters of a fringe across the span is not a
        // resolvable oscillation; fit a pure decay toward the offset instead.
        oscillating = f0 * span >= 0.75;
    }

    if (!oscillating) {
        FitResult base = fit_exponential(t_us, y);
        base.model = FitModel::ramsey;
        base.detuning_mhz = 0.0;
        base.phase_rad = 0.0;
        return base;
    }

    FitResult fit;
    fit.model = FitModel::ramsey;
    if (f0 > 0.45 / dt_med) {
        fit.nyquist_ambiguous = true;
        fit.diagnostic = "fringe frequency too close to the sampling Nyquist";
    }

    Eigen::VectorXd theta(5);
    theta << a0, b0, f0, phi0, tau0;
    const auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t_us[i];
            const double e = std::exp(-t / th(4));
            const double arg = kTwoPi * th(2) * t + th(3);
            const double c = std::cos(arg);
            const double s = std::sin(arg);
            r(static_cast<Eigen::Index>(i)) = th(0) + th(1) * c * e - y[i];
            jac(static_cast<Eigen::Index>(i), 0) = 1.0;
            jac(static_cast<Eigen::Index>(i), 1) = c * e;
            jac(static_cast<Eigen::Index>(i), 2) = -th(1) * kTwoPi * t * s * e;
            jac(static_cast<Eigen::Index>(i), 3) = -th(1) * s * e;
            jac(static_cast<Eigen::Index>(i), 4) = th(1) * c * e * t / (th(4) * th(4));
        }
    };
    const auto valid = [](const Eigen::VectorXd& th) { return th(4) > 0.0 && th(2) >= 0.0; };
    const LmOutcome lm = levenberg(theta, n, eval, valid);

    fit.offset = lm.theta(0);
    fit.amplitude = lm.theta(1);
    fit.detuning_mhz = lm.theta(2);
    fit.phase_rad = lm.theta(3);
    fit.time_constant_us = lm.theta(4);
    fit.rms_residual = lm.rms;
    fit.converged = lm.converged && !fit.nyquist_ambiguous;
    fit.iterations = lm.iterations;
    fit.residual_history = lm.history;
    if (fit.diagnostic.empty())
        fit.diagnostic = lm.diagnostic;
    if (std::abs(fit.amplitude) <= 1e-9 * std::max(1.0, std::abs(fit.offset))) {
        fit.degenerate = true;
        fit.converged = false;
        fit.diagnostic = "no fringe contrast";
    }
    return fit;
}

FitResult fit_rabi(std::span<const double> x, std::span<const double> y, bool with_decay,
                   std::span<const double> init) {
    check_series(x, y, 8, true);
    if (is_degenerate(y))
        return degenerate_result(FitModel::rabi, y, "constant data: no oscillation contrast");

    const std::size_t n = x.size();
    const double span = x.back() - x.front();
    const double dt_med = span / static_cast<double>(n - 1);

    double a0, b0, f0, phi0, tau0 = 2.0 * span;
    if (init.size() == 4 || init.size() == 5) {
        a0 = init[0];
        b0 = init[1];
        f0 = init[2];
        phi0 = init[3];
        if (init.size() == 5)
            tau0 = init[4];
    } else {
        const FftPeak peak = dominant_frequency(x, y);
        a0 = sample_mean(y);
        b0 = 0.5 * data_range(y);
        f0 = peak.frequency;
        phi0 = peak.phase;
    }

    FitResult fit;
    fit.model = FitModel::rabi;
    fit.has_decay = with_decay;
    if (f0 * span < 0.75) {
        fit.degenerate = true;
        fit.offset = sample_mean(y);
        fit.diagnostic = "under-sampled oscillation: less than one fringe across the span";
        return fit;
    }
    if (f0 > 0.45 / dt_med) {
        fit.nyquist_ambiguous = true;
        fit.diagnostic = "oscillation too close to the sampling Nyquist";
    }

    const auto p = static_cast<Eigen::Index>(with_decay ? 5 : 4);
    Eigen::VectorXd theta(p);
    theta(0) = a0;
    theta(1) = b0;
    theta(2) = f0;
    theta(3) = phi0;
    if (with_decay)
        theta(4) = tau0;

    const auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = x[i];
            const double e = with_decay ? std::exp(-t / th(4)) : 1.0;
            const double arg = kTwoPi * th(2) * t + th(3);
            const double c = std::cos(arg);
            const double s = std::sin(arg);
            r(static_cast<Eigen::Index>(i)) = th(0) + th(1) * c * e - y[i];
            jac(static_cast<Eigen::Index>(i), 0) = 1.0;
            jac(static_cast<Eigen::Index>(i), 1) = c * e;
            jac(static_cast<Eigen::Index>(i), 2) = -th(1) * kTwoPi * t * s * e;
            jac(static_cast<Eigen::Index>(i), 3) = -th(1) * s * e;
            if (with_decay)
                jac(static_cast<Eigen::Index>(i), 4) = th(1) * c * e * t / (th(4) * th(4));
        }
    };
    const auto valid = [&](const Eigen::VectorXd& th) {
        return th(2) >= 0.0 && (!with_decay || th(4) > 0.0);
    };
    const LmOutcome lm = levenberg(theta, n, eval, valid);

    fit.offset = lm.theta(0);
    fit.amplitude = lm.theta(1);
    fit.frequency_mhz = lm.theta(2);
    fit.phase_rad = lm.theta(3);
    if (with_decay)
        fit.time_constant_us = lm.theta(4);
    fit.rms_residual = lm.rms;
    fit.converged = lm.converged && !fit.nyquist_ambiguous;
    fit.iterations = lm.iterations;
    fit.residual_history = lm.history;
    if (fit.diagnostic.empty())
        fit.diagnostic = lm.diagnostic;
    if (std::abs(fit.amplitude) <= 1e-9 * std::max(1.0, std::abs(fit.offset))) {
        fit.degenerate = true;
        fit.converged = false;
        fit.diagnostic = "no oscillation contrast";
    }
    return fit;
}

Histogram t1_repeatability(const std::vector<FitResult>& results, int n_bins) {
    std::vector<double> values;
    values.reserve(results.size());
    for (const auto& r : results)
        if (r.converged && r.time_constant_us > 0.0)
            values.push_back(r.time_constant_us);
    if (values.size() < 2)
        throw std::invalid_argument("repeatability needs at least two converged fits");
    if (n_bins < 1)
        n_bins = std::max(1, static_cast<int>(std::lround(std::sqrt(values.size()))));
    return make_histogram(values, n_bins);
}

LinearFit linearity(std::span<const double> x_db, std::span<const double> y_db) {
    if (x_db.size() != y_db.size())
        throw std::invalid_argument("linearity series lengths differ");
    if (x_db.size() < 3)
        throw std::invalid_argument("linearity needs at least three points");

    const double mx = sample_mean(x_db);
    const double my = sample_mean(y_db);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x_db.size(); ++i) {
        sxx += (x_db[i] - mx) * (x_db[i] - mx);
        sxy += (x_db[i] - mx) * (y_db[i] - my);
        syy += (y_db[i] - my) * (y_db[i] - my);
    }
    if (sxx <= 0.0)
        throw std::invalid_argument("linearity axis is degenerate");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy <= 0.0) {
        fit.r_squared = 1.0; // exactly constant data, exactly reproduced
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < x_db.size(); ++i) {
            const double e = y_db[i] - (fit.intercept + fit.slope * x_db[i]);
            ss_res += e * e;
        }
        fit.r_squared = 1.0 - ss_res / syy;
    }
    return fit;
}

} // namespace qcars
