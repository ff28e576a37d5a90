// SPDX-License-Identifier: Apache-2.0

#include "qcars/dac.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qcars/fft.hpp"
#include "resample.hpp"

namespace qcars {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double image_frequency(double f_bb_hz, double fs_hz, int zone) {
    if (zone % 2 == 1)
        return 0.5 * (zone - 1) * fs_hz + f_bb_hz;
    return 0.5 * zone * fs_hz - f_bb_hz;
}

// Largest reconstruction magnitude inside a zone: coarse grid plus a
// golden-section polish around the best grid point.
double zone_peak_magnitude(SampleRate fs, ReconstructionMode mode, int zone) {
    const double lo = 0.5 * (zone - 1) * fs.hertz();
    const double hi = 0.5 * zone * fs.hertz();
    double best_f = lo;
    double best = -1.0;
    constexpr int kGrid = 2048;
    for (int i = 0; i <= kGrid; ++i) {
        const double f = lo + (hi - lo) * i / kGrid;
        const double m = reconstruction_magnitude(f, fs, mode);
        if (m > best) {
            best = m;
            best_f = f;
        }
    }
    double a = std::max(lo, best_f - (hi - lo) / kGrid);
    double b = std::min(hi, best_f + (hi - lo) / kGrid);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 80; ++it) {
        const double c1 = b - gr * (b - a);
        const double c2 = a + gr * (b - a);
        if (reconstruction_magnitude(c1, fs, mode) < reconstruction_magnitude(c2, fs, mode))
            a = c1;
        else
            b = c2;
    }
    return reconstruction_magnitude(0.5 * (a + b), fs, mode);
}

} // namespace

IqStream interpolate(const IqStream& s, int factor) {
    detail::check_resample_factor(factor);
    if (s.size() == 0)
        throw std::invalid_argument("cannot interpolate an empty stream");
    std::vector<std::complex<double>> data(s.samples().begin(), s.samples().end());
    for (int f = factor; f > 1; f /= 2)
        data = detail::upsample2(data);
    return IqStream(std::move(data), SampleRate(s.rate().hertz() * factor));
}

Waveform nco_upconvert(const IqStream& s, const NcoConfig& nco) {
    if (!(nco.phase_deg >= 0.0 && nco.phase_deg < 360.0))
        throw std::invalid_argument("NCO phase must be in [0, 360) degrees");
    if (!(nco.freq_hz < s.rate().hertz()))
        throw std::invalid_argument("NCO frequency must be below the stream sample rate");

    const double w = 2.0 * kPi * nco.freq_hz;
    const double phi = nco.phase_deg * kPi / 180.0;
    const double dt = s.rate().period_s();

    std::vector<double> out;
    out.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto& iq = s.samples()[k];
        if (std::norm(iq) > 1.0 + 1e-9)
            throw std::invalid_argument("IQ envelope magnitude above full scale");
        const double arg = w * (static_cast<double>(k) * dt) + phi;
        const double y = iq.real() * std::cos(arg) - iq.imag() * std::sin(arg);
        out.push_back(std::clamp(y, -1.0, 1.0));
    }
    return Waveform(std::move(out), s.rate());
}

std::complex<double> reconstruction_response(double f_hz, SampleRate fs,
                                             ReconstructionMode mode) {
    if (f_hz < 0.0)
        throw std::invalid_argument("reconstruction response is defined for f >= 0");
    const double T = fs.period_s();
    const double wT = 2.0 * kPi * f_hz * T;
    const std::complex<double> delay = std::exp(std::complex<double>(0.0, -0.5 * wT));
    if (mode == ReconstructionMode::nrz)
        return T * delay * sinc(0.5 * wT);
    return T * std::complex<double>(0.0, 1.0) * delay * sinc(0.25 * wT) * std::sin(0.25 * wT);
}

double reconstruction_magnitude(double f_hz, SampleRate fs, ReconstructionMode mode) {
    return std::abs(reconstruction_response(f_hz, fs, mode)) * fs.hertz();
}

int nyquist_zone(double f_hz, SampleRate fs) {
    if (f_hz < 0.0)
        throw std::invalid_argument("zone index is defined for f >= 0");
    return static_cast<int>(std::floor(2.0 * f_hz / fs.hertz())) + 1;
}

std::vector<ZoneImage> zone_images(double f_signal_hz, SampleRate fs, int n_zones) {
    if (n_zones < 1)
        throw std::invalid_argument("zone count must be at least 1");
    if (!(f_signal_hz >= 0.0 && f_signal_hz < 0.5 * fs.hertz()))
        throw std::invalid_argument(
            "signal must lie in the first Nyquist zone; alias-fold it first");

    std::vector<ZoneImage> images;
    images.reserve(static_cast<std::size_t>(n_zones));
    for (int z = 1; z <= n_zones; ++z)
        images.push_back({image_frequency(f_signal_hz, fs.hertz(), z), z});
    return images;
}

Spectrum synthesize_output_spectrum(const IqStream& s, const NcoConfig& nco,
                                    ReconstructionMode mode, int n_zones, Window window) {
    if (n_zones < 1)
        throw std::invalid_argument("zone count must be at least 1");
    const Waveform wave = nco_upconvert(s, nco);
    const Spectrum base = spectrum(wave, std::bit_ceil(wave.size()), window);
    const double fs_hz = s.rate().hertz();

    Spectrum out;
    out.bins.reserve(base.bins.size() * static_cast<std::size_t>(n_zones));
    for (int z = 1; z <= n_zones; ++z) {
        const auto append = [&](const Spectrum::Bin& bin) {
            const double f_img = image_frequency(bin.freq_hz, fs_hz, z);
            if (!out.bins.empty() && f_img <= out.bins.back().freq_hz)
                return; // zone-boundary bin already emitted by the previous zone
            const double weight_db =
                amplitude_to_db(reconstruction_magnitude(f_img, SampleRate(fs_hz), mode));
            out.bins.push_back({f_img, std::max(bin.power_dbfs + weight_db, kSpectrumFloorDb)});
        };
        if (z % 2 == 1) {
            for (const auto& bin : base.bins)
                append(bin);
        } else {
            for (auto it = base.bins.rbegin(); it != base.bins.rend(); ++it)
                append(*it);
        }
    }
    return out;
}

InverseSincResult inverse_sinc(const IqStream& s, SampleRate fs, ReconstructionMode mode,
                               int target_zone) {
    if (target_zone != 1 && target_zone != 2)
        throw std::invalid_argument("inverse-sinc target zone must be 1 or 2");
    if (s.size() == 0)
        throw std::invalid_argument("cannot compensate an empty stream");

    const std::size_t n = std::bit_ceil(s.size());
    std::vector<std::complex<double>> buf(s.samples().begin(), s.samples().end());
    buf.resize(n, std::complex<double>(0.0, 0.0));
    fft(buf);

    const double peak = zone_peak_magnitude(fs, mode, target_zone);
    constexpr double kMaxGain = 10.0; // 20 dB
    bool clamped = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double f_signed = (k <= n / 2 ? static_cast<double>(k)
                                            : static_cast<double>(k) - static_cast<double>(n)) *
                                fs.hertz() / static_cast<double>(n);
        const double f_bb = std::abs(f_signed);
        const double mag =
            reconstruction_magnitude(image_frequency(f_bb, fs.hertz(), target_zone), fs, mode);
        double gain = peak / std::max(mag, 1e-300);
        if (gain > kMaxGain) {
            gain = kMaxGain;
            clamped = true;
        }
        buf[k] *= gain;
    }

    ifft(buf);
    buf.resize(s.size());
    return {IqStream(std::move(buf), s.rate()), clamped};
}

Spectrum apply_bandpass(const Spectrum& spec, const BandpassModel& bp) {
    if (!(bp.pass_lo_hz < bp.pass_hi_hz))
        throw std::invalid_argument("band-pass passband edges must satisfy lo < hi");
    if (!(bp.stopband_atten_db > 0.0))
        throw std::invalid_argument("band-pass stopband attenuation must be positive");

    Spectrum out;
    out.bins.reserve(spec.bins.size());
    for (const auto& bin : spec.bins) {
        const bool in_band = bin.freq_hz >= bp.pass_lo_hz && bin.freq_hz <= bp.pass_hi_hz;
        const double atten = in_band ? 0.5 * bp.passband_ripple_db : bp.stopband_atten_db;
        out.bins.push_back({bin.freq_hz, std::max(bin.power_dbfs - atten, kSpectrumFloorDb)});
    }
    return out;
}

double sfdr_db(const Spectrum& spec, double carrier_hz) {
    if (spec.bins.size() < 2)
        throw std::invalid_argument("spectrum too small for an SFDR estimate");

    std::size_t carrier = 0;
    double best = std::abs(spec.bins[0].freq_hz - carrier_hz);
    for (std::size_t k = 1; k < spec.bins.size(); ++k) {
        const double d = std::abs(spec.bins[k].freq_hz - carrier_hz);
        if (d < best) {
            best = d;
            carrier = k;
        }
    }
    const double local_spacing =
        carrier + 1 < spec.bins.size()
            ? spec.bins[carrier + 1].freq_hz - spec.bins[carrier].freq_hz
            : spec.bins[carrier].freq_hz - spec.bins[carrier - 1].freq_hz;
    if (best > 0.5 * local_spacing)
        throw std::invalid_argument("carrier not found within half a bin of the spectrum");

    double max_spur = kSpectrumFloorDb;
    for (std::size_t k = 0; k < spec.bins.size(); ++k) {
        if (k + 2 >= carrier && k <= carrier + 2)
            continue; // exclusion window of +/-2 bins around the carrier
        max_spur = std::max(max_spur, spec.bins[k].power_dbfs);
    }
    return spec.bins[carrier].power_dbfs - max_spur;
}

ResponseCurve response_curve(SampleRate fs, ReconstructionMode mode, double fmax_hz,
                             int n_points) {
    if (n_points < 2)
        throw std::invalid_argument("response curve needs at least two points");
    if (!(fmax_hz > 0.0))
        throw std::invalid_argument("response curve fmax must be positive");

    ResponseCurve curve;
    curve.points.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double f = fmax_hz * i / (n_points - 1);
        const auto r = reconstruction_response(f, fs, mode);
        curve.points.push_back({f, std::abs(r) * fs.hertz(), std::arg(r)});
    }
    return curve;
}

std::vector<ResponseProbe> simulate_reconstruction_sweep(SampleRate fs, ReconstructionMode mode,
                                                         std::span<const double> freqs_hz,
                                                         int base_len, int oversample) {
    if (!is_power_of_two(static_cast<std::size_t>(base_len)) ||
        !is_power_of_two(static_cast<std::size_t>(oversample)) || oversample < 2)
        throw std::invalid_argument("probe grid sizes must be powers of two");

    const auto n = static_cast<std::size_t>(base_len);
    const auto m = static_cast<std::size_t>(oversample);
    const double bin_hz = fs.hertz() / static_cast<double>(n);

    std::vector<ResponseProbe> probes;
    probes.reserve(freqs_hz.size());
    for (double f_req : freqs_hz) {
        if (!(f_req >= 0.0 && f_req < 0.5 * static_cast<double>(m) * fs.hertz()))
            throw std::invalid_argument("probe frequency outside the reconstructed span");
        auto j = static_cast<std::size_t>(std::llround(f_req / bin_hz));
        // The probe tone must not fold onto DC or a zone edge.
        if (j % n == 0 || j % n == n / 2)
            ++j;
        const double f_probe = static_cast<double>(j) * bin_hz;

        std::size_t mm = j % n;
        if (mm > n / 2)
            mm = n - mm;

        std::vector<std::complex<double>> v(n * m);
        for (std::size_t k = 0; k < n; ++k) {
            const double x = std::cos(2.0 * kPi * static_cast<double>(mm) *
                                      static_cast<double>(k) / static_cast<double>(n));
            for (std::size_t p = 0; p < m; ++p)
                v[k * m + p] = (mode == ReconstructionMode::nrz || p < m / 2) ? x : -x;
        }
        fft(v);

        double amp = std::abs(v[j]) * 2.0 / static_cast<double>(n * m);
        // Remove the residual hold roll-off of the oversampled grid itself.
        const double x = kPi * f_probe / (static_cast<double>(m) * fs.hertz());
        if (x != 0.0)
            amp *= x / std::sin(x);
        probes.push_back({f_probe, amplitude_to_db(amp)});
    }
    return probes;
}

} // namespace qcars
