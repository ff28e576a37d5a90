// SPDX-License-Identifier: Apache-2.0

#include "qcars/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qcars/sync.hpp"
#include "qcars/version.hpp"

namespace qcars {

namespace {

// Loopback streams are rendered in one piece; refuse absurd allocations.
constexpr std::size_t kMaxLoopbackSamples = 1ull << 26;

const char* axis_label_of(ExpType type) {
    switch (type) {
    case ExpType::t1:
        return "wait";
    case ExpType::ramsey:
        return "delay";
    case ExpType::time_rabi:
        return "rect_duration";
    case ExpType::power_rabi:
        return "amplitude";
    }
    return "axis";
}

const char* axis_unit_of(ExpType type) {
    return type == ExpType::power_rabi ? "percent" : "us";
}

std::string canonical_config_text(const ExpConfig& c) {
    std::ostringstream os;
    os << "exp_type=" << to_string(c.exp_type) << '\n'
       << "continuous=" << c.continuous << '\n'
       << "qubit_freq=" << c.qubit_freq_mhz << '\n'
       << "readout_freq=" << c.readout_freq_mhz << '\n'
       << "mode=" << c.mode << '\n'
       << "repetition_rate=" << c.repetition_rate_ns << '\n'
       << "time_between_pulses=" << c.time_between_pulses_ns << '\n'
       << "initial_amp=" << c.initial_amp_percent << '\n'
       << "trigger_delay=" << c.trigger_delay_ns << '\n'
       << "trigger_width=" << c.trigger_width_ns << '\n'
       << "amplitude_factor=" << c.amplitude_factor_percent << '\n'
       << "amplitude_steps=" << c.amplitude_steps << '\n'
       << "gaussian_sigma=" << c.gaussian_sigma_ns << '\n'
       << "gaussian_pulse_duration=" << c.gaussian_pulse_duration_ns << '\n'
       << "outer_loop_count=" << c.outer_loop_count << '\n'
       << "inner_loop_count=" << c.inner_loop_count << '\n'
       << "inner_loop_step=" << c.inner_loop_step_ns << '\n'
       << "data_fetch_time=" << c.data_fetch_time_ns << '\n'
       << "loopback=" << c.loopback << '\n'
       << "wave_type=" << c.wave_type << '\n';
    return os.str();
}

} // namespace

std::string to_string(ExpType type) {
    switch (type) {
    case ExpType::t1:
        return "T1";
    case ExpType::time_rabi:
        return "Time_Rabi";
    case ExpType::power_rabi:
        return "Power_Rabi";
    case ExpType::ramsey:
        return "Ramsey";
    }
    return "unknown";
}

ExpConfig parse_config(const std::string& text) {
    // The documented format allows '#' comment lines around the JSON body.
    std::string stripped;
    stripped.reserve(text.size());
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#')
            continue;
        stripped += line;
        stripped += '\n';
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(stripped);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("configuration must be a single JSON object");

    static const std::vector<std::string> known = {
        "exp_type",         "continuous",       "qubit_freq",
        "readout_freq",     "mode",             "repetition_rate",
        "time_between_pulses", "initial_amp",   "trigger_delay",
        "trigger_width",    "amplitude_factor", "amplitude_steps",
        "gaussian_sigma",   "gaussian_pulse_duration", "outer_loop_count",
        "inner_loop_count", "inner_loop_step",  "data_fetch_time",
        "loopback",         "wave_type"};

    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("unknown configuration key '" + key + "'");
    }
    for (const auto& key : known) {
        if (!doc.contains(key))
            throw std::invalid_argument("missing configuration key '" + key + "'");
    }

    auto number = [&](const char* key) {
        if (!doc[key].is_number())
            throw std::invalid_argument(std::string("configuration key '") + key +
                                        "' must be numeric");
        return doc[key].get<double>();
    };
    auto integer = [&](const char* key) {
        if (!doc[key].is_number_integer())
            throw std::invalid_argument(std::string("configuration key '") + key +
                                        "' must be an integer");
        return doc[key].get<std::int64_t>();
    };
    auto text_field = [&](const char* key) {
        if (!doc[key].is_string())
            throw std::invalid_argument(std::string("configuration key '") + key +
                                        "' must be a string");
        return doc[key].get<std::string>();
    };

    ExpConfig cfg;
    const std::string exp = text_field("exp_type");
    if (exp == "T1")
        cfg.exp_type = ExpType::t1;
    else if (exp == "Time_Rabi")
        cfg.exp_type = ExpType::time_rabi;
    else if (exp == "Power_Rabi")
        cfg.exp_type = ExpType::power_rabi;
    else if (exp == "Ramsey")
        cfg.exp_type = ExpType::ramsey;
    else
        throw std::invalid_argument("unsupported experiment type '" + exp + "'");

    cfg.continuous = static_cast<int>(integer("continuous"));
    cfg.qubit_freq_mhz = number("qubit_freq");
    cfg.readout_freq_mhz = number("readout_freq");
    cfg.mode = static_cast<int>(integer("mode"));
    cfg.repetition_rate_ns = integer("repetition_rate");
    cfg.time_between_pulses_ns = integer("time_between_pulses");
    cfg.initial_amp_percent = number("initial_amp");
    cfg.trigger_delay_ns = integer("trigger_delay");
    cfg.trigger_width_ns = integer("trigger_width");
    cfg.amplitude_factor_percent = number("amplitude_factor");
    cfg.amplitude_steps = static_cast<int>(integer("amplitude_steps"));
    cfg.gaussian_sigma_ns = number("gaussian_sigma");
    cfg.gaussian_pulse_duration_ns = number("gaussian_pulse_duration");
    cfg.outer_loop_count = static_cast<int>(integer("outer_loop_count"));
    cfg.inner_loop_count = static_cast<int>(integer("inner_loop_count"));
    cfg.inner_loop_step_ns = integer("inner_loop_step");
    cfg.data_fetch_time_ns = integer("data_fetch_time");
    cfg.loopback = static_cast<int>(integer("loopback"));
    cfg.wave_type = text_field("wave_type");

    if (!(cfg.qubit_freq_mhz > 0.0) || !(cfg.readout_freq_mhz > 0.0))
        throw std::invalid_argument("configuration frequencies must be positive");
    if (cfg.inner_loop_count < 1)
        throw std::invalid_argument("inner_loop_count must be at least 1");
    if (cfg.trigger_width_ns <= 0)
        throw std::invalid_argument("trigger_width must be positive");
    return cfg;
}

SweepPlan plan(const ExpConfig& cfg) {
    SweepPlan p;
    p.n_iter = cfg.inner_loop_count;
    p.amp0_percent = cfg.initial_amp_percent;
    p.trigger0_ns = cfg.trigger_delay_ns;
    p.time0_ns = 0;

    switch (cfg.exp_type) {
    case ExpType::power_rabi:
        if (cfg.amplitude_steps < 1)
            throw std::invalid_argument("amplitude_steps must be at least 1");
        p.n_points = cfg.amplitude_steps;
        p.delta_amp_percent = cfg.amplitude_factor_percent / cfg.amplitude_steps;
        break;
    case ExpType::t1:
        p.n_points = cfg.outer_loop_count;
        p.delta_trigger_ns = cfg.time_between_pulses_ns;
        break;
    case ExpType::ramsey:
    case ExpType::time_rabi:
        p.n_points = cfg.outer_loop_count;
        p.delta_time_ns = cfg.time_between_pulses_ns;
        break;
    }
    if (p.n_points < 1)
        throw std::invalid_argument("sweep must have at least one point");
    return p;
}

BuiltSequence build_sequence(const ExpConfig& cfg, const SweepPlan& plan, int point_index,
                             SampleRate awg_rate) {
    if (point_index < 0 || point_index >= plan.n_points)
        throw std::invalid_argument("sweep point index out of range");
    if (cfg.wave_type != "gaussian")
        throw std::invalid_argument("unsupported wave_type '" + cfg.wave_type + "'");

    const Waveform envelope = gaussian_envelope(cfg.gaussian_pulse_duration_ns,
                                                cfg.gaussian_sigma_ns, awg_rate);
    const QuantizedWaveform codes = quantize(envelope);

    BuiltSequence built{PulseSequence{}, BramBank{}, 100.0, cfg.qubit_freq_mhz * 1e6, awg_rate};
    built.seq.period_ns = static_cast<double>(cfg.repetition_rate_ns);
    built.seq.trigger.width_ns = static_cast<double>(cfg.trigger_width_ns);

    const double gauss_ns = envelope.duration_ns();
    const double amp = cfg.exp_type == ExpType::power_rabi ? plan.amp_at(point_index)
                                                           : cfg.initial_amp_percent;

    switch (cfg.exp_type) {
    case ExpType::t1: {
        const auto wait_ns = static_cast<double>(plan.trigger_at(point_index));
        const WaveformHandle pulse = built.bank.load_waveform(0, codes);
        built.seq.segments = {StoredSegment{pulse, 1}, FlatSegment{0.0, wait_ns}};
        built.seq.trigger.delay_ns = gauss_ns + wait_ns;
        built.scale_percent = amp;
        break;
    }
    case ExpType::ramsey: {
        const auto gap_ns = static_cast<double>(plan.time_at(point_index));
        // Both half rotations reference one stored envelope, played from a
        // common oscillator, so their relative phase is fixed.
        const WaveformHandle pulse = built.bank.load_waveform(0, codes);
        built.seq.segments = {StoredSegment{pulse, 1}, FlatSegment{0.0, gap_ns},
                              StoredSegment{pulse, 1}};
        built.seq.trigger.delay_ns = 2.0 * gauss_ns + gap_ns;
        built.scale_percent = 0.5 * amp; // two half-area rotations
        break;
    }
    case ExpType::time_rabi: {
        const auto rect_ns = static_cast<double>(plan.time_at(point_index));
        const std::size_t n = codes.codes.size();
        QuantizedWaveform first{std::vector<std::int16_t>(codes.codes.begin(),
                                                          codes.codes.begin() +
                                                              static_cast<long>((n + 1) / 2)),
                                codes.rate, codes.full_scale_bits};
        QuantizedWaveform second{std::vector<std::int16_t>(codes.codes.begin() +
                                                               static_cast<long>((n + 1) / 2),
                                                           codes.codes.end()),
                                 codes.rate, codes.full_scale_bits};
        const WaveformHandle h1 = built.bank.load_waveform(0, std::move(first));
        const WaveformHandle h2 = built.bank.load_waveform(0, std::move(second));
        // The rectangle rides at the envelope peak and is produced by the
        // counter, so its length costs no sample memory.
        built.seq.segments = {StoredSegment{h1, 1}, FlatSegment{amp / 100.0, rect_ns},
                              StoredSegment{h2, 1}};
        built.seq.trigger.delay_ns = gauss_ns + rect_ns;
        built.scale_percent = amp;
        break;
    }
    case ExpType::power_rabi: {
        const WaveformHandle pulse = built.bank.load_waveform(0, codes);
        built.seq.segments = {StoredSegment{pulse, 1}};
        built.seq.trigger.delay_ns = gauss_ns;
        built.scale_percent = amp;
        break;
    }
    }
    // Loopback routes the raw pulse into the capture stage, so the trigger
    // keeps its configured delay instead of the experiment's readout point.
    if (cfg.loopback == 1)
        built.seq.trigger.delay_ns = static_cast<double>(cfg.trigger_delay_ns);
    return built;
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

SweepPoint run_device_point(const ExpConfig& cfg, const SweepPlan& plan,
                            const DeviceParams& device, const RunOptions& opts, int k,
                            SampleRate awg_rate, int shots) {
    const BuiltSequence built = build_sequence(cfg, plan, k, awg_rate);
    const auto segments = render_segments(built.seq, built.bank, awg_rate, built.scale_percent);
    const double detuning_hz = built.drive_f_hz - device.qubit.f_q_hz;

    QubitState state;
    std::vector<double> drive;
    auto flush_drive = [&]() {
        if (drive.empty())
            return;
        state = apply_drive(state, Waveform(drive, awg_rate), built.drive_f_hz, device.qubit);
        drive.clear();
    };
    for (const auto& seg : segments) {
        if (!seg.samples.empty()) {
            drive.insert(drive.end(), seg.samples.begin(), seg.samples.end());
        } else if (seg.duration_ns > 0.0) {
            flush_drive();
            state = free_evolve(state, seg.duration_ns, device.qubit, detuning_hz);
        }
    }
    flush_drive();

    const std::uint64_t point_seed = opts.seed ^ static_cast<std::uint64_t>(k);
    const MeasureResult meas = measure(state, device.readout, shots, point_seed);
    const std::complex<double> iq = rotate(meas.mean_iq, opts.rotation);

    SweepPoint point;
    switch (cfg.exp_type) {
    case ExpType::t1:
        point.axis_value = static_cast<double>(plan.trigger_at(k)) * 1e-3;
        break;
    case ExpType::ramsey:
    case ExpType::time_rabi:
        point.axis_value = static_cast<double>(plan.time_at(k)) * 1e-3;
        break;
    case ExpType::power_rabi:
        point.axis_value = plan.amp_at(k);
        break;
    }
    point.i_mean = iq.real();
    point.q_mean = iq.imag();
    point.p_excited = meas.p_excited;
    return point;
}

} // namespace

SweepResult run(const ExpConfig& cfg, const SweepPlan& plan, const DeviceParams& device,
                const RunOptions& opts) {
    const SampleRate awg_rate(opts.dac_rate.hertz() / opts.interp_factor);
    const int shots = opts.shots_override > 0 ? opts.shots_override : plan.n_iter;

    SweepResult result;
    result.exp_type = cfg.exp_type;
    result.axis_label = axis_label_of(cfg.exp_type);
    result.axis_unit = axis_unit_of(cfg.exp_type);
    result.seed = opts.seed;
    result.config_hash = config_hash(canonical_config_text(cfg));
    result.loopback = cfg.loopback == 1;
    result.points.reserve(static_cast<std::size_t>(plan.n_points));

    if (!result.loopback) {
        for (int k = 0; k < plan.n_points; ++k) {
            result.points.push_back(
                run_device_point(cfg, plan, device, opts, k, awg_rate, shots));
            result.total_shots += shots;
        }
        return result;
    }

    // Loopback: the rendered stream is routed straight into the capture
    // stage, shifted by the round-trip pipeline latency.
    LatencyConfig lat_cfg;
    lat_cfg.interp_factor = opts.interp_factor;
    lat_cfg.decim_factor = opts.decim_factor;
    const LatencyReport latency = roundtrip_latency(lat_cfg);
    result.loopback_latency_ns = latency.ns;

    for (int k = 0; k < plan.n_points; ++k) {
        const BuiltSequence built = build_sequence(cfg, plan, k, awg_rate);
        const double period_ns = sequence_duration_ns(built.seq, built.bank, awg_rate);
        const auto projected = static_cast<std::size_t>(
            period_ns * 1e-9 * awg_rate.hertz() * static_cast<double>(shots));
        if (projected > kMaxLoopbackSamples)
            throw std::invalid_argument(
                "loopback stream too large; reduce the shot count or repetition period");

        RenderResult rr = render(built.seq, built.bank, awg_rate, PlayMode::fixed(shots),
                                 built.scale_percent);
        const auto delay_samples = static_cast<std::size_t>(
            std::llround(latency.ns * 1e-9 * awg_rate.hertz()));
        std::vector<std::complex<double>> delayed(delay_samples, {0.0, 0.0});
        delayed.insert(delayed.end(), rr.stream.samples().begin(), rr.stream.samples().end());
        const IqStream routed(std::move(delayed), awg_rate);

        auto records =
            capture(routed, rr.triggers, static_cast<double>(cfg.trigger_width_ns));
        const std::complex<double> iq = rotate(average_records(records), opts.rotation);

        SweepPoint point;
        point.axis_value = cfg.exp_type == ExpType::power_rabi
                               ? plan.amp_at(k)
                               : static_cast<double>(plan.trigger_at(k) + plan.time_at(k)) * 1e-3;
        point.i_mean = iq.real();
        point.q_mean = iq.imag();
        point.p_excited = 0.0;
        result.points.push_back(point);
        result.total_shots += shots;
        if (k == plan.n_points - 1)
            result.loopback_records = std::move(records);
    }
    return result;
}

std::optional<FitResult> fit_sweep(const SweepResult& result) {
    if (result.loopback)
        return std::nullopt;
    std::vector<double> x, y;
    x.reserve(result.points.size());
    y.reserve(result.points.size());
    for (const auto& p : result.points) {
        x.push_back(p.axis_value);
        y.push_back(p.p_excited);
    }

    switch (result.exp_type) {
    case ExpType::t1:
        if (x.size() < 4)
            return std::nullopt;
        return fit_exponential(x, y);
    case ExpType::ramsey:
        if (x.size() < 8)
            return std::nullopt;
        return fit_ramsey(x, y);
    case ExpType::time_rabi:
        if (x.size() < 8)
            return std::nullopt;
        return fit_rabi(x, y, true);
    case ExpType::power_rabi:
        if (x.size() < 8)
            return std::nullopt;
        return fit_rabi(x, y, false);
    }
    return std::nullopt;
}

void atomic_write(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write file: " + tmp);
        out << contents;
        if (!out.good())
            throw std::runtime_error("short write to file: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ostringstream os;
    os << "axis_value,i_mean,q_mean,p_excited\n";
    char line[160];
    for (const auto& p : result.points) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g\n", p.axis_value, p.i_mean,
                      p.q_mean, p.p_excited);
        os << line;
    }
    atomic_write(path, os.str());
}

void write_manifest(const SweepResult& result, const ExpConfig& cfg, const std::string& path) {
    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["seed"] = result.seed;
    doc["config_hash"] = result.config_hash;
    doc["exp_type"] = to_string(result.exp_type);
    doc["axis_label"] = result.axis_label;
    doc["axis_unit"] = result.axis_unit;
    doc["n_points"] = result.points.size();
    doc["total_shots"] = result.total_shots;
    doc["loopback"] = result.loopback;
    if (result.loopback)
        doc["loopback_latency_ns"] = result.loopback_latency_ns;
    // Parsed-but-inert knobs, surfaced for traceability.
    doc["inner_loop_step"] = cfg.inner_loop_step_ns;
    doc["data_fetch_time"] = cfg.data_fetch_time_ns;
    atomic_write(path, doc.dump(2) + "\n");
}

std::string write_fit_report(const FitResult& fit, const std::string& path) {
    std::ostringstream os;
    const char* model = fit.model == FitModel::exponential ? "exponential"
                        : fit.model == FitModel::ramsey    ? "ramsey"
                                                           : "rabi";
    char buf[96];
    os << "model=" << model << '\n';
    auto kv = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s=%.9g\n", key, v);
        os << buf;
    };
    kv("offset", fit.offset);
    kv("amplitude", fit.amplitude);
    switch (fit.model) {
    case FitModel::exponential:
        kv("t1_us", fit.time_constant_us);
        break;
    case FitModel::ramsey:
        kv("t2r_us", fit.time_constant_us);
        kv("detuning_mhz", fit.detuning_mhz);
        kv("phase_rad", fit.phase_rad);
        break;
    case FitModel::rabi:
        kv("omega_mhz", fit.frequency_mhz);
        kv("phase_rad", fit.phase_rad);
        if (fit.has_decay)
            kv("decay_us", fit.time_constant_us);
        break;
    }
    kv("rms_residual", fit.rms_residual);
    os << "iterations=" << fit.iterations << '\n';
    os << "converged=" << (fit.converged ? 1 : 0) << '\n';
    os << "degenerate=" << (fit.degenerate ? 1 : 0) << '\n';
    if (!fit.diagnostic.empty())
        os << "diagnostic=" << fit.diagnostic << '\n';

    const std::string text = os.str();
    if (!path.empty())
        atomic_write(path, text);
    return text;
}

void write_fitted_curve_csv(std::span<const double> x, std::span<const double> y,
                            const FitResult& fit, const std::string& path) {
    if (x.size() != y.size())
        throw std::invalid_argument("fitted-curve series lengths differ");
    std::ostringstream os;
    os << "axis_value,y,y_fit\n";
    char line[128];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", x[i], y[i], fit_eval(fit, x[i]));
        os << line;
    }
    atomic_write(path, os.str());
}

} // namespace qcars
