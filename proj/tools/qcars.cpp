// SPDX-License-Identifier: Apache-2.0
//
// qcars command line tool: runs sweep experiments against the simulated
// device, dumps converter response curves, and provides alias/latency/jitter
// calculators plus standalone curve fitting.
//
// Exit codes: 0 success, 2 usage or parse error, 3 numerical failure,
// 4 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qcars/dac.hpp"
#include "qcars/errors.hpp"
#include "qcars/experiment.hpp"
#include "qcars/fitting.hpp"
#include "qcars/readout.hpp"
#include "qcars/sync.hpp"
#include "qcars/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("QCARS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("QCARS_SEED must be an unsigned integer");
        }
    }
    return 0;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct RunArgs {
    std::string config_path;
    std::string device_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int shots_override = 0;
    double rotation_deg = 0.0;
    bool gnuplot = false;
};

void write_gnuplot_script(const std::string& path, const std::string& csv,
                          const std::string& title, const std::string& xlabel,
                          bool with_fit) {
    std::ostringstream os;
    os << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel '" << xlabel << "'\n"
       << "set title '" << title << "'\n";
    if (with_fit)
        os << "plot '" << csv << "' using 1:2 with points pt 7, \\\n     '" << csv
           << "' using 1:3 with lines lw 2\n";
    else
        os << "plot '" << csv << "' using 1:4 with linespoints pt 7\n";
    qcars::atomic_write(path, os.str());
}

int cmd_run(const RunArgs& args) {
    const qcars::ExpConfig cfg = qcars::parse_config(read_file(args.config_path));
    const qcars::DeviceParams device = qcars::parse_device(read_file(args.device_path));

    qcars::RunOptions opts;
    opts.seed = args.seed_set ? args.seed : default_seed();
    opts.shots_override = args.shots_override;
    opts.rotation.theta_deg = args.rotation_deg;

    const qcars::SweepPlan sweep = qcars::plan(cfg);
    const qcars::SweepResult result = qcars::run(cfg, sweep, device, opts);

    std::filesystem::create_directories(args.out_dir);
    const auto out = [&](const char* name) {
        return (std::filesystem::path(args.out_dir) / name).string();
    };
    qcars::write_sweep_csv(result, out("sweep.csv"));
    qcars::write_manifest(result, cfg, out("meta.json"));
    if (!result.loopback_records.empty())
        qcars::write_records_csv(result.loopback_records, out("records.csv"));

    if (const auto fit = qcars::fit_sweep(result)) {
        std::cout << qcars::write_fit_report(*fit, out("fit_report.txt"));
        std::vector<double> x, y;
        for (const auto& p : result.points) {
            x.push_back(p.axis_value);
            y.push_back(p.p_excited);
        }
        qcars::write_fitted_curve_csv(x, y, *fit, out("fit_curve.csv"));
        if (args.gnuplot)
            write_gnuplot_script(out("plot.gp"), "fit_curve.csv",
                                 qcars::to_string(cfg.exp_type),
                                 result.axis_label + " (" + result.axis_unit + ")", true);
        if (!fit->converged && !fit->degenerate)
            return kExitNumerical;
    } else if (args.gnuplot) {
        write_gnuplot_script(out("plot.gp"), "sweep.csv", qcars::to_string(cfg.exp_type),
                             result.axis_label + " (" + result.axis_unit + ")", false);
    }
    std::cout << "points=" << result.points.size() << " shots=" << result.total_shots
              << " out=" << args.out_dir << "\n";
    return kExitOk;
}

int cmd_response(const std::string& mode_name, double fs_hz, double fmax_hz, int points,
                 const std::string& out_path) {
    const auto mode = mode_name == "nrz" ? qcars::ReconstructionMode::nrz
                                         : qcars::ReconstructionMode::rtc;
    const qcars::SampleRate fs(fs_hz);
    const auto nrz = qcars::response_curve(fs, qcars::ReconstructionMode::nrz, fmax_hz, points);
    const auto rtc = qcars::response_curve(fs, qcars::ReconstructionMode::rtc, fmax_hz, points);

    std::vector<double> freqs;
    freqs.reserve(nrz.points.size());
    for (const auto& p : nrz.points)
        freqs.push_back(p.freq_hz);
    const auto sim = qcars::simulate_reconstruction_sweep(fs, mode, freqs);

    std::ostringstream os;
    os << "freq_hz,mag_db_nrz,mag_db_rtc,mag_db_sim\n";
    char line[160];
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g\n", freqs[i],
                      qcars::amplitude_to_db(nrz.points[i].mag_norm),
                      qcars::amplitude_to_db(rtc.points[i].mag_norm), sim[i].mag_db);
        os << line;
    }
    qcars::atomic_write(out_path, os.str());
    std::cout << "points=" << freqs.size() << " out=" << out_path << "\n";
    return kExitOk;
}

int cmd_fit(const std::string& model, const std::string& in_path,
            const std::string& curve_path, const std::string& report_path) {
    std::ifstream in(in_path);
    if (!in)
        throw std::invalid_argument("cannot open file: " + in_path);

    std::vector<double> x, y;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ','))
            continue;
        try {
            const double xv = std::stod(a);
            const double yv = std::stod(b);
            x.push_back(xv);
            y.push_back(yv);
        } catch (const std::exception&) {
            continue; // header or stray text row
        }
    }

    qcars::FitResult fit;
    if (model == "t1")
        fit = qcars::fit_exponential(x, y);
    else if (model == "ramsey")
        fit = qcars::fit_ramsey(x, y);
    else
        fit = qcars::fit_rabi(x, y);

    std::cout << qcars::write_fit_report(fit, report_path);
    if (!curve_path.empty())
        qcars::write_fitted_curve_csv(x, y, fit, curve_path);
    if (!fit.converged && !fit.degenerate)
        return kExitNumerical;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qcars: qubit control and readout system simulator"};
    app.set_version_flag("--version", qcars::kVersion);
    app.require_subcommand(1);

    // run
    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a sweep experiment from a configuration file");
    run->add_option("--config", run_args.config_path, "Experiment configuration file")
        ->required();
    run->add_option("--device", run_args.device_path, "Device definition file")->required();
    run->add_option("--out", run_args.out_dir, "Output directory")->required();
    auto* seed_opt = run->add_option("--seed", run_args.seed, "Random seed (default QCARS_SEED)");
    run->add_option("--shots-override", run_args.shots_override,
                    "Override the configured shots per point");
    run->add_option("--rotation-deg", run_args.rotation_deg, "Readout rotation angle");
    run->add_flag("--gnuplot", run_args.gnuplot, "Also write a gnuplot script");

    // response
    std::string resp_mode;
    double resp_fs = 6.144e9;
    double resp_fmax = 0.0;
    int resp_points = 256;
    std::string resp_out;
    auto* response = app.add_subcommand("response", "Write the converter response sweep CSV");
    response->add_option("--mode", resp_mode, "Reconstruction mode")
        ->required()
        ->check(CLI::IsMember({"nrz", "rtc"}));
    response->add_option("--fs", resp_fs, "Converter sample rate in Hz");
    response->add_option("--fmax", resp_fmax, "Sweep upper edge in Hz (default 3 fs)");
    response->add_option("--points", resp_points, "Number of sweep points")
        ->check(CLI::PositiveNumber);
    response->add_option("--out", resp_out, "Output CSV path")->required();

    // alias
    double alias_fin = 0.0;
    double alias_fs = 4.096e9;
    auto* alias = app.add_subcommand("alias", "Fold a frequency into the first Nyquist zone");
    alias->add_option("--fin", alias_fin, "Input frequency in Hz")->required();
    alias->add_option("--fs", alias_fs, "Sampling rate in Hz");

    // latency
    qcars::LatencyConfig lat_cfg;
    auto* latency = app.add_subcommand("latency", "Round-trip pipeline latency");
    latency->add_option("--interp", lat_cfg.interp_factor, "DAC interpolation factor");
    latency->add_option("--decim", lat_cfg.decim_factor, "ADC decimation factor");
    latency->add_option("--clock", lat_cfg.fpga_clock_hz, "Fabric clock in Hz");
    latency->add_flag("!--no-mixers", lat_cfg.mixers_enabled, "Bypass the digital mixers");

    // jitter
    qcars::JitterModel jitter_model;
    std::uint64_t jitter_seed = 0;
    int jitter_bins = 40;
    std::string jitter_out;
    auto* jitter = app.add_subcommand("jitter", "Sample channel-to-channel jitter");
    jitter->add_option("--sigma-ps", jitter_model.sigma_ps, "Jitter standard deviation in ps");
    jitter->add_option("--samples", jitter_model.n_samples, "Number of draws")
        ->check(CLI::PositiveNumber);
    auto* jseed = jitter->add_option("--seed", jitter_seed, "Random seed (default QCARS_SEED)");
    jitter->add_option("--bins", jitter_bins, "Histogram bin count")
        ->check(CLI::PositiveNumber);
    jitter->add_option("--out", jitter_out, "Histogram CSV path (bin_center_ps, count)");

    // fit
    std::string fit_model, fit_in, fit_curve, fit_report;
    auto* fit = app.add_subcommand("fit", "Fit a result file (CSV: axis_value, y)");
    fit->add_option("--model", fit_model, "Fit model")
        ->required()
        ->check(CLI::IsMember({"t1", "ramsey", "rabi"}));
    fit->add_option("--in", fit_in, "Input CSV")->required();
    fit->add_option("--curve", fit_curve, "Fitted-curve CSV path");
    fit->add_option("--report", fit_report, "Fit report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*run) {
            run_args.seed_set = seed_opt->count() > 0;
            return cmd_run(run_args);
        }
        if (*response) {
            if (resp_fmax <= 0.0)
                resp_fmax = 3.0 * resp_fs;
            return cmd_response(resp_mode, resp_fs, resp_fmax, resp_points, resp_out);
        }
        if (*alias) {
            const auto folded = qcars::alias_fold(alias_fin, qcars::SampleRate(alias_fs));
            std::printf("image_hz=%.9g zone=%d\n", folded.image_hz, folded.zone);
            return kExitOk;
        }
        if (*latency) {
            const auto rep = qcars::roundtrip_latency(lat_cfg);
            std::printf("cycles=%d ns=%.9g dac_cycles=%d adc_cycles=%d extrapolated=%d\n",
                        rep.cycles, rep.ns, rep.dac_cycles, rep.adc_cycles,
                        rep.extrapolated ? 1 : 0);
            return kExitOk;
        }
        if (*jitter) {
            const std::uint64_t seed = jseed->count() > 0 ? jitter_seed : default_seed();
            const auto samples = qcars::sample_channel_jitter(jitter_model, seed);
            const auto hist = qcars::jitter_histogram(samples, jitter_bins);
            std::printf("n=%zu mean_ps=%.9g std_ps=%.9g\n", samples.size(), hist.mean,
                        hist.stddev);
            if (!jitter_out.empty()) {
                std::ostringstream os;
                os << "bin_center_ps,count\n";
                char line[64];
                for (std::size_t i = 0; i < hist.counts.size(); ++i) {
                    std::snprintf(line, sizeof(line), "%.9g,%zu\n", hist.bin_center(i),
                                  hist.counts[i]);
                    os << line;
                }
                qcars::atomic_write(jitter_out, os.str());
            }
            return kExitOk;
        }
        if (*fit)
            return cmd_fit(fit_model, fit_in, fit_curve, fit_report);
    } catch (const qcars::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::range_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
