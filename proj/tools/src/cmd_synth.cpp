#include <fstream>
#include <ostream>
#include <stdexcept>

#include "commands.hpp"
#include "tlsdyn/dataset_io.hpp"
#include "tlsdyn/rng.hpp"
#include "tlsdyn/spectra.hpp"

namespace tlsdyn::cli {

namespace {

// Parallel peak lists: peak_center_ghz, peak_coupling_mhz, peak_decoherence_mhz, peak_mobile.
std::vector<spectra::LorentzianPeak> read_peaks(Config& config) {
    const auto centers = config.numbers("peak_center_ghz", {});
    const auto couplings = config.numbers("peak_coupling_mhz", {});
    const auto widths = config.numbers("peak_decoherence_mhz", {});
    const auto mobile = config.flags("peak_mobile", std::vector<bool>(centers.size(), false));
    if (couplings.size() != centers.size()) config.fail("peak_coupling_mhz", "length differs from peak_center_ghz");
    if (widths.size() != centers.size()) config.fail("peak_decoherence_mhz", "length differs from peak_center_ghz");
    if (mobile.size() != centers.size()) config.fail("peak_mobile", "length differs from peak_center_ghz");

    std::vector<spectra::LorentzianPeak> peaks;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        spectra::LorentzianPeak p;
        p.center_ghz = centers[i];
        p.coupling_mhz = couplings[i];
        p.decoherence_mhz = widths[i];
        p.mobile = mobile[i];
        if (!(p.coupling_mhz > 0.0)) config.fail("peak_coupling_mhz", "values must be positive");
        if (!(p.decoherence_mhz > 0.0)) config.fail("peak_decoherence_mhz", "values must be positive");
        peaks.push_back(p);
    }
    return peaks;
}

std::vector<double> checked_grid(Config& config, const char* key, double start, double stop, double step) {
    try {
        return spectra::linear_grid(start, stop, step);
    } catch (const std::invalid_argument& e) {
        config.fail(key, e.what());
    }
}

}  // namespace

int cmd_synth(Context& ctx) {
    Config& cfg = ctx.config;

    const double f_lo = cfg.number("grid_start_ghz", 5.55);
    const double f_hi = cfg.number("grid_stop_ghz", 5.95);
    const double f_step_mhz = cfg.number("grid_step_mhz", 1.0);
    const auto grid = checked_grid(cfg, "grid_step_mhz", f_lo, f_hi, f_step_mhz / 1000.0);
    const double t_stop = cfg.number("time_stop_hr", 20.0);
    const double t_step = cfg.number("time_step_hr", 0.25);
    const auto times = checked_grid(cfg, "time_step_hr", 0.0, t_stop, t_step);

    spectra::SpectrumModel model;
    model.background_rate_per_us = cfg.number("background_rate_per_us", model.background_rate_per_us);
    model.qubit_dephasing_mhz = cfg.number("qubit_dephasing_mhz", model.qubit_dephasing_mhz);
    model.peaks = read_peaks(cfg);

    // Fixed resonances: control-line modes and microwave-carrier bleedthrough.
    if (const auto length = cfg.maybe_number("control_line_length_m")) {
        const double eps_r = cfg.number("control_line_eps_r", 2.1);
        const double g = cfg.number("control_line_coupling_mhz", 0.1);
        const double gamma = cfg.number("control_line_decoherence_mhz", 10.0);
        std::vector<double> modes;
        try {
            modes = spectra::spurious_resonances(*length, eps_r, f_lo, f_hi);
        } catch (const std::invalid_argument& e) {
            cfg.fail("control_line_length_m", e.what());
        }
        for (double f : modes) model.peaks.push_back({f, g, gamma, std::nullopt, false});
    }
    const auto carriers = cfg.numbers("carrier_ghz", {});
    const double carrier_g = cfg.number("carrier_coupling_mhz", 0.3);
    const double carrier_gamma = cfg.number("carrier_decoherence_mhz", 3.0);
    for (double f : carriers) model.peaks.push_back({f, carrier_g, carrier_gamma, std::nullopt, false});

    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    spectra::DatasetNoise noise;
    noise.t1_lognormal_sigma = cfg.number("t1_lognormal_sigma", 0.0);
    noise.freq_jitter_mhz = cfg.number("freq_jitter_mhz", 0.0);
    noise.shot_level = cfg.flag("shot_level", false);
    noise.protocol.shots = static_cast<int>(cfg.unsigned_integer("decay_shots", 2000));
    noise.protocol.init_fidelity = cfg.number("init_fidelity", 0.99);
    noise.protocol.readout_fidelity = cfg.number("readout_fidelity", 0.95);
    const double delay_lo = cfg.number("decay_delay_min_us", 0.01);
    const double delay_hi = cfg.number("decay_delay_max_us", 100.0);
    const auto n_delays = cfg.unsigned_integer("decay_delay_count", 40);
    if (noise.t1_lognormal_sigma < 0.0) cfg.fail("t1_lognormal_sigma", "must be >= 0");
    if (noise.freq_jitter_mhz < 0.0) cfg.fail("freq_jitter_mhz", "must be >= 0");
    try {
        noise.protocol.delays_us = spectra::log_spaced(delay_lo, delay_hi, n_delays);
        noise.protocol.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("decay protocol: ") + e.what());
    }

    // Trajectories for mobile peaks: from a file, or simulated.
    std::vector<Trajectory> trajectories;
    const std::size_t n_mobile = model.mobile_count();
    if (const auto path = cfg.maybe_text("trajectories_csv")) {
        std::ifstream in(*path);
        if (!in) throw io::DataError("cannot open " + *path, 0, 0);
        trajectories = io::read_ensemble_csv(in);
        ctx.manifest.add_input(*path);
        if (trajectories.size() != n_mobile) {
            cfg.fail("trajectories_csv", std::to_string(trajectories.size()) + " trajectories for " +
                                             std::to_string(n_mobile) + " mobile peaks");
        }
    } else {
        diffusion::SimConfig defaults;
        defaults.dt = t_step;
        defaults.t_sim = t_stop;
        const auto sim = read_sim_config(cfg, ctx.seed, defaults);
        if (n_mobile > 0) trajectories = diffusion::run_ensemble(sim, n_mobile, derive_seed(ctx.seed, 1), ctx.threads);
    }
    cfg.reject_unknown_keys();

    spectra::T1Dataset ds;
    try {
        ds = spectra::synth_dataset(model, trajectories, grid, times, noise, derive_seed(ctx.seed, 2), ctx.threads);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    {
        auto out = open_output(ctx, "dataset.csv");
        io::write_dataset_csv(out, ds);
    }
    {
        auto out = open_output(ctx, "dataset.json");
        nlohmann::json sidecar = ds.provenance;
        sidecar["n_times"] = ds.n_times();
        sidecar["n_freqs"] = ds.n_freqs();
        out << sidecar.dump(2) << '\n';
    }
    {
        auto out = open_output(ctx, "truth_peaks.csv");
        out << "center_GHz,coupling_MHz,decoherence_MHz,mobile\n";
        for (const auto& p : model.peaks) {
            out << io::format_number(p.center_ghz) << ',' << io::format_number(p.coupling_mhz) << ','
                << io::format_number(p.decoherence_mhz) << ',' << (p.mobile ? 1 : 0) << '\n';
        }
    }
    if (!trajectories.empty()) {
        auto out = open_output(ctx, "truth_trajectories.csv");
        io::write_ensemble_csv(out, trajectories);
    }

    ctx.log << "dataset: " << ds.n_times() << " times x " << ds.n_freqs() << " frequencies, " << model.peaks.size()
            << " peaks (" << n_mobile << " mobile)\n";
    return kExitOk;
}

}  // namespace tlsdyn::cli
