#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "commands.hpp"
#include "tlsdyn/analysis.hpp"
#include "tlsdyn/dataset_io.hpp"

namespace tlsdyn::cli {

namespace {

std::string numbered(const char* pattern, std::size_t k) {
    char name[64];
    std::snprintf(name, sizeof name, pattern, k);
    return name;
}

std::size_t nearest_index(const std::vector<double>& grid, double f) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), f);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return grid.size() - 1;
    const auto i = static_cast<std::size_t>(it - grid.begin());
    return (f - grid[i - 1] <= grid[i] - f) ? i - 1 : i;
}

analysis::BinPolicy read_bins(Config& cfg) {
    analysis::BinPolicy policy;
    const std::string kind = cfg.text("hist_bins", "sturges");
    if (kind == "sturges") {
        policy.kind = analysis::BinPolicy::Kind::sturges;
    } else if (kind == "count") {
        policy.kind = analysis::BinPolicy::Kind::fixed_count;
        policy.count = cfg.unsigned_integer("hist_bin_count", policy.count);
        if (policy.count == 0) cfg.fail("hist_bin_count", "must be at least 1");
    } else if (kind == "width") {
        policy.kind = analysis::BinPolicy::Kind::fixed_width;
        policy.width_us = cfg.number("hist_bin_width_us", policy.width_us);
        if (!(policy.width_us > 0.0)) cfg.fail("hist_bin_width_us", "must be positive");
    } else {
        cfg.fail("hist_bins", "expected 'sturges', 'count' or 'width'");
    }
    return policy;
}

void write_histogram(std::ostream& out, const analysis::Histogram& h) {
    out << "bin_lo_us,bin_hi_us,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        out << io::format_number(h.edges[b]) << ',' << io::format_number(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
    }
}

}  // namespace

int cmd_analyze(Context& ctx) {
    Config& cfg = ctx.config;
    const auto dataset_path = cfg.maybe_text("dataset");
    if (!dataset_path) throw ConfigError("no dataset given (positional argument or key 'dataset')");

    analysis::FitOptions fit_opts;
    fit_opts.mask_ghz = cfg.numbers("mask_ghz", {});
    fit_opts.mask_halfwidth_mhz = cfg.number("mask_halfwidth_mhz", fit_opts.mask_halfwidth_mhz);
    fit_opts.detection_factor = cfg.number("detection_factor", fit_opts.detection_factor);
    fit_opts.max_iterations = static_cast<int>(cfg.unsigned_integer("max_iterations", 400));
    fit_opts.qubit_dephasing_mhz = cfg.number("qubit_dephasing_mhz", fit_opts.qubit_dephasing_mhz);

    analysis::ExtractOptions extract_opts;
    extract_opts.window_halfwidth_mhz = cfg.number("window_halfwidth_mhz", extract_opts.window_halfwidth_mhz);
    extract_opts.follow_edges = cfg.flag("follow_edges", extract_opts.follow_edges);
    extract_opts.max_follow_mhz = cfg.number("max_follow_mhz", extract_opts.max_follow_mhz);
    extract_opts.mask_ghz = fit_opts.mask_ghz;
    extract_opts.mask_halfwidth_mhz = fit_opts.mask_halfwidth_mhz;

    const double min_jump = cfg.number("min_jump_mhz", 4.0);
    const double kappa = cfg.number("kappa", 5.0);
    analysis::JumpStatisticsOptions stats_opts;
    stats_opts.min_jumps_for_energy = cfg.unsigned_integer("min_jumps_for_energy", stats_opts.min_jumps_for_energy);
    stats_opts.level_tolerance = cfg.number("level_tolerance", stats_opts.level_tolerance);
    const bool fit_intercept = cfg.flag("fit_intercept", false);
    const std::string qubit = cfg.text("qubit", "Q1");
    const auto bins = read_bins(cfg);

    if (!(min_jump > 0.0)) cfg.fail("min_jump_mhz", "must be positive");
    if (!(kappa >= 0.0)) cfg.fail("kappa", "must be >= 0");
    if (!(extract_opts.window_halfwidth_mhz > 0.0)) cfg.fail("window_halfwidth_mhz", "must be positive");
    if (!(fit_opts.detection_factor > 0.0)) cfg.fail("detection_factor", "must be positive");
    cfg.reject_unknown_keys();

    const auto ds = io::load_dataset(*dataset_path);
    ctx.manifest.add_input(*dataset_path);

    // 1. Lorentzian fit of the first spectrum seeds the defect list.
    analysis::FitResult fit;
    try {
        fit = analysis::fit_lorentzians(ds.slice(0), {}, fit_opts);
    } catch (const std::invalid_argument& e) {
        throw io::DataError(e.what(), 0, 0);
    }
    std::vector<double> centers;
    for (const auto& p : fit.peaks) {
        centers.push_back(std::clamp(p.peak.center_ghz, ds.freq_ghz.front(), ds.freq_ghz.back()));
    }

    // 2. Follow each defect through time.
    const auto tracks = analysis::extract_trajectories(ds, centers, extract_opts);
    const double duration = ds.time_hr.back() - ds.time_hr.front();

    std::vector<analysis::DefectReport> rows;
    std::vector<std::vector<analysis::JumpEvent>> jumps(tracks.size());
    std::vector<Trajectory> complete;
    for (std::size_t j = 0; j < tracks.size(); ++j) {
        const auto& est = fit.peaks[j];
        const Trajectory& traj = tracks[j].trajectory;
        analysis::DefectReport r;
        r.qubit = qubit;
        r.defect = numbered("TLS%zu", j + 1);
        r.g_i_mhz = est.peak.coupling_mhz;
        r.g_i_ci = est.coupling_ci_mhz;
        r.gamma_i_mhz = est.peak.decoherence_mhz;
        r.gamma_i_ci = est.decoherence_ci_mhz;
        if (traj.size() >= 2) {
            jumps[j] = analysis::detect_jumps(traj, min_jump, kappa);
            if (!jumps[j].empty()) {
                std::vector<double> mags;
                for (const auto& e : jumps[j]) mags.push_back(std::abs(e.amplitude_mhz));
                std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2), mags.end());
                r.g_parallel_mhz = 0.5 * mags[mags.size() / 2];
            }
            const double span = traj.duration_hr();
            if (span > 0.0) {
                const auto stats = analysis::jump_statistics(jumps[j], span, stats_opts);
                r.jump_rate_per_hr = stats.mean_rate_per_hr;
                r.energy_over_kbt = stats.energy_over_kbt;
            }
        }
        rows.push_back(r);
        if (!tracks[j].truncated && traj.size() == ds.n_times()) complete.push_back(traj);
    }

    // 3. Outputs.
    {
        auto out = open_output(ctx, "report.csv");
        analysis::write_report_csv(out, rows);
    }
    {
        auto out = open_output(ctx, "defects.csv");
        out << "defect,center_GHz,center_ci_GHz,g_i_MHz,g_i_ci,Gamma_i_MHz,Gamma_i_ci,regime_plausible,"
               "regime,jumps,truncated,collision\n";
        for (std::size_t j = 0; j < tracks.size(); ++j) {
            const auto& est = fit.peaks[j];
            const Trajectory& traj = tracks[j].trajectory;
            const char* regime = "";
            if (traj.size() >= 2) {
                analysis::RegimeOptions ro;
                ro.min_jump_mhz = min_jump;
                ro.kappa = kappa;
                regime = analysis::to_string(analysis::classify_regime(traj, ro));
            }
            out << rows[j].defect << ',' << io::format_number(est.peak.center_ghz) << ','
                << io::format_number(est.center_ci_ghz) << ',' << io::format_number(est.peak.coupling_mhz) << ','
                << io::format_number(est.coupling_ci_mhz) << ',' << io::format_number(est.peak.decoherence_mhz) << ','
                << io::format_number(est.decoherence_ci_mhz) << ',' << (est.regime_plausible ? 1 : 0) << ','
                << regime << ',' << jumps[j].size() << ',' << (tracks[j].truncated ? 1 : 0) << ','
                << (tracks[j].collision ? 1 : 0) << '\n';
        }
    }
    {
        std::vector<Trajectory> all;
        for (const auto& t : tracks) all.push_back(t.trajectory);
        auto out = open_output(ctx, "trajectories.csv");
        io::write_ensemble_csv(out, all);
    }
    for (std::size_t j = 0; j < tracks.size(); ++j) {
        auto out = open_output(ctx, numbered("traj_%03zu.csv", j));
        io::write_trajectory_csv(out, tracks[j].trajectory);
    }
    {
        auto out = open_output(ctx, "jumps.csv");
        out << "defect,time_hr,amplitude_MHz\n";
        for (std::size_t j = 0; j < jumps.size(); ++j) {
            for (const auto& e : jumps[j]) {
                out << rows[j].defect << ',' << io::format_number(e.time_hr) << ','
                    << io::format_number(e.amplitude_mhz) << '\n';
            }
        }
    }

    // T1 distributions: the first spectrum, and each defect's starting frequency over time.
    {
        auto index = open_output(ctx, "histograms.csv");
        index << "file,cut,index,min_us,median_us,max_us,bimodality,multimodal\n";
        auto emit = [&](const std::string& file, analysis::Cut cut) {
            const auto h = analysis::t1_distribution(ds, cut, bins);
            auto out = open_output(ctx, file);
            write_histogram(out, h);
            index << file << ',' << (cut.axis == analysis::CutAxis::constant_time ? "time" : "frequency") << ','
                  << cut.index << ',' << io::format_number(h.min) << ',' << io::format_number(h.median) << ','
                  << io::format_number(h.max) << ',' << io::format_number(h.bimodality_coefficient) << ','
                  << (h.multimodal ? 1 : 0) << '\n';
        };
        emit("hist_time_000.csv", {analysis::CutAxis::constant_time, 0});
        for (std::size_t j = 0; j < centers.size(); ++j) {
            emit(numbered("hist_defect_%03zu.csv", j),
                 {analysis::CutAxis::constant_frequency, nearest_index(ds.freq_ghz, centers[j])});
        }
    }

    std::optional<analysis::DiffusivityEstimate> diffusivity;
    if (complete.size() >= 2 && duration > 0.0) diffusivity = analysis::estimate_diffusivity(complete, fit_intercept);
    {
        auto out = open_output(ctx, "summary.csv");
        out << "n_defects,n_trajectories_used,D_MHz_per_sqrt_hr,D_ci,background_rate_per_us,fit_converged\n";
        out << tracks.size() << ',' << complete.size() << ','
            << (diffusivity ? io::format_number(diffusivity->diffusivity) : "") << ','
            << (diffusivity ? io::format_number(diffusivity->ci) : "") << ','
            << io::format_number(fit.background_rate_per_us) << ',' << (fit.converged ? 1 : 0) << '\n';
    }

    ctx.log << tracks.size() << " defects in " << ds.n_times() << " x " << ds.n_freqs() << " dataset\n";
    if (diffusivity) {
        ctx.log << "D = " << io::format_number(diffusivity->diffusivity) << " +/- "
                << io::format_number(diffusivity->ci) << " MHz/sqrt(hr) over " << complete.size()
                << " trajectories\n";
    }
    if (!fit.converged) {
        ctx.log << "warning: spectrum fit did not converge (" << fit.message << ")\n";
        return kExitConvergence;
    }
    return kExitOk;
}

}  // namespace tlsdyn::cli
