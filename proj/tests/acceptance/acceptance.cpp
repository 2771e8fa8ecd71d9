// End-to-end acceptance checks. `acceptance --criterion N` runs one criterion; without
// arguments all of them run. Each prints one PASS/FAIL line; the exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "oracles.hpp"
#include "tlsdyn/dataset_io.hpp"
#include "tlsdyn/diffusion.hpp"
#include "tlsdyn/fitting.hpp"
#include "tlsdyn/parallel.hpp"
#include "tlsdyn/trajectory_analysis.hpp"

namespace fs = std::filesystem;
using namespace tlsdyn;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += std::string(ok ? "" : "[x] ") + what;
    }
};

std::string fmt(double v, const char* format = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

fs::path work_dir(int criterion) {
    const auto dir = fs::temp_directory_path() / ("tlsdyn_acceptance_c" + std::to_string(criterion));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + TLSDYN_EXE + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

// Header-keyed rows of a simple CSV.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::map<std::string, std::string>> rows;
    std::string line;
    std::vector<std::string> header;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ',')) out.push_back(f);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header.empty()) {
            header = split(line);
            continue;
        }
        const auto fields = split(line);
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) row[header[i]] = fields[i];
        rows.push_back(row);
    }
    return rows;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Diffusivity sweep through the CLI at the default 300 repetitions of 13 trajectories.
Outcome criterion1() {
    Outcome o;
    const auto dir = work_dir(1);
    const auto cfg = dir / "sweep.yaml";
    std::ofstream(cfg) << "densities: [1.0e2, 1.0e3, 1.0e4]\nreps: 300\nn_traj: 13\nseed: 1\n";
    const auto start = std::chrono::steady_clock::now();
    const int code = run_cli("sweep-density --config " + quoted(cfg) + " --out " + quoted(dir / "out"), dir / "log");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(code == 0, "exit " + std::to_string(code));
    if (code != 0) return o;

    const auto sweep = read_csv(dir / "out/sweep.csv");
    std::map<double, std::vector<double>> samples;
    for (const auto& r : sweep) samples[std::stod(r.at("density"))].push_back(std::stod(r.at("D_MHz_per_sqrt_hr")));
    const auto summary = read_csv(dir / "out/sweep_summary.csv");
    std::map<double, double> quiet;
    for (const auto& r : summary) quiet[std::stod(r.at("density"))] = std::stod(r.at("fraction_max_abs_below_1MHz"));

    bool counts_ok = samples.size() == 3;
    for (const auto& [d, v] : samples) counts_ok = counts_ok && v.size() == 300;
    o.check(counts_ok, "300 samples per density");
    if (!counts_ok) return o;

    const double m2 = median(samples[1e2]), m3 = median(samples[1e3]), m4 = median(samples[1e4]);
    o.check(m4 >= 1.5 && m4 <= 3.5, "median D(1e4) = " + fmt(m4) + " in [1.5, 3.5]");
    o.check(m2 < m3 && m3 < m4, "monotone medians " + fmt(m2) + " < " + fmt(m3) + " < " + fmt(m4));
    o.check(quiet[1e3] >= 0.70, "sub-MHz fraction at 1e3 = " + fmt(quiet[1e3]) + " >= 0.70");
    o.check(seconds < 600.0, "runtime " + fmt(seconds, "%.1f") + " s < 600 s");
    return o;
}

// Closed-form anchors through the constants command.
Outcome criterion2() {
    Outcome o;
    const auto dir = work_dir(2);
    const int code = run_cli("constants --out " + quoted(dir / "out"), dir / "log");
    o.check(code == 0, "exit " + std::to_string(code));
    if (code != 0) return o;
    std::map<std::string, double> computed;
    for (const auto& r : read_csv(dir / "out/constants.csv")) computed[r.at("quantity")] = std::stod(r.at("computed"));

    auto within_factor = [](double value, double target, double factor) {
        return value >= target / factor && value <= target * factor;
    };
    const double spacing = computed["control_line_spacing"];
    o.check(std::abs(spacing - 177.0) <= 0.01 * 177.0, "control line " + fmt(spacing) + " MHz vs 177 +/- 1%");
    const double boltzmann = computed["boltzmann_factor_5.5GHz_15mK"];
    o.check(std::abs(boltzmann - 2.2e-8) <= 0.05 * 2.2e-8, "Boltzmann " + fmt(boltzmann) + " vs 2.2e-8 +/- 5%");
    const double c20 = computed["coupling_x_20um"], c1 = computed["coupling_x_1um"], c2n = computed["coupling_x_2nm"];
    o.check(within_factor(c20, 0.010, 2.5), "coupling 20 um " + fmt(c20) + " MHz vs 0.010 (x2.5)");
    o.check(within_factor(c1, 0.250, 2.5), "coupling 1 um " + fmt(c1) + " MHz vs 0.250 (x2.5)");
    o.check(within_factor(c2n, 100.0, 2.5), "coupling 2 nm " + fmt(c2n) + " MHz vs 100 (x2.5)");
    const double gzz = computed["gzz_collinear_1eA_35nm"];
    o.check(within_factor(gzz, 30.0, 1.2), "g_zz " + fmt(gzz) + " MHz vs 30 (x1.2)");
    return o;
}

spectra::SpectrumModel single_peak_model() {
    spectra::SpectrumModel m;
    m.peaks = {{5.75, 0.25, 5.0, std::nullopt, false}};
    m.background_rate_per_us = 0.02;
    return m;
}

// Lorentzian fit round trips: noiseless recovery and CI coverage under shot noise.
Outcome criterion3() {
    Outcome o;
    const auto truth = single_peak_model();
    const auto grid = spectra::linear_grid(5.55, 5.95, 0.001);

    const auto clean = analysis::fit_lorentzians(spectra::synth_spectrum(truth, grid));
    const bool one_peak = clean.converged && clean.peaks.size() == 1;
    o.check(one_peak, "noiseless fit converged with one peak");
    if (!one_peak) return o;
    const auto& p = clean.peaks[0].peak;
    const auto& t = truth.peaks[0];
    const double worst = std::max({std::abs(p.center_ghz / t.center_ghz - 1.0),
                                   std::abs(p.coupling_mhz / t.coupling_mhz - 1.0),
                                   std::abs(p.decoherence_mhz / t.decoherence_mhz - 1.0),
                                   std::abs(clean.background_rate_per_us / truth.background_rate_per_us - 1.0)});
    o.check(worst <= 0.01, "noiseless worst relative error " + fmt(worst) + " <= 1%");

    const std::size_t seeds = 200;
    spectra::DatasetNoise noise;
    noise.shot_level = true;
    std::vector<std::array<int, 4>> covered(seeds, {0, 0, 0, 0});
    std::vector<int> usable(seeds, 0);
    const std::vector<double> stamp = {0.0};
    parallel_for(seeds, hardware_threads(), [&](std::size_t s) {
        const auto ds = spectra::synth_dataset(truth, {}, grid, stamp, noise, derive_seed(2026, s), 1);
        const auto fit = analysis::fit_lorentzians(ds.slice(0));
        if (!fit.converged || fit.peaks.size() != 1) return;
        usable[s] = 1;
        const auto& e = fit.peaks[0];
        covered[s][0] = std::abs(e.peak.center_ghz - t.center_ghz) <= e.center_ci_ghz;
        covered[s][1] = std::abs(e.peak.coupling_mhz - t.coupling_mhz) <= e.coupling_ci_mhz;
        covered[s][2] = std::abs(e.peak.decoherence_mhz - t.decoherence_mhz) <= e.decoherence_ci_mhz;
        covered[s][3] = std::abs(fit.background_rate_per_us - truth.background_rate_per_us) <= fit.background_ci;
    });
    int n_usable = 0;
    std::array<int, 4> hits{0, 0, 0, 0};
    for (std::size_t s = 0; s < seeds; ++s) {
        n_usable += usable[s];
        for (int k = 0; k < 4; ++k) hits[static_cast<std::size_t>(k)] += covered[s][static_cast<std::size_t>(k)];
    }
    o.check(n_usable == static_cast<int>(seeds), std::to_string(n_usable) + "/200 shot-level fits usable");
    const char* names[] = {"f_i", "g_i", "Gamma_i", "Gamma_1Q"};
    for (std::size_t k = 0; k < 4; ++k) {
        const double coverage = static_cast<double>(hits[k]) / static_cast<double>(seeds);
        o.check(coverage >= 0.58 && coverage <= 0.78,
                std::string(names[k]) + " coverage " + fmt(coverage, "%.3f") + " in [0.58, 0.78]");
    }
    return o;
}

// Decay fits with the reference protocol.
Outcome criterion4() {
    Outcome o;
    const spectra::DecayProtocol protocol;  // 40 log-spaced delays, 0.01-100 us, 2000 shots
    for (double t1 : {1.0, 5.0, 20.0, 80.0}) {
        std::vector<int> good(100, 0);
        parallel_for(good.size(), hardware_threads(), [&](std::size_t s) {
            const auto fit = analysis::fit_decay(spectra::synth_decay(t1, protocol, derive_seed(404, s)));
            good[s] = fit.ok && std::abs(fit.t1_us - t1) <= 0.05 * t1;
        });
        const int n = std::accumulate(good.begin(), good.end(), 0);
        o.check(n >= 95, "T1 = " + fmt(t1) + " us: " + std::to_string(n) + "/100 within 5%");
    }
    return o;
}

struct InjectedTruth {
    Trajectory trajectory;
    std::vector<double> flip_times;  // of the injected fluctuator
};

// Bath of weak fluctuators (|2 g| < 1 MHz) plus, optionally, one strong telegraph fluctuator.
InjectedTruth truth_trajectory(const diffusion::SimConfig& cfg, std::uint64_t seed, bool inject) {
    Engine rng = make_engine(seed);
    auto pop = diffusion::populate_fluctuators(cfg, rng);
    std::erase_if(pop.fluctuators, [](const diffusion::Fluctuator& f) { return std::abs(2.0 * f.g_parallel_mhz) >= 1.0; });
    if (inject) {
        diffusion::Fluctuator strong;
        strong.g_parallel_mhz = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * (2.5 + 12.5 * uniform01(rng));
        strong.flip_rate = 0.1 + 0.9 * uniform01(rng);
        strong.state = 1;
        pop.fluctuators.push_back(strong);
    }
    InjectedTruth out;
    out.trajectory = Trajectory::zeros(cfg.steps(), cfg.dt);
    double offset = 0.0;
    for (std::size_t k = 1; k <= cfg.steps(); ++k) {
        const int before = inject ? pop.fluctuators.back().state : 0;
        offset = diffusion::step(pop.fluctuators, offset, cfg.dt, rng);
        if (inject && pop.fluctuators.back().state != before) out.flip_times.push_back(out.trajectory.times_hr[k]);
        out.trajectory.delta_mhz[k] = offset;
    }
    return out;
}

// Synthesized dataset from 13 known trajectories, analyzed through the CLI.
Outcome criterion5() {
    Outcome o;
    const auto dir = work_dir(5);
    diffusion::SimConfig cfg;  // density 1e4, dt 15 min, 30 hr

    const std::size_t n = 13;
    std::vector<InjectedTruth> truth;
    std::vector<Trajectory> trajectories;
    for (std::size_t k = 0; k < n; ++k) {
        truth.push_back(truth_trajectory(cfg, derive_seed(55, k), k % 2 == 0));
        trajectories.push_back(truth.back().trajectory);
    }
    {
        std::ofstream out(dir / "truth.csv");
        io::write_ensemble_csv(out, trajectories);
    }

    std::vector<double> centers;
    std::string c_list, g_list, w_list, m_list;
    for (std::size_t k = 0; k < n; ++k) {
        centers.push_back(5.0 + 0.1 * static_cast<double>(k));
        const std::string sep = k ? ", " : "";
        c_list += sep + fmt(centers.back(), "%.1f");
        g_list += sep + "0.25";
        w_list += sep + "5";
        m_list += sep + "true";
    }
    std::ofstream(dir / "synth.yaml") << "grid_start_ghz: 4.9\ngrid_stop_ghz: 6.3\ngrid_step_mhz: 1\n"
                                      << "time_stop_hr: 30\ntime_step_hr: 0.25\nbackground_rate_per_us: 0.02\n"
                                      << "peak_center_ghz: [" << c_list << "]\npeak_coupling_mhz: [" << g_list
                                      << "]\npeak_decoherence_mhz: [" << w_list << "]\npeak_mobile: [" << m_list
                                      << "]\ntrajectories_csv: " << (dir / "truth.csv").string() << "\n";
    int code = run_cli("synth --config " + quoted(dir / "synth.yaml") + " --out " + quoted(dir / "syn"), dir / "log");
    o.check(code == 0, "synth exit " + std::to_string(code));
    if (code != 0) return o;
    code = run_cli("analyze " + quoted(dir / "syn/dataset.csv") + " --out " + quoted(dir / "ana"), dir / "log");
    o.check(code == 0, "analyze exit " + std::to_string(code));
    if (code != 0) return o;

    const auto defects = read_csv(dir / "ana/defects.csv");
    o.check(defects.size() == n, std::to_string(defects.size()) + " defects found");
    if (defects.size() != n) return o;

    // Match each true defect to the nearest reported center.
    std::vector<std::size_t> match(n);
    for (std::size_t k = 0; k < n; ++k) {
        double best = 1e9;
        for (std::size_t d = 0; d < n; ++d) {
            const double dist = std::abs(std::stod(defects[d].at("center_GHz")) - centers[k]);
            if (dist < best) {
                best = dist;
                match[k] = d;
            }
        }
    }

    std::size_t worst_tracked = 0;
    double worst_fraction = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "traj_%03zu.csv", match[k]);
        std::ifstream in(dir / "ana" / name);
        const auto est = io::read_trajectory_csv(in);
        const auto& tr = truth[k].trajectory;
        std::size_t within = 0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            if (i < est.size() && std::abs(est.delta_mhz[i] - tr.delta_mhz[i]) <= 1.0) ++within;
        }
        const double fraction = static_cast<double>(within) / static_cast<double>(tr.size());
        if (fraction < worst_fraction) {
            worst_fraction = fraction;
            worst_tracked = k;
        }
    }
    o.check(worst_fraction >= 0.95, "worst trajectory " + std::to_string(worst_tracked) + " within 1 MHz at " +
                                         fmt(100.0 * worst_fraction, "%.1f") + "% of samples");

    std::map<std::string, std::vector<double>> reported;
    for (const auto& r : read_csv(dir / "ana/jumps.csv")) reported[r.at("defect")].push_back(std::stod(r.at("time_hr")));
    std::size_t injected = 0, found = 0, false_positives = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& times = reported[defects[match[k]].at("defect")];
        if (truth[k].flip_times.empty()) {
            false_positives += times.size();
            continue;
        }
        for (double t : truth[k].flip_times) {
            ++injected;
            found += std::any_of(times.begin(), times.end(), [&](double x) { return std::abs(x - t) < 1e-6; }) ? 1 : 0;
        }
    }
    o.check(injected > 0 && found == injected,
            "injected jumps detected " + std::to_string(found) + "/" + std::to_string(injected));
    o.check(false_positives == 0, std::to_string(false_positives) + " jumps on jump-free trajectories");

    const double d_truth = analysis::estimate_diffusivity(trajectories).diffusivity;
    const auto summary = read_csv(dir / "ana/summary.csv");
    const std::string d_text = summary.empty() ? "" : summary[0].at("D_MHz_per_sqrt_hr");
    const double d_est = d_text.empty() ? NAN : std::stod(d_text);
    o.check(std::abs(d_est - d_truth) <= 0.2 * d_truth,
            "D = " + fmt(d_est) + " vs truth " + fmt(d_truth) + " (20%)");
    return o;
}

// Estimator and sampler correctness.
Outcome criterion6() {
    Outcome o;

    const double dt = 0.25, s = 0.7;
    const double expected_d = s / (2.0 * std::sqrt(dt));
    const auto walks = oracle::gaussian_walks(100, 120, dt, s, 606);
    const double d = analysis::estimate_diffusivity(walks).diffusivity;
    o.check(std::abs(d - expected_d) <= 0.15 * expected_d,
            "random-walk D " + fmt(d) + " vs " + fmt(expected_d) + " (15%)");

    const auto ev = oracle::telegraph_events(200, 0.3, 0.3 * std::exp(1.0), 12.0, 607);
    std::vector<analysis::JumpEvent> events;
    for (std::size_t i = 0; i < ev.times.size(); ++i) events.push_back({ev.times[i], ev.amplitudes[i]});
    const auto stats = analysis::jump_statistics(events, ev.total_time);
    const double e = stats.energy_over_kbt.value_or(NAN);
    o.check(std::abs(e - 1.0) <= 0.2, "E/kT from 200 jumps = " + fmt(e) + " (1.0 +/- 0.2)");

    Engine rng = make_engine(608);
    const int draws = 1000000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += diffusion::sample_dipole_magnitude(rng, 1.0);
    const double mean = sum / draws, target = 4.0 / (3.0 * kPi);
    o.check(std::abs(mean / target - 1.0) <= 0.005, "dipole mean " + fmt(mean, "%.5f") + " vs " + fmt(target, "%.5f"));

    // Decades of the default rate range [1/60, 4] hr^-1.
    const double lo = 1.0 / 60.0, hi = 4.0;
    const std::vector<double> edges = {lo, 0.1, 1.0, hi};
    std::vector<int> counts(edges.size() - 1, 0);
    for (int i = 0; i < draws; ++i) {
        const double g = diffusion::sample_flip_rate(uniform01(rng), lo, hi);
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            if (g >= edges[b] && (g < edges[b + 1] || b + 2 == edges.size())) {
                ++counts[b];
                break;
            }
        }
    }
    double worst_z = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        const double p = std::log(edges[b + 1] / edges[b]) / std::log(hi / lo);
        const double z = std::abs(counts[b] - draws * p) / std::sqrt(draws * p * (1.0 - p));
        worst_z = std::max(worst_z, z);
    }
    o.check(worst_z <= 3.0, "flip-rate decades worst deviation " + fmt(worst_z, "%.2f") + " sigma");
    return o;
}

// Every command re-run from its manifest reproduces its CSV outputs byte for byte.
Outcome criterion7() {
    Outcome o;
    const auto dir = work_dir(7);
    std::ofstream(dir / "synth.yaml") << "seed: 77\ntime_stop_hr: 5\npeak_center_ghz: [5.65, 5.8]\n"
                                      << "peak_coupling_mhz: [0.25, 0.3]\npeak_decoherence_mhz: [5, 4]\n"
                                      << "peak_mobile: [true, true]\nt1_lognormal_sigma: 0.05\n";
    std::ofstream(dir / "simulate.yaml") << "seed: 78\nn_traj: 5\n";
    std::ofstream(dir / "sweep.yaml") << "seed: 79\ndensities: [1.0e3, 1.0e4]\nreps: 4\n";
    std::ofstream(dir / "constants.yaml") << "seed: 80\n";

    struct Run {
        std::string command;
        std::string args;
    };
    const std::vector<Run> runs = {
        {"synth", "--config " + quoted(dir / "synth.yaml")},
        {"simulate", "--config " + quoted(dir / "simulate.yaml")},
        {"sweep-density", "--config " + quoted(dir / "sweep.yaml")},
        {"constants", "--config " + quoted(dir / "constants.yaml")},
        {"analyze", quoted(dir / "synth/dataset.csv")},
    };
    for (const auto& r : runs) {
        const auto first = dir / r.command;
        const auto second = dir / (r.command + "-rerun");
        int code = run_cli(r.command + " " + r.args + " --out " + quoted(first), dir / "log");
        if (code != 0) {
            o.check(false, r.command + " exit " + std::to_string(code));
            continue;
        }
        code = run_cli(r.command + " --config " + quoted(first / "manifest.json") + " --out " + quoted(second),
                       dir / "log");
        if (code != 0) {
            o.check(false, r.command + " rerun exit " + std::to_string(code));
            continue;
        }
        std::ifstream in(first / "manifest.json");
        const auto manifest = nlohmann::json::parse(in);
        std::size_t compared = 0, identical = 0;
        for (const auto& out : manifest.at("outputs")) {
            const std::string rel = out.at("path").get<std::string>();
            if (fs::path(rel).extension() != ".csv") continue;
            ++compared;
            identical += fs::exists(second / rel) && cli::sha256_file(first / rel) == cli::sha256_file(second / rel);
        }
        o.check(compared > 0 && identical == compared,
                r.command + " " + std::to_string(identical) + "/" + std::to_string(compared) + " CSVs identical");
    }
    return o;
}

const char* kTitles[] = {
    "",
    "diffusivity sweep",
    "closed-form anchors",
    "Lorentzian fit round trips",
    "decay fit round trips",
    "end-to-end oracle",
    "estimator correctness",
    "manifest determinism",
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            selected.push_back(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
            return 2;
        }
    }
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7};

    Outcome (*const criteria[])() = {nullptr,     criterion1, criterion2, criterion3,
                                     criterion4, criterion5, criterion6, criterion7};
    bool all = true;
    for (int c : selected) {
        if (c < 1 || c > 7) {
            std::fprintf(stderr, "unknown criterion %d\n", c);
            return 2;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[c]();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s) [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", c, kTitles[c], seconds,
                    o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
