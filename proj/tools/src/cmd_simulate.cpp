#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "commands.hpp"
#include "tlsdyn/dataset_io.hpp"
#include "tlsdyn/parallel.hpp"
#include "tlsdyn/rng.hpp"
#include "tlsdyn/trajectory_analysis.hpp"

namespace tlsdyn::cli {

namespace {

// Densities above this would need fluctuator-fluctuator interactions the model omits.
constexpr double kMaxDensity = 5e4;

double max_abs(const Trajectory& t) {
    double m = 0.0;
    for (double v : t.delta_mhz) m = std::max(m, std::abs(v));
    return m;
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string trajectory_file(std::size_t k) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%03zu.csv", k);
    return name;
}

}  // namespace

int cmd_simulate(Context& ctx) {
    Config& cfg = ctx.config;
    const auto sim = read_sim_config(cfg, ctx.seed);
    const auto n_traj = cfg.unsigned_integer("n_traj", 13);
    if (n_traj == 0) cfg.fail("n_traj", "must be at least 1");
    cfg.reject_unknown_keys();

    const auto trajectories = diffusion::run_ensemble(sim, n_traj, ctx.seed, ctx.threads);
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
        auto out = open_output(ctx, trajectory_file(k));
        io::write_trajectory_csv(out, trajectories[k]);
    }
    {
        auto out = open_output(ctx, "trajectories.csv");
        io::write_ensemble_csv(out, trajectories);
    }

    std::size_t quiet = 0;
    for (const auto& t : trajectories) quiet += max_abs(t) < 1.0 ? 1 : 0;
    const double quiet_fraction = static_cast<double>(quiet) / static_cast<double>(trajectories.size());

    auto summary = open_output(ctx, "summary.csv");
    summary << "n_traj,D_MHz_per_sqrt_hr,D_ci,fraction_max_abs_below_1MHz\n";
    if (trajectories.size() >= 2) {
        const auto d = analysis::estimate_diffusivity(trajectories);
        summary << n_traj << ',' << io::format_number(d.diffusivity) << ',' << io::format_number(d.ci) << ','
                << io::format_number(quiet_fraction) << '\n';
        ctx.log << "D = " << io::format_number(d.diffusivity) << " +/- " << io::format_number(d.ci)
                << " MHz/sqrt(hr) over " << n_traj << " trajectories\n";
    } else {
        summary << n_traj << ",,," << io::format_number(quiet_fraction) << '\n';
        ctx.log << "D needs at least two trajectories\n";
    }
    ctx.log << "max |dE| < 1 MHz in " << quiet << " of " << trajectories.size() << " trajectories\n";
    return kExitOk;
}

int cmd_sweep_density(Context& ctx) {
    Config& cfg = ctx.config;
    const auto densities = cfg.numbers("densities", {1e2, 1e3, 1e4});
    const auto reps = cfg.unsigned_integer("reps", 300);
    const auto n_traj = cfg.unsigned_integer("n_traj", 13);
    if (densities.empty()) cfg.fail("densities", "need at least one density");
    for (double d : densities) {
        if (!(d > 0.0) || d > kMaxDensity) {
            cfg.fail("densities", "each density must lie in (0, 5e4] GHz^-1 um^-3; above 5e4 fluctuators "
                                  "interact with each other, which this simulator does not model");
        }
    }
    if (reps == 0) cfg.fail("reps", "must be at least 1");
    if (n_traj < 2) cfg.fail("n_traj", "a diffusivity needs at least 2 trajectories");
    const auto base = read_sim_config(cfg, ctx.seed);
    cfg.reject_unknown_keys();

    const std::size_t jobs = densities.size() * reps;
    std::vector<double> diffusivity(jobs);
    std::vector<std::size_t> quiet(jobs);
    parallel_for(jobs, ctx.threads, [&](std::size_t job) {
        const std::size_t di = job / reps;
        const std::size_t rep = job % reps;
        diffusion::SimConfig sim = base;
        sim.tf_density = densities[di];
        const auto trajectories = diffusion::run_ensemble(sim, n_traj, derive_seed(ctx.seed, di, rep), 1);
        diffusivity[job] = analysis::estimate_diffusivity(trajectories).diffusivity;
        for (const auto& t : trajectories) quiet[job] += max_abs(t) < 1.0 ? 1 : 0;
    });

    {
        auto out = open_output(ctx, "sweep.csv");
        out << "density,rep,D_MHz_per_sqrt_hr\n";
        for (std::size_t job = 0; job < jobs; ++job) {
            out << io::format_number(densities[job / reps]) << ',' << job % reps << ','
                << io::format_number(diffusivity[job]) << '\n';
        }
    }
    auto summary = open_output(ctx, "sweep_summary.csv");
    summary << "density,reps,median_D,q16_D,q84_D,fraction_max_abs_below_1MHz\n";
    for (std::size_t di = 0; di < densities.size(); ++di) {
        const std::vector<double> ds(diffusivity.begin() + static_cast<std::ptrdiff_t>(di * reps),
                                     diffusivity.begin() + static_cast<std::ptrdiff_t>((di + 1) * reps));
        std::size_t q = 0;
        for (std::size_t r = 0; r < reps; ++r) q += quiet[di * reps + r];
        const double fraction = static_cast<double>(q) / static_cast<double>(reps * n_traj);
        summary << io::format_number(densities[di]) << ',' << reps << ',' << io::format_number(quantile(ds, 0.5))
                << ',' << io::format_number(quantile(ds, 0.16)) << ',' << io::format_number(quantile(ds, 0.84))
                << ',' << io::format_number(fraction) << '\n';
        ctx.log << "density " << io::format_number(densities[di]) << ": median D "
                << io::format_number(quantile(ds, 0.5)) << " MHz/sqrt(hr), " << io::format_number(100.0 * fraction)
                << "% of trajectories with max |dE| < 1 MHz\n";
    }
    return kExitOk;
}

}  // namespace tlsdyn::cli
