#include "tlsdyn/trajectory_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace tlsdyn::analysis {

namespace {

constexpr double kMhzPerGhz = 1000.0;

double median_abs(std::vector<double> v) {
    if (v.empty()) return 0.0;
    for (double& x : v) x = std::abs(x);
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

std::vector<double> successive_differences(const Trajectory& t) {
    std::vector<double> d;
    for (std::size_t k = 1; k < t.size(); ++k) d.push_back(t.delta_mhz[k] - t.delta_mhz[k - 1]);
    return d;
}

// Index of the frequency of maximum rate near `center_ghz`, or empty when the maximum is
// pinned to the edge of the measured band.
std::optional<std::size_t> locate_peak(const spectra::T1Dataset& ds, std::size_t ti, double center_ghz,
                                       const ExtractOptions& options) {
    const auto& f = ds.freq_ghz;
    const std::size_t n = f.size();
    const double hw = options.window_halfwidth_mhz / kMhzPerGhz;
    auto rate = [&](std::size_t fi) {
        for (double m : options.mask_ghz) {
            if (std::abs(f[fi] - m) * kMhzPerGhz <= options.mask_halfwidth_mhz) return 0.0;
        }
        return 1.0 / ds.at(ti, fi);
    };

    const auto lo_it = std::lower_bound(f.begin(), f.end(), center_ghz - hw);
    const auto hi_it = std::upper_bound(f.begin(), f.end(), center_ghz + hw);
    std::size_t lo = static_cast<std::size_t>(lo_it - f.begin());
    std::size_t hi = static_cast<std::size_t>(hi_it - f.begin());
    if (lo >= hi) {
        // Window narrower than the grid spacing: use the nearest point.
        std::size_t nearest = std::min(lo, n - 1);
        if (nearest > 0 && std::abs(f[nearest - 1] - center_ghz) < std::abs(f[nearest] - center_ghz)) --nearest;
        lo = nearest;
        hi = nearest + 1;
    }

    std::size_t best = lo;
    for (std::size_t fi = lo; fi < hi; ++fi) {
        if (rate(fi) > rate(best)) best = fi;
    }

    if (options.follow_edges) {
        const double reach = options.max_follow_mhz / kMhzPerGhz;
        if (best == hi - 1) {
            while (best + 1 < n && std::abs(f[best + 1] - center_ghz) <= reach && rate(best + 1) > rate(best)) ++best;
        } else if (best == lo) {
            while (best > 0 && std::abs(f[best - 1] - center_ghz) <= reach && rate(best - 1) > rate(best)) --best;
        }
    }

    if (n > 1 && (best == 0 || best == n - 1)) {
        const std::size_t inner = best == 0 ? 1 : n - 2;
        if (rate(best) > rate(inner)) return std::nullopt;
    }
    return best;
}

void check_center(const spectra::T1Dataset& ds, double center_ghz) {
    if (ds.freq_ghz.empty() || center_ghz < ds.freq_ghz.front() || center_ghz > ds.freq_ghz.back()) {
        throw std::invalid_argument("extract_trajectory: window center outside the dataset band");
    }
}

}  // namespace

ExtractedTrajectory extract_trajectory(const spectra::T1Dataset& dataset, double window_center_ghz,
                                       const ExtractOptions& options) {
    const double centers[] = {window_center_ghz};
    return extract_trajectories(dataset, centers, options).front();
}

std::vector<ExtractedTrajectory> extract_trajectories(const spectra::T1Dataset& dataset,
                                                      std::span<const double> window_centers_ghz,
                                                      const ExtractOptions& options) {
    dataset.validate();
    for (double c : window_centers_ghz) check_center(dataset, c);

    const std::size_t m = window_centers_ghz.size();
    std::vector<ExtractedTrajectory> out(m);
    std::vector<double> prev(window_centers_ghz.begin(), window_centers_ghz.end());
    std::vector<bool> active(m, true);

    for (std::size_t ti = 0; ti < dataset.n_times(); ++ti) {
        std::vector<std::optional<std::size_t>> found(m);
        for (std::size_t j = 0; j < m; ++j) {
            if (!active[j]) continue;
            found[j] = locate_peak(dataset, ti, prev[j], options);
            if (!found[j]) {
                active[j] = false;
                out[j].truncated = true;
            }
        }

        std::vector<double> next(m);
        for (std::size_t j = 0; j < m; ++j) {
            if (!active[j]) continue;
            next[j] = dataset.freq_ghz[*found[j]];
            for (std::size_t o = 0; o < m; ++o) {
                if (o == j || !active[o] || found[o] != found[j]) continue;
                out[j].collision = true;
                const double dj = std::abs(prev[j] - next[j]);
                const double d_o = std::abs(prev[o] - next[j]);
                if (d_o < dj || (d_o == dj && o < j)) next[j] = prev[j];
            }
        }

        for (std::size_t j = 0; j < m; ++j) {
            if (!active[j]) continue;
            // The first slice fixes the reference frequency.
            const double origin = out[j].center_ghz.empty() ? next[j] : out[j].center_ghz.front();
            out[j].center_ghz.push_back(next[j]);
            out[j].trajectory.times_hr.push_back(dataset.time_hr[ti]);
            out[j].trajectory.delta_mhz.push_back((next[j] - origin) * kMhzPerGhz);
            prev[j] = next[j];
        }
    }
    return out;
}

double jump_noise_floor(const Trajectory& trajectory, double kappa) {
    return kappa * median_abs(successive_differences(trajectory));
}

std::vector<JumpEvent> detect_jumps(const Trajectory& trajectory, double min_jump_mhz, double kappa) {
    if (!(min_jump_mhz > 0.0)) throw std::invalid_argument("detect_jumps: min_jump must be positive");
    const double threshold = std::max(min_jump_mhz, jump_noise_floor(trajectory, kappa));
    std::vector<JumpEvent> events;
    for (std::size_t k = 1; k < trajectory.size(); ++k) {
        const double d = trajectory.delta_mhz[k] - trajectory.delta_mhz[k - 1];
        if (std::abs(d) >= threshold) events.push_back({trajectory.times_hr[k], d});
    }
    return events;
}

JumpStatistics jump_statistics(std::span<const JumpEvent> events, double total_time_hr,
                               const JumpStatisticsOptions& options) {
    if (!(total_time_hr > 0.0)) throw std::invalid_argument("jump_statistics: total time must be positive");
    JumpStatistics stats;
    stats.jump_count = events.size();
    stats.mean_rate_per_hr = static_cast<double>(events.size()) / total_time_hr;
    if (events.size() < std::max<std::size_t>(options.min_jumps_for_energy, 3)) return stats;

    std::vector<double> mags;
    for (const auto& e : events) mags.push_back(e.amplitude_mhz);
    const double med = median_abs(mags);
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (std::abs(std::abs(events[i].amplitude_mhz) - med) > options.level_tolerance * med) return stats;
        if (i > 0 && (events[i].amplitude_mhz > 0) == (events[i - 1].amplitude_mhz > 0)) return stats;
    }

    // A dwell after an upward jump is spent in the upper level.
    double up_sum = 0.0, down_sum = 0.0;
    std::size_t up_n = 0, down_n = 0;
    for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        const double dwell = events[i + 1].time_hr - events[i].time_hr;
        if (events[i].amplitude_mhz > 0) {
            up_sum += dwell;
            ++up_n;
        } else {
            down_sum += dwell;
            ++down_n;
        }
    }
    if (up_n == 0 || down_n == 0) return stats;
    const double up_mean = up_sum / static_cast<double>(up_n);
    const double down_mean = down_sum / static_cast<double>(down_n);
    const double short_dwell = std::min(up_mean, down_mean);
    const double long_dwell = std::max(up_mean, down_mean);
    if (!(short_dwell > 0.0)) return stats;
    stats.rate_fast_per_hr = 1.0 / short_dwell;
    stats.rate_slow_per_hr = 1.0 / long_dwell;
    stats.energy_over_kbt = std::log(long_dwell / short_dwell);
    return stats;
}

DiffusivityEstimate estimate_diffusivity(std::span<const Trajectory> trajectories, bool fit_intercept) {
    if (trajectories.size() < 2) throw std::invalid_argument("estimate_diffusivity: need at least two trajectories");
    const Trajectory& ref = trajectories.front();
    for (const auto& t : trajectories) {
        if (t.size() != ref.size()) throw std::invalid_argument("estimate_diffusivity: trajectory lengths differ");
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (std::abs(t.times_hr[k] - ref.times_hr[k]) > 1e-9) {
                throw std::invalid_argument("estimate_diffusivity: time grids differ");
            }
        }
    }
    const std::size_t m = ref.size();
    const auto n = static_cast<double>(trajectories.size());
    if (m < (fit_intercept ? 3u : 2u)) throw std::invalid_argument("estimate_diffusivity: too few time points");

    DiffusivityEstimate est;
    std::vector<double> x(m);
    for (std::size_t k = 0; k < m; ++k) {
        double mean = 0.0;
        for (const auto& t : trajectories) mean += t.delta_mhz[k];
        mean /= n;
        double ss = 0.0;
        for (const auto& t : trajectories) ss += (t.delta_mhz[k] - mean) * (t.delta_mhz[k] - mean);
        const double elapsed = ref.times_hr[k] - ref.times_hr[0];
        est.times_hr.push_back(elapsed);
        est.sigma_mhz.push_back(std::sqrt(ss / (n - 1.0)));
        x[k] = 2.0 * std::sqrt(elapsed);
    }
    const auto& y = est.sigma_mhz;

    if (!fit_intercept) {
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            sxy += x[k] * y[k];
            sxx += x[k] * x[k];
        }
        if (!(sxx > 0.0)) throw std::invalid_argument("estimate_diffusivity: no elapsed time");
        est.diffusivity = sxy / sxx;
        double rss = 0.0;
        for (std::size_t k = 0; k < m; ++k) rss += std::pow(y[k] - est.diffusivity * x[k], 2);
        est.ci = std::sqrt(rss / static_cast<double>(m - 1) / sxx);
        return est;
    }

    const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        sxy += (x[k] - xm) * (y[k] - ym);
        sxx += (x[k] - xm) * (x[k] - xm);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("estimate_diffusivity: no elapsed time");
    est.diffusivity = sxy / sxx;
    est.intercept_mhz = ym - est.diffusivity * xm;
    double rss = 0.0;
    for (std::size_t k = 0; k < m; ++k) rss += std::pow(y[k] - *est.intercept_mhz - est.diffusivity * x[k], 2);
    est.ci = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
    return est;
}

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::telegraphic: return "telegraphic";
        case Regime::diffusive: return "diffusive";
        case Regime::mixed: return "mixed";
        case Regime::quiet: return "quiet";
    }
    return "unknown";
}

Regime classify_regime(const Trajectory& trajectory, const RegimeOptions& options) {
    const auto diffs = successive_differences(trajectory);
    double total = 0.0;
    for (double d : diffs) total += std::abs(d);
    const auto jumps = detect_jumps(trajectory, options.min_jump_mhz, options.kappa);
    if (jumps.empty()) {
        double range = 0.0;
        if (!trajectory.empty()) {
            const auto [lo, hi] = std::minmax_element(trajectory.delta_mhz.begin(), trajectory.delta_mhz.end());
            range = *hi - *lo;
        }
        return range <= options.noise_floor_mhz ? Regime::quiet : Regime::diffusive;
    }
    double jump_total = 0.0;
    for (const auto& j : jumps) jump_total += std::abs(j.amplitude_mhz);
    return jump_total >= options.telegraphic_fraction * total ? Regime::telegraphic : Regime::mixed;
}

}  // namespace tlsdyn::analysis
