// Spectral-diffusion trajectories from T1 data and their estimators

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tlsdyn/spectra.hpp"
#include "tlsdyn/trajectory.hpp"

namespace tlsdyn::analysis {

struct ExtractOptions {
    double window_halfwidth_mhz = 20.0;
    /// When the window maximum sits on a window edge, keep climbing the rate uphill
    /// outside the window (up to max_follow_mhz from the window center).
    bool follow_edges = true;
    double max_follow_mhz = 200.0;
    /// Frequencies never reported as a defect position (spurious resonances).
    std::vector<double> mask_ghz;
    double mask_halfwidth_mhz = 5.0;
};

struct ExtractedTrajectory {
    Trajectory trajectory;               // ΔE relative to the first slice
    std::vector<double> center_ghz;      // absolute estimate per slice
    bool truncated = false;              // stopped early: defect left the measured band
    bool collision = false;              // another defect claimed the same frequency
};

/// Per time slice, the frequency of maximum 1/T1 in a window centered on the previous
/// slice's estimate (window_center_ghz for the first slice).
/// Throws std::invalid_argument if window_center_ghz lies outside the dataset band.
ExtractedTrajectory extract_trajectory(const spectra::T1Dataset& dataset, double window_center_ghz,
                                       const ExtractOptions& options = {});

/// Tracks several defects in lockstep. When two claim the same frequency, the one whose
/// previous position is nearer keeps it; the other holds its previous position and both
/// are flagged.
std::vector<ExtractedTrajectory> extract_trajectories(const spectra::T1Dataset& dataset,
                                                      std::span<const double> window_centers_ghz,
                                                      const ExtractOptions& options = {});

struct JumpEvent {
    double time_hr = 0.0;
    double amplitude_mhz = 0.0;  // signed ΔE(k) − ΔE(k−1)
};

/// κ · median |ΔE(k) − ΔE(k−1)|.
double jump_noise_floor(const Trajectory& trajectory, double kappa = 5.0);

/// A jump at step k when |ΔE(k) − ΔE(k−1)| ≥ max(min_jump, κ·median|successive differences|).
/// Throws std::invalid_argument for min_jump <= 0.
std::vector<JumpEvent> detect_jumps(const Trajectory& trajectory, double min_jump_mhz,
                                    double kappa = 5.0);

struct JumpStatisticsOptions {
    /// Minimum number of jumps before an energy estimate is attempted.
    std::size_t min_jumps_for_energy = 10;
    /// Jump magnitudes must lie within this fraction of their median for the trajectory
    /// to count as two-valued.
    double level_tolerance = 0.5;
};

struct JumpStatistics {
    std::size_t jump_count = 0;
    double mean_rate_per_hr = 0.0;            // count / total time ≈ (Γe→g + Γg→e)/2
    std::optional<double> rate_fast_per_hr;   // 1 / mean dwell in the short-lived level
    std::optional<double> rate_slow_per_hr;   // 1 / mean dwell in the long-lived level
    std::optional<double> energy_over_kbt;    // ln(Γe→g / Γg→e)
};

/// Rates from jump counts, and E_TF/k_BT from mean dwell times when the jumps describe a
/// two-valued telegraph with enough events. Only complete dwells (between two jumps) are used.
/// The short-lived level is taken as the excited TF state, so the estimate is >= 0.
JumpStatistics jump_statistics(std::span<const JumpEvent> events, double total_time_hr,
                               const JumpStatisticsOptions& options = {});

struct DiffusivityEstimate {
    double diffusivity = 0.0;      // D in MHz·hr^-1/2, σ(t) = 2D√t
    double ci = 0.0;               // standard error of the slope
    std::optional<double> intercept_mhz;
    std::vector<double> times_hr;
    std::vector<double> sigma_mhz; // cross-trajectory standard deviation per time
};

/// Least-squares fit of σ(t) against 2√t (through the origin unless fit_intercept).
/// Throws std::invalid_argument for fewer than two trajectories or mismatched grids.
DiffusivityEstimate estimate_diffusivity(std::span<const Trajectory> trajectories,
                                         bool fit_intercept = false);

enum class Regime { telegraphic, diffusive, mixed, quiet };

const char* to_string(Regime regime);

struct RegimeOptions {
    double min_jump_mhz = 4.0;
    double kappa = 5.0;
    /// Share of total variation carried by jumps for a telegraphic verdict.
    double telegraphic_fraction = 0.8;
    /// Range (max − min) below which a jump-free trajectory is considered quiet.
    double noise_floor_mhz = 1.0;
};

/// telegraphic: jumps carry ≥ telegraphic_fraction of Σ|ΔE(k) − ΔE(k−1)|.
/// diffusive: no jumps and a range above noise_floor_mhz.
/// quiet: no jumps and a range within noise_floor_mhz.
/// mixed: everything else.
Regime classify_regime(const Trajectory& trajectory, const RegimeOptions& options = {});

}  // namespace tlsdyn::analysis
