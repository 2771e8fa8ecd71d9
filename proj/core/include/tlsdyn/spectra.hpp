// Forward model for qubit energy-relaxation spectra and T1 datasets
//
// Relaxation rate of a qubit tuned to frequency f:
//
//   1/T1(f) = Σ_i 2 (g_i/h)² Γ_i / ((Γ_i/2π)² + (f_i − f)²) + Γ_1Q
//
// with g_i/h in MHz, Γ_i an angular rate in MHz, detuning in MHz, and the result in μs⁻¹.
// The half-width at half-maximum of each resonance in ordinary frequency is Γ_i/2π.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tlsdyn/trajectory.hpp"

namespace tlsdyn::spectra {

struct LorentzianPeak {
    double center_ghz = 0.0;        // f_i
    double coupling_mhz = 0.0;      // g_i/h
    double decoherence_mhz = 0.0;   // Γ_i, angular-rate convention
    std::optional<double> energy_relaxation_mhz;  // Γ_1,i when known
    bool mobile = false;            // follows a spectral-diffusion trajectory in synth_dataset

    double excess_rate(double f_ghz) const;
    /// Excess rate at f = f_i: 8π² g² / Γ.
    double peak_excess_rate() const;
    /// Full width at half maximum in MHz: Γ/π.
    double fwhm_mhz() const;
    void validate() const;
};

/// Coupling-regime check Γ_1,i > 2π g_i/h > Γ_1Q. Empty when Γ_1,i is unknown.
std::optional<bool> regime_valid(const LorentzianPeak& peak, double background_rate_per_us);

struct SpectrumModel {
    std::vector<LorentzianPeak> peaks;
    double background_rate_per_us = 1.0 / 50.0;  // Γ_1Q
    double qubit_dephasing_mhz = 0.70;           // Γ_Q, the qubit's share of every Γ_i

    double rate(double f_ghz) const;
    std::size_t mobile_count() const;
    void validate() const;
};

struct RelaxationSpectrum {
    std::vector<double> freqs_ghz;
    std::vector<double> rates_per_us;
    std::optional<std::vector<double>> t1_stderr_us;

    std::size_t size() const { return freqs_ghz.size(); }
    /// Per-point rate standard errors propagated from T1 errors, σ_rate = σ_T1 / T1².
    std::optional<std::vector<double>> rate_stderr() const;
    void validate() const;
};

RelaxationSpectrum synth_spectrum(const SpectrumModel& model, std::span<const double> grid_ghz);

/// Half-wave mode spacing of a coaxial line, c / (2 L √εr), in GHz.
double control_line_spacing_ghz(double cable_length_m, double eps_r);

/// All integer multiples of the control-line spacing inside [band_lo, band_hi] GHz.
std::vector<double> spurious_resonances(double cable_length_m, double eps_r,
                                        double band_lo_ghz, double band_hi_ghz);

/// n points geometrically spaced from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

/// start, start+step, ... up to stop inclusive (within 1e-9 of a step).
std::vector<double> linear_grid(double start, double stop, double step);

struct DecayProtocol {
    std::vector<double> delays_us = log_spaced(0.01, 100.0, 40);
    int shots = 2000;
    double init_fidelity = 0.99;
    double readout_fidelity = 0.95;

    void validate() const;
};

struct DecayCurve {
    std::vector<double> delays_us;
    std::vector<double> excited_population;
    int shots_per_delay = 0;

    std::size_t size() const { return delays_us.size(); }
    void validate() const;
};

/// Measured excited-state probability before sampling: F_init e^{−t/T1} through a
/// symmetric readout channel, p_meas = F_ro p + (1 − F_ro)(1 − p).
double measured_population(double delay_us, double t1_us, const DecayProtocol& protocol);

/// Binomially samples `shots` readouts per delay. Deterministic for a given seed.
DecayCurve synth_decay(double t1_us, const DecayProtocol& protocol, std::uint64_t seed);

/// T1 values on a (time, frequency) grid, stored row-major by time.
struct T1Dataset {
    std::vector<double> time_hr;
    std::vector<double> freq_ghz;
    std::vector<double> t1_us;
    std::optional<std::vector<double>> t1_stderr_us;  // filled by shot-level synthesis only
    nlohmann::json provenance = nlohmann::json::object();

    std::size_t n_times() const { return time_hr.size(); }
    std::size_t n_freqs() const { return freq_ghz.size(); }
    double at(std::size_t ti, std::size_t fi) const { return t1_us[ti * n_freqs() + fi]; }
    double& at(std::size_t ti, std::size_t fi) { return t1_us[ti * n_freqs() + fi]; }
    /// The relaxation spectrum measured at time index ti.
    RelaxationSpectrum slice(std::size_t ti) const;
    void validate() const;
};

struct DatasetNoise {
    /// σ of the multiplicative log-normal factor applied to each T1 (0 disables).
    double t1_lognormal_sigma = 0.0;
    /// Half-range of a uniform per-trace qubit-frequency calibration offset in MHz (0 disables).
    double freq_jitter_mhz = 0.0;
    /// Simulate and refit every decay curve instead of using the analytic 1/rate.
    bool shot_level = false;
    DecayProtocol protocol;
};

/// Composes the spectrum model with spectral-diffusion trajectories. Mobile peaks (in the
/// order they appear in base_model.peaks) are offset by trajectories[k].value_at(t) at each
/// time stamp. Each time stamp draws from its own RNG substream of `seed`.
/// Throws std::invalid_argument when the trajectory count differs from the mobile peak count.
T1Dataset synth_dataset(const SpectrumModel& base_model, std::span<const Trajectory> trajectories,
                        std::span<const double> grid_ghz, std::span<const double> time_stamps_hr,
                        const DatasetNoise& noise, std::uint64_t seed, unsigned threads = 1);

nlohmann::json to_json(const LorentzianPeak& peak);
nlohmann::json to_json(const SpectrumModel& model);

}  // namespace tlsdyn::spectra
