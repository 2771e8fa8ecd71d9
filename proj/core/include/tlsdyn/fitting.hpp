// T1 decay fits and multi-Lorentzian relaxation-spectrum fits

#pragma once

#include <span>
#include <string>
#include <vector>

#include "tlsdyn/spectra.hpp"

namespace tlsdyn::analysis {

/// Result of fitting A·exp(−t/T1) + B to a decay curve. Confidence values are 68%
/// half-widths (one standard error) from the local curvature of the objective.
struct DecayFit {
    double t1_us = 0.0;
    double t1_ci_us = 0.0;
    double amplitude = 0.0;
    double amplitude_ci = 0.0;
    double offset = 0.0;
    double offset_ci = 0.0;
    double chi_squared = 0.0;
    bool ok = false;
    std::string message;
};

/// Two-pass fit: unweighted, then weighted by the binomial variance of the first-pass
/// model. Degenerate (non-decaying) data yields ok == false rather than an exception.
/// Throws std::invalid_argument for fewer than 4 delays.
DecayFit fit_decay(const spectra::DecayCurve& curve);

struct PeakEstimate {
    spectra::LorentzianPeak peak;
    double center_ci_ghz = 0.0;
    double coupling_ci_mhz = 0.0;
    double decoherence_ci_mhz = 0.0;
    /// Necessary conditions for the coupling regime Γ_1,i > 2πg/h > Γ_1Q, using
    /// Γ_1,i ≤ 2(Γ_i − Γ_Q). False means the Lorentzian model is not trustworthy here.
    bool regime_plausible = true;
};

struct FitResult {
    std::vector<PeakEstimate> peaks;  // sorted by center frequency
    double background_rate_per_us = 0.0;
    double background_ci = 0.0;
    double residual_norm = 0.0;       // ‖r‖₂ (weighted when σ are available)
    int degrees_of_freedom = 0;
    int iterations = 0;
    bool converged = false;
    std::string message;

    spectra::SpectrumModel model(double qubit_dephasing_mhz = 0.70) const;
};

struct FitOptions {
    /// Local maxima must exceed the background estimate by this factor to seed a peak.
    double detection_factor = 3.0;
    /// Spurious resonances to exclude; points within mask_halfwidth_mhz are dropped.
    std::vector<double> mask_ghz;
    double mask_halfwidth_mhz = 5.0;
    int max_iterations = 400;
    /// Treat per-point σ as exact (true) or rescale the covariance by χ²/dof (false).
    /// Ignored when the spectrum carries no uncertainties.
    bool absolute_sigma = true;
    double qubit_dephasing_mhz = 0.70;
};

/// Initial peak guesses: contiguous runs above detection_factor × median rate, one peak
/// per run at its maximum, width from the half-maximum crossing.
std::vector<spectra::LorentzianPeak> detect_peaks(const spectra::RelaxationSpectrum& spectrum,
                                                  const FitOptions& options = {});

/// Nonlinear least squares of the sum-of-Lorentzians model on 1/T1, in log space for
/// g, Γ and Γ_1Q. Uses `hints` as initial peaks when non-empty, detect_peaks otherwise.
/// With per-point errors the final weights come from a smooth fit of log σ against the
/// log of the fitted model, so that noise in the supplied σ does not bias the estimates.
/// Throws std::invalid_argument when there are fewer than 3·peaks + 1 usable points.
FitResult fit_lorentzians(const spectra::RelaxationSpectrum& spectrum,
                          std::span<const spectra::LorentzianPeak> hints = {},
                          const FitOptions& options = {});

}  // namespace tlsdyn::analysis
