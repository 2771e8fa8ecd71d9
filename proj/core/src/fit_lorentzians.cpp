#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "tlsdyn/fitting.hpp"
#include "tlsdyn/levmar.hpp"
#include "tlsdyn/physmodel.hpp"

namespace tlsdyn::analysis {

namespace {

constexpr double kMhzPerGhz = 1000.0;

struct Points {
    std::vector<double> f;
    std::vector<double> y;
    std::vector<double> sigma;           // empty when unweighted
    std::vector<double> measured_sigma;  // as supplied, before reweighting
};

bool masked(double f, const FitOptions& options) {
    return std::any_of(options.mask_ghz.begin(), options.mask_ghz.end(), [&](double m) {
        return std::abs(f - m) * kMhzPerGhz <= options.mask_halfwidth_mhz;
    });
}

Points usable_points(const spectra::RelaxationSpectrum& spectrum, const FitOptions& options) {
    const auto sigma = spectrum.rate_stderr();
    Points p;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double f = spectrum.freqs_ghz[i];
        const double y = spectrum.rates_per_us[i];
        if (!std::isfinite(y) || masked(f, options)) continue;
        if (sigma) {
            const double s = (*sigma)[i];
            if (!(s > 0.0) || !std::isfinite(s)) continue;
            p.sigma.push_back(s);
            p.measured_sigma.push_back(s);
        }
        p.f.push_back(f);
        p.y.push_back(y);
    }
    return p;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

std::vector<spectra::LorentzianPeak> detect_in(const Points& p, const FitOptions& options) {
    std::vector<spectra::LorentzianPeak> peaks;
    const std::size_t n = p.f.size();
    if (n < 3) return peaks;
    const double bg = median(p.y);
    const double threshold = options.detection_factor * bg;
    double step_mhz = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i) {
        step_mhz = std::min(step_mhz, std::abs(p.f[i] - p.f[i - 1]) * kMhzPerGhz);
    }

    std::size_t i = 0;
    while (i < n) {
        if (!(p.y[i] > threshold)) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end + 1 < n && p.y[end + 1] > threshold) ++end;
        const auto top = static_cast<std::size_t>(
            std::max_element(p.y.begin() + static_cast<std::ptrdiff_t>(i),
                             p.y.begin() + static_cast<std::ptrdiff_t>(end) + 1) -
            p.y.begin());
        const double excess = p.y[top] - bg;
        const double half = bg + 0.5 * excess;

        // Interpolated half-maximum crossings; fall back to the data edge.
        double left = p.f.front();
        for (std::size_t j = top; j > 0; --j) {
            if (p.y[j - 1] < half) {
                const double t = (half - p.y[j - 1]) / (p.y[j] - p.y[j - 1]);
                left = p.f[j - 1] + t * (p.f[j] - p.f[j - 1]);
                break;
            }
        }
        double right = p.f.back();
        for (std::size_t j = top; j + 1 < n; ++j) {
            if (p.y[j + 1] < half) {
                const double t = (p.y[j] - half) / (p.y[j] - p.y[j + 1]);
                right = p.f[j] + t * (p.f[j + 1] - p.f[j]);
                break;
            }
        }
        const double fwhm = std::max((right - left) * kMhzPerGhz, step_mhz);

        spectra::LorentzianPeak peak;
        peak.center_ghz = p.f[top];
        peak.decoherence_mhz = phys::kPi * fwhm;
        peak.coupling_mhz = std::sqrt(std::max(excess, 0.0) * peak.decoherence_mhz / (8.0 * phys::kPi * phys::kPi));
        if (peak.coupling_mhz > 0.0) peaks.push_back(peak);
        i = end + 1;
    }
    return peaks;
}

// Parameters: [log Γ_1Q, (Δf_k in MHz, log g_k, log Γ_k) for each peak].
struct SpectrumProblem {
    const Points& p;
    std::vector<double> centers_ghz;

    // Model rate at point i; writes w·∂model/∂x into row i of `jac` when given.
    double evaluate(const Eigen::VectorXd& x, std::size_t i, Eigen::MatrixXd* jac = nullptr, double w = 1.0) const {
        const auto row = static_cast<Eigen::Index>(i);
        const double bg = std::exp(x[0]);
        double model = bg;
        if (jac) (*jac)(row, 0) = bg * w;
        for (std::size_t j = 0; j < centers_ghz.size(); ++j) {
            const auto c = static_cast<Eigen::Index>(1 + 3 * j);
            const double g = std::exp(x[c + 1]);
            const double gamma = std::exp(x[c + 2]);
            const double a = gamma / (2.0 * phys::kPi);
            const double delta = (centers_ghz[j] - p.f[i]) * kMhzPerGhz + x[c];
            const double den = a * a + delta * delta;
            const double lor = 2.0 * g * g * gamma / den;
            model += lor;
            if (jac) {
                (*jac)(row, c) = -4.0 * g * g * gamma * delta / (den * den) * w;
                (*jac)(row, c + 1) = 2.0 * lor * w;
                (*jac)(row, c + 2) = lor * (1.0 - 2.0 * a * a / den) * w;
            }
        }
        return model;
    }

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const {
        for (std::size_t i = 0; i < p.f.size(); ++i) {
            const double w = p.sigma.empty() ? 1.0 : 1.0 / p.sigma[i];
            r[static_cast<Eigen::Index>(i)] = (evaluate(x, i, &jac, w) - p.y[i]) * w;
        }
    }
};

}  // namespace

spectra::SpectrumModel FitResult::model(double qubit_dephasing_mhz) const {
    spectra::SpectrumModel m;
    m.background_rate_per_us = background_rate_per_us;
    m.qubit_dephasing_mhz = qubit_dephasing_mhz;
    for (const auto& est : peaks) m.peaks.push_back(est.peak);
    return m;
}

std::vector<spectra::LorentzianPeak> detect_peaks(const spectra::RelaxationSpectrum& spectrum,
                                                  const FitOptions& options) {
    spectrum.validate();
    return detect_in(usable_points(spectrum, options), options);
}

FitResult fit_lorentzians(const spectra::RelaxationSpectrum& spectrum,
                          std::span<const spectra::LorentzianPeak> hints, const FitOptions& options) {
    spectrum.validate();
    Points p = usable_points(spectrum, options);
    std::vector<spectra::LorentzianPeak> start(hints.begin(), hints.end());
    if (start.empty()) start = detect_in(p, options);

    const std::size_t k = start.size();
    const std::size_t n_params = 3 * k + 1;
    if (p.f.size() < n_params) {
        throw std::invalid_argument("fit_lorentzians: " + std::to_string(p.f.size()) +
                                    " usable points for " + std::to_string(n_params) + " parameters");
    }

    double bg0 = median(p.y);
    if (!(bg0 > 0.0)) {
        bg0 = 1e-6;
        for (double y : p.y) {
            if (y > 0.0) bg0 = y;
        }
    }
    Eigen::VectorXd x0(static_cast<Eigen::Index>(n_params));
    x0[0] = std::log(bg0);
    SpectrumProblem problem{p, {}};
    for (std::size_t j = 0; j < k; ++j) {
        start[j].validate();
        const auto c = static_cast<Eigen::Index>(1 + 3 * j);
        problem.centers_ghz.push_back(start[j].center_ghz);
        x0[c] = 0.0;
        x0[c + 1] = std::log(start[j].coupling_mhz);
        x0[c + 2] = std::log(start[j].decoherence_mhz);
    }

    optim::LevMarOptions lm;
    lm.max_iterations = options.max_iterations;
    auto sol = optim::levenberg_marquardt(std::cref(problem), x0, static_cast<Eigen::Index>(p.f.size()), lm);
    // Weights from the noisy rates favour points that came out low. Refit with σ taken from
    // a smooth variance function of the fitted model, log σ ≈ quadratic in log model.
    for (int pass = 0; pass < 2 && !p.sigma.empty() && sol.converged; ++pass) {
        const auto m = static_cast<Eigen::Index>(p.f.size());
        Eigen::VectorXd log_model(m), log_sigma(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            log_model[i] = std::log(std::max(problem.evaluate(sol.x, ui), 1e-300));
            log_sigma[i] = std::log(p.measured_sigma[ui]);
        }
        const double spread = log_model.maxCoeff() - log_model.minCoeff();
        const Eigen::Index order = spread > 1e-6 ? 3 : 1;
        Eigen::MatrixXd design(m, order);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double u = order > 1 ? (log_model[i] - log_model.minCoeff()) / spread : 0.0;
            for (Eigen::Index c = 0; c < order; ++c) design(i, c) = std::pow(u, static_cast<double>(c));
        }
        const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(log_sigma);
        const Eigen::VectorXd smooth = design * coef;
        for (Eigen::Index i = 0; i < m; ++i) p.sigma[static_cast<std::size_t>(i)] = std::exp(smooth[i]);
        const int previous_iterations = sol.iterations;
        sol = optim::levenberg_marquardt(std::cref(problem), sol.x, m, lm);
        sol.iterations += previous_iterations;
    }

    FitResult result;
    result.degrees_of_freedom = static_cast<int>(p.f.size() - n_params);
    result.residual_norm = std::sqrt(sol.sum_squares);
    result.iterations = sol.iterations;
    result.converged = sol.converged;
    result.message = sol.converged ? "converged" : "iteration limit reached";

    double scale = 1.0;
    if (p.sigma.empty() || !options.absolute_sigma) {
        scale = result.degrees_of_freedom > 0 ? sol.sum_squares / result.degrees_of_freedom : 0.0;
    }
    const Eigen::MatrixXd cov = sol.jtj_inverse * scale;
    auto sd = [&](Eigen::Index i) { return std::sqrt(std::max(0.0, cov(i, i))); };

    result.background_rate_per_us = std::exp(sol.x[0]);
    result.background_ci = result.background_rate_per_us * sd(0);
    for (std::size_t j = 0; j < k; ++j) {
        const auto c = static_cast<Eigen::Index>(1 + 3 * j);
        PeakEstimate est;
        est.peak = start[j];
        est.peak.center_ghz = problem.centers_ghz[j] + sol.x[c] / kMhzPerGhz;
        est.peak.coupling_mhz = std::exp(sol.x[c + 1]);
        est.peak.decoherence_mhz = std::exp(sol.x[c + 2]);
        est.peak.energy_relaxation_mhz.reset();
        est.center_ci_ghz = sd(c) / kMhzPerGhz;
        est.coupling_ci_mhz = est.peak.coupling_mhz * sd(c + 1);
        est.decoherence_ci_mhz = est.peak.decoherence_mhz * sd(c + 2);
        const double two_pi_g = 2.0 * phys::kPi * est.peak.coupling_mhz;
        est.regime_plausible = two_pi_g > result.background_rate_per_us &&
                               2.0 * (est.peak.decoherence_mhz - options.qubit_dephasing_mhz) > two_pi_g;
        result.peaks.push_back(est);
    }
    std::sort(result.peaks.begin(), result.peaks.end(), [](const PeakEstimate& a, const PeakEstimate& b) {
        return a.peak.center_ghz < b.peak.center_ghz;
    });
    return result;
}

}  // namespace tlsdyn::analysis
