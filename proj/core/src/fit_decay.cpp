#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "tlsdyn/fitting.hpp"
#include "tlsdyn/levmar.hpp"

namespace tlsdyn::analysis {

namespace {

// Parameters: [A, log T1, B].
struct DecayProblem {
    const std::vector<double>& t;
    const std::vector<double>& y;
    std::vector<double> inv_sigma;

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const {
        const double a = x[0];
        const double t1 = std::exp(x[1]);
        const double b = x[2];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const double e = std::exp(-t[i] / t1);
            const double w = inv_sigma[i];
            r[row] = (a * e + b - y[i]) * w;
            jac(row, 0) = e * w;
            jac(row, 1) = a * e * t[i] / t1 * w;
            jac(row, 2) = w;
        }
    }
};

// Variable projection over a T1 grid: for fixed T1 the model is linear in (A, B).
Eigen::Vector3d initial_guess(const std::vector<double>& t, const std::vector<double>& y) {
    const double lo = std::max(t.front(), 1e-6 * t.back()) / 3.0;
    const double hi = t.back() * 30.0;
    double best_rss = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best(0.0, std::log(std::sqrt(lo * hi)), y.back());
    const int n_grid = 60;
    const auto m = static_cast<Eigen::Index>(t.size());
    for (int g = 0; g < n_grid; ++g) {
        const double t1 = lo * std::pow(hi / lo, static_cast<double>(g) / (n_grid - 1));
        Eigen::MatrixXd design(m, 2);
        Eigen::VectorXd rhs(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            design(i, 0) = std::exp(-t[static_cast<std::size_t>(i)] / t1);
            design(i, 1) = 1.0;
            rhs[i] = y[static_cast<std::size_t>(i)];
        }
        const Eigen::Vector2d ab = design.colPivHouseholderQr().solve(rhs);
        const double rss = (design * ab - rhs).squaredNorm();
        if (rss < best_rss) {
            best_rss = rss;
            best = Eigen::Vector3d(ab[0], std::log(t1), ab[1]);
        }
    }
    return best;
}

}  // namespace

DecayFit fit_decay(const spectra::DecayCurve& curve) {
    if (curve.size() < 4) throw std::invalid_argument("fit_decay: need at least 4 delays");
    curve.validate();

    const auto& t = curve.delays_us;
    const auto& y = curve.excited_population;
    const auto m = static_cast<Eigen::Index>(t.size());

    DecayProblem problem{t, y, std::vector<double>(t.size(), 1.0)};
    optim::LevMarOptions opts;
    opts.max_iterations = 200;

    auto first = optim::levenberg_marquardt(std::cref(problem), initial_guess(t, y), m, opts);
    auto result = first;
    double variance_scale = 1.0;

    if (curve.shots_per_delay > 0) {
        // Reweight by the binomial variance of the first-pass prediction.
        const double n = curve.shots_per_delay;
        const double floor = 0.5 / n;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double p = first.x[0] * std::exp(-t[i] / std::exp(first.x[1])) + first.x[2];
            p = std::clamp(p, floor, 1.0 - floor);
            problem.inv_sigma[i] = 1.0 / std::sqrt(p * (1.0 - p) / n);
        }
        result = optim::levenberg_marquardt(std::cref(problem), first.x, m, opts);
    } else {
        const int dof = static_cast<int>(m) - 3;
        variance_scale = dof > 0 ? result.sum_squares / dof : 0.0;
    }

    DecayFit fit;
    fit.amplitude = result.x[0];
    fit.t1_us = std::exp(result.x[1]);
    fit.offset = result.x[2];
    fit.chi_squared = result.sum_squares;
    const Eigen::MatrixXd cov = result.jtj_inverse * variance_scale;
    fit.amplitude_ci = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.t1_ci_us = fit.t1_us * std::sqrt(std::max(0.0, cov(1, 1)));
    fit.offset_ci = std::sqrt(std::max(0.0, cov(2, 2)));

    const double max_delay = t.back();
    const double min_delay = std::max(t.front(), 1e-12);
    if (!std::isfinite(fit.t1_us) || !std::isfinite(fit.amplitude)) {
        fit.message = "non-finite fit";
    } else if (!(fit.amplitude > 1e-6) || fit.amplitude < 2.0 * fit.amplitude_ci) {
        fit.message = "no significant decay";
    } else if (fit.t1_us > 10.0 * max_delay) {
        fit.message = "T1 unbounded by the delay range";
    } else if (fit.t1_us < 0.1 * min_delay) {
        fit.message = "T1 shorter than the first delay";
    } else if (!result.converged) {
        fit.message = "did not converge";
    } else {
        fit.ok = true;
    }
    return fit;
}

}  // namespace tlsdyn::analysis
