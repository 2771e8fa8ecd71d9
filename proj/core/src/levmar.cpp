#include "tlsdyn/levmar.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace tlsdyn::optim {

namespace {

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const Eigen::VectorXd& w = eig.eigenvalues();
    const double cutoff = std::max(1e-300, w.cwiseAbs().maxCoeff() * 1e-14);
    Eigen::VectorXd inv_w(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        inv_w[i] = std::abs(w[i]) > cutoff ? 1.0 / w[i] : 0.0;
    }
    return eig.eigenvectors() * inv_w.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

LevMarResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0, Eigen::Index n_residuals,
                                 const LevMarOptions& options) {
    const Eigen::Index n = x0.size();
    LevMarResult result;
    result.x = std::move(x0);

    Eigen::VectorXd r(n_residuals);
    Eigen::MatrixXd jac(n_residuals, n);
    fn(result.x, r, jac);
    double cost = r.squaredNorm();

    Eigen::VectorXd r_trial(n_residuals);
    Eigen::MatrixXd jac_trial(n_residuals, n);
    double lambda = options.initial_lambda;

    if (!std::isfinite(cost)) {
        result.sum_squares = cost;
        return result;
    }

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, cost)) {
            result.converged = true;
            break;
        }

        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd damped = jtj;
            for (Eigen::Index i = 0; i < n; ++i) {
                damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
            }
            const Eigen::VectorXd delta = damped.ldlt().solve(-grad);
            const Eigen::VectorXd x_trial = result.x + delta;
            fn(x_trial, r_trial, jac_trial);
            const double cost_trial = r_trial.squaredNorm();
            if (std::isfinite(cost_trial) && cost_trial <= cost) {
                const double reduction = (cost - cost_trial) / std::max(cost, std::numeric_limits<double>::min());
                const double step = delta.norm() / (result.x.norm() + options.step_tolerance);
                result.x = x_trial;
                r.swap(r_trial);
                jac.swap(jac_trial);
                cost = cost_trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (step < options.step_tolerance || reduction < options.cost_tolerance) {
                    result.converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No downhill step at any damping: we are at a (numerical) minimum.
            result.converged = true;
            break;
        }
        if (result.converged) break;
    }

    result.sum_squares = cost;
    result.jtj_inverse = pseudo_inverse(jac.transpose() * jac);
    return result;
}

}  // namespace tlsdyn::optim
