// Small dense Levenberg–Marquardt solver for nonlinear least squares

#pragma once

#include <functional>

#include <Eigen/Core>

namespace tlsdyn::optim {

struct LevMarOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;   // relative parameter change
    double cost_tolerance = 1e-14;   // relative reduction in sum of squares
    double initial_lambda = 1e-3;
};

struct LevMarResult {
    Eigen::VectorXd x;
    /// (JᵀJ)⁻¹ at the solution; multiply by the residual variance for an unweighted fit.
    Eigen::MatrixXd jtj_inverse;
    double sum_squares = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Fills residuals r(x) (size m) and the Jacobian ∂r/∂x (m × n).
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residuals,
                                      Eigen::MatrixXd& jacobian)>;

/// Minimizes ½‖r(x)‖² with Marquardt's diagonal damping. Never throws on
/// non-convergence; inspect `converged`.
LevMarResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0, Eigen::Index n_residuals,
                                 const LevMarOptions& options = {});

}  // namespace tlsdyn::optim
