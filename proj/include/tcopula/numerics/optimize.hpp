#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>

namespace tcopula::numerics {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
    /// Stop once every vertex lies within x_tol (max-norm) of the best vertex.
    double x_tol = 1e-6;
    std::size_t max_evaluations = 2000;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimisation. Non-finite objective values are treated as +inf.
/// `steps` gives the initial simplex edge along each coordinate.
NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& steps, const NelderMeadOptions& options = {});

Eigen::VectorXd central_difference_gradient(const Objective& f, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& steps);

/// Symmetric Hessian from central differences; off-diagonals use the four-point stencil.
Eigen::MatrixXd central_difference_hessian(const Objective& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& steps);

}  // namespace tcopula::numerics
