#pragma once

#include "tcopula/copula/spec.hpp"

#include <Eigen/Core>

namespace tcopula::calibrate {

/// Sample Kendall's tau-b of paired observations, O(K log K).
/// Ties are handled by the tie-adjusted denominator sqrt((n0 - n1)(n0 - n2)).
/// Throws EstimationError when either column is constant (tau undefined) or K < 2.
double kendall_tau(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Pairwise tau matrix of the columns of `data` (unit diagonal).
Eigen::MatrixXd kendall_tau_matrix(const Eigen::Ref<const Eigen::MatrixXd>& data);

/// sin(pi tau / 2): the elliptical-family link between tau and the correlation parameter.
double corr_from_tau(double tau);

/// Smallest eigenvalue enforced by repair_correlation.
inline constexpr double kEigenvalueFloor = 1e-6;

/// Nearest-in-spirit valid correlation matrix: eigenvalues below the floor are raised to it,
/// the result is rescaled to unit diagonal, and the floor is doubled until the rescaled
/// matrix has smallest eigenvalue >= kEigenvalueFloor. Positive definite input with smallest
/// eigenvalue >= the floor is returned unchanged.
Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& matrix);

/// Correlation matrix sin(pi tau_ij / 2) from pairwise Kendall's tau, repaired if needed.
Eigen::MatrixXd tau_correlation(const copula::UniformSample& sample);

}  // namespace tcopula::calibrate
