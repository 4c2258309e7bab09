#pragma once

#include <cstddef>
#include <functional>

namespace tcopula::numerics {

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_evaluations = 100000;
};

/// Globally adaptive 21-point Gauss-Kronrod integration of f over [a, b].
///
/// Either limit may be infinite; half-lines are mapped onto [0, 1) with
/// x = a + t / (1 - t) and the whole line is split at zero. The integrand is
/// never evaluated at a finite endpoint, so integrable endpoint singularities
/// are fine. The interval with the largest error estimate is bisected until
/// the total estimate satisfies err <= max(abs_tol, rel_tol * |value|).
///
/// Throws QuadratureError (carrying the best estimate) when the evaluation
/// budget runs out first, and DomainError on non-positive tolerances.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

}  // namespace tcopula::numerics
