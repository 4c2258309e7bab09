#pragma once

#include "tcopula/copula/spec.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace tcopula::copula {

enum class CdfMethod { exact, monte_carlo };

struct CdfOptions {
    CdfMethod method = CdfMethod::exact;
    double rel_tol = 1e-10;
    /// Monte Carlo path only.
    Eigen::Index mc_samples = 1'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct CdfEstimate {
    double value = 0.0;
    /// Zero for the exact path.
    double mc_stderr = 0.0;
};

/// C(u) = int_0^1 Phi_Sigma(x_1 / w_1(s), ..., x_n / w_n(s)) ds,  x_k = t_{nu_k}^{-1}(u_k).
///
/// The exact path (n = 2 only) integrates over s with a tanh-sinh rule; the mixing
/// variable concentrates near the endpoints in tail evaluations, where that rule is
/// strongest. For n > 2 only the Monte Carlo estimator is offered; requesting
/// CdfMethod::exact there raises UnsupportedError.
CdfEstimate copula_cdf(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u,
                       const CdfOptions& options = {});

/// Bivariate standard t copula CDF by a one-dimensional conditional integral:
///   int_{-inf}^{a} f_nu(x) t_{nu+1}((b - rho x) / sqrt((1 - rho^2)(nu + x^2) / (nu + 1))) dx,
/// a = t_nu^{-1}(u_1), b = t_nu^{-1}(u_2). Independent of the mixing representation.
double standard_t_copula_cdf(double rho, Dof nu, const Eigen::Vector2d& u);

}  // namespace tcopula::copula
