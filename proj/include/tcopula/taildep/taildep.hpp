#pragma once

#include "tcopula/copula/spec.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tcopula::taildep {

using numerics::Dof;

/// 2 t_{nu+1}(-sqrt((nu + 1)(1 - rho) / (1 + rho))).
double lambda_standard_t(double rho, Dof nu);

/// Scale constant of the Omega integrand:
/// B = (2^{nu2/2} Gamma((1 + nu2)/2) / (2^{nu1/2} Gamma((1 + nu1)/2)))^{1/nu2}; B = 1 when nu1 = nu2.
double b_coefficient(Dof nu1, Dof nu2);

/// Omega(rho, nu1, nu2) = int_0^inf g_{nu1+1}(t) Phi(-(B t^{nu1/(2 nu2)} - rho sqrt(t)) / sqrt(1 - rho^2)) dt,
/// g_k the chi-square(k) density.
double omega(double rho, Dof nu1, Dof nu2);

/// Lower (= upper) tail dependence coefficient: Omega(rho, nu1, nu2) + Omega(rho, nu2, nu1).
double lambda_multidof(double rho, Dof nu1, Dof nu2);

/// NW and SE quadrant coefficients, lambda_multidof(-rho, nu1, nu2).
double lambda_quadrant(double rho, Dof nu1, Dof nu2);

struct TailDepReport {
    double lambda_L = 0.0;
    double lambda_U = 0.0;
    double lambda_NW = 0.0;
    double lambda_SE = 0.0;
    std::string method = "closed-form";
    std::optional<double> mc_stderr;
};

/// Closed-form coefficients of a bivariate spec; all zero for a Gaussian spec.
TailDepReport tail_dependence(const copula::CopulaSpec& spec);

struct TdcLimit {
    std::vector<double> q;
    /// C(q, q) / q for each retained q.
    std::vector<double> ratio;
    /// Limit estimate from the last three ratios (Aitken delta-squared over the geometric
    /// q sequence); linear extrapolation in q when fewer than three are available or the
    /// differences do not shrink geometrically.
    double estimate = 0.0;
    std::string extrapolation;
};

/// Lower tail ratio C(q, q)/q along a decreasing q sequence in (0, 0.1].
/// Points whose CDF evaluation fails are dropped with a warning.
TdcLimit numerical_tdc_limit(const copula::CopulaSpec& spec,
                             const std::vector<double>& q_sequence = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8});

struct RatioEstimate {
    double value = 0.0;
    /// Delta-method standard error value * sqrt(1/a + 1/b) on the counts.
    double mc_stderr = 0.0;
    long long numerator_count = 0;
    long long denominator_count = 0;
    /// Denominator count is zero; value is +inf.
    bool infinite = false;
};

struct AsymmetryReport {
    double q = 0.99;
    /// Pr(U2 > U1 > q) / Pr(U1 > U2 > q).
    RatioEstimate xi;
    /// Lower-tail counterpart at level 1 - q: Pr(U2 < U1 < 1-q) / Pr(U1 < U2 < 1-q).
    RatioEstimate eta;
    /// Regions 1..8 of the partition by u1 = 0.5, u2 = 0.5, u1 = u2 and u1 + u2 = 1,
    /// numbered clockwise from the top-left.
    std::array<double, 8> region_probs{};
    std::array<double, 8> region_stderr{};
    std::array<long long, 8> region_counts{};
    RatioEstimate pr1_over_pr2;
    RatioEstimate pr3_over_pr4;
    long long mc_n = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo asymmetry diagnostics from mc_n copula draws. Counts are exact integers per
/// chunk, so results do not depend on the thread count.
AsymmetryReport asymmetry(const copula::CopulaSpec& spec, double q, long long mc_n, std::uint64_t seed,
                          unsigned threads = 1);

}  // namespace tcopula::taildep
