#pragma once

#include "tcopula/copula/density.hpp"
#include "tcopula/copula/spec.hpp"
#include "tcopula/numerics/optimize.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tcopula::calibrate {

enum class Family { gaussian, standard_t, grouped_t, multidof_t };
enum class FitMethod { joint, tau_then_dof };
/// Scale on which the optimizer moves the dofs: nu = exp(eta), or nu = eta directly.
enum class DofScale { log, identity };

inline constexpr double kDofLower = 0.2;
inline constexpr double kDofUpper = 200.0;

struct FitOptions {
    Family family = Family::multidof_t;
    FitMethod method = FitMethod::joint;
    /// Group index per coordinate, required for Family::grouped_t.
    std::vector<int> groups;
    /// Extra starting point tried before the default starts.
    std::optional<copula::CopulaSpec> init;
    /// One start per value; every free dof starts there. Correlations start at the tau estimate.
    std::vector<double> start_dofs{2.0, 5.0, 15.0};
    DofScale dof_scale = DofScale::log;
    numerics::NelderMeadOptions optimizer{};
    copula::LikelihoodOptions likelihood{};
    bool standard_errors = true;
};

struct FitResult {
    explicit FitResult(copula::CopulaSpec fitted) : spec(std::move(fitted)) {}

    copula::CopulaSpec spec;
    double loglik = 0.0;
    /// Standard deviations aligned with param_order; absent when the information matrix
    /// was not positive definite or was not requested.
    std::optional<Eigen::VectorXd> std_errors;
    /// Off-diagonal Cholesky entries row-major ("A[1,0]", ...), then the free dofs ("nu[0]", ...).
    std::vector<std::string> param_order;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    FitMethod method = FitMethod::joint;
    Family family = Family::multidof_t;
};

FitResult fit_mle(const copula::UniformSample& sample, const FitOptions& options = {});

struct ObservedInformation {
    /// Negative Hessian of the average log density in natural parameters.
    Eigen::MatrixXd information;
    /// sqrt([I^-1]_ii / K); absent when the information is not positive definite.
    std::optional<Eigen::VectorXd> std_errors;
    /// Gradient of the average log density at the evaluation point.
    Eigen::VectorXd gradient;
    std::vector<std::string> param_order;
};

/// Observed information by central differences with steps max(1e-4, 1e-4 |theta_i|).
/// Free dofs are inferred from `family` (grouped_t takes its groups from the spec).
/// `fixed_correlation` restricts the gradient check to the dof block, for tau-then-dof fits.
ObservedInformation observed_information(const copula::CopulaSpec& spec, const copula::UniformSample& sample,
                                         Family family, bool fixed_correlation = false, unsigned threads = 1);

/// Natural parameter vector in param_order layout and its labels.
Eigen::VectorXd natural_parameters(const copula::CopulaSpec& spec, Family family);
std::vector<std::string> parameter_names(int dim, Family family, const std::vector<int>& groups);

struct LrtResult {
    double statistic = 0.0;
    int df = 1;
    double p_value = 1.0;
};

/// Loglik shortfall of the full model tolerated before a nesting violation is reported.
inline constexpr double kNestingTolerance = 1e-3;

/// statistic = 2 (full - restricted), p from the chi-square(df) survival function.
/// A marginally negative statistic is floored at 0 with a warning; beyond tolerance NestingError.
LrtResult likelihood_ratio_test(double restricted_loglik, double full_loglik, int df);
LrtResult likelihood_ratio_test(const FitResult& restricted, const FitResult& full, int df);

const char* to_string(Family family);
const char* to_string(FitMethod method);
Family parse_family(const std::string& text);
FitMethod parse_method(const std::string& text);

}  // namespace tcopula::calibrate
