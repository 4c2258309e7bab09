#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace tcopula::garch {

/// GARCH(1,1): x_t = mu + sigma_t eps_t,  sigma_t^2 = omega + alpha (x_{t-1} - mu)^2 + beta sigma_{t-1}^2.
/// The recursion starts from sigma0^2 (the sample variance of the fitted series):
/// sigma_1^2 = omega + (alpha + beta) sigma0^2.
struct GarchFit {
    double mu = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    /// Gaussian quasi log-likelihood at the estimate.
    double loglik = 0.0;
    double sigma0 = 0.0;
    /// Asymptotic standard errors of (mu, omega, alpha, beta) from the observed information;
    /// absent when it is not positive definite (for instance alpha = beta = 0).
    std::optional<Eigen::Vector4d> std_errors;
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Minimum series length accepted by fit_garch11.
inline constexpr Eigen::Index kMinSeriesLength = 30;

/// Throws DomainError for non-finite entries or fewer than kMinSeriesLength values.
void validate_series(const Eigen::Ref<const Eigen::VectorXd>& series);

/// Gaussian quasi log-likelihood of the recursion for the given parameters and start variance.
double garch11_loglik(const Eigen::Ref<const Eigen::VectorXd>& series, double mu, double omega, double alpha,
                      double beta, double sigma0_sq);

struct GarchOptions {
    /// GARCH dynamics are kept only if they raise the log-likelihood by at least this much over
    /// the constant-volatility submodel (alpha = beta = 0); otherwise the submodel is returned.
    /// With alpha at 0, beta is not identified. 3.0 is half the 95% chi-square(2) quantile;
    /// 0 keeps any improvement.
    double min_loglik_gain = 3.0;
};

/// Quasi-ML fit. The series is standardised internally; the optimizer moves
/// (mu, ln omega, a, b) with alpha = e^a / (1 + e^a + e^b), beta = e^b / (1 + e^a + e^b).
/// The result never has a lower likelihood than the constant-volatility submodel.
/// Throws EstimationError for a constant series.
GarchFit fit_garch11(const Eigen::Ref<const Eigen::VectorXd>& series, const GarchOptions& options = {});

/// eps_t = (x_t - mu) / sigma_t. Throws NumericalDegeneracyError naming t if sigma_t^2 underflows.
Eigen::VectorXd filter_residuals(const Eigen::Ref<const Eigen::VectorXd>& series, const GarchFit& fit);

/// rank_t / (T + 1), ties sharing their average rank.
Eigen::VectorXd empirical_pit(const Eigen::Ref<const Eigen::VectorXd>& residuals);

/// Per-column fit, residuals and PIT of a T x d matrix of returns.
struct FilteredPanel {
    std::vector<GarchFit> fits;
    Eigen::MatrixXd residuals;
    Eigen::MatrixXd pit;
};

/// Columns are independent jobs spread over `threads` workers.
FilteredPanel filter_panel(const Eigen::Ref<const Eigen::MatrixXd>& returns, int threads = 1,
                           const GarchOptions& options = {});

/// Simulates T observations with standard normal innovations after `burn_in` discarded steps,
/// starting from the unconditional variance omega / (1 - alpha - beta).
Eigen::VectorXd simulate_garch11(double mu, double omega, double alpha, double beta, Eigen::Index t,
                                 std::uint64_t seed, Eigen::Index burn_in = 500);

}  // namespace tcopula::garch
