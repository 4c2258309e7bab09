#pragma once

#include <Eigen/Core>

namespace tcopula::numerics {

/// Degrees of freedom of a Student-t or chi-square law. Always finite and strictly positive.
class Dof {
public:
    explicit Dof(double value);
    double value() const noexcept { return value_; }
    friend bool operator==(Dof a, Dof b) noexcept { return a.value_ == b.value_; }

private:
    double value_;
};

// Standard normal.
double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;
double normal_quantile(double u);

// Student t with nu degrees of freedom.
double student_t_pdf(double x, Dof nu);
double student_t_log_pdf(double x, Dof nu);
double student_t_cdf(double x, Dof nu);
double student_t_quantile(double u, Dof nu);

// Chi-square with nu degrees of freedom.
double chisq_pdf(double t, Dof nu);
double chisq_cdf(double t, Dof nu);
double chisq_survival(double t, Dof nu);
/// Inverse CDF; defined on [0, 1) with chisq_quantile(0, nu) == 0.
double chisq_quantile(double s, Dof nu);
/// Inverse survival function: the t with P(chi2 > t) == tail. Accurate for tiny tails.
double chisq_quantile_upper(double tail, Dof nu);

/// Mixing scale W = sqrt(nu / chisq_quantile(s, nu)); strictly decreasing in s on (0, 1).
double w_mixing(double s, Dof nu);

/// P(X <= a, Y <= b) for a standard bivariate normal with correlation rho.
/// Infinite limits are accepted. Correlations with 1 - 1e-12 < |rho| < 1 are clamped
/// (with a warning); |rho| >= 1 throws DegenerateCorrelationError.
double bvn_cdf(double a, double b, double rho);

/// Zero-mean normal density with covariance chol * chol'.
double mvn_pdf(const Eigen::Ref<const Eigen::VectorXd>& z,
               const Eigen::Ref<const Eigen::MatrixXd>& chol);
double mvn_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::MatrixXd>& chol);

}  // namespace tcopula::numerics
