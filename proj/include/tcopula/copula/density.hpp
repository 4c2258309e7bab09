#pragma once

#include "tcopula/copula/spec.hpp"

#include <Eigen/Core>

#include <memory>

namespace tcopula::copula {

struct DensityOptions {
    /// Relative tolerance on the mixing integral (difference of successive levels).
    double rel_tol = 1e-10;
    int min_level = 4;
    int max_level = 11;
};

namespace detail {
class MixingTable;
}

/// Evaluates the copula density at many points with one set of parameters.
///
/// The density is a one-dimensional integral over the mixing variable s in (0, 1):
///   c(u) = int_0^1 phi_Sigma(x_1 / w_1(s), ..., x_n / w_n(s)) prod_k w_k(s)^-1 ds
///          / prod_k f_{nu_k}(x_k),   x_k = t_{nu_k}^{-1}(u_k),
/// computed with a tanh-sinh rule refined level by level until successive levels agree.
/// All points share the abscissae, so the mixing scales w_k(s) (inverse chi-square
/// evaluations) are computed once per level and reused. Terms are accumulated in log
/// space, which keeps deep-tail observations from underflowing.
///
/// A Gaussian spec is evaluated in closed form. Coordinates within 1e-12 of 0 or 1 are
/// clamped with a warning; coordinates outside (0, 1) raise DomainError.
/// Evaluation is const and safe to call concurrently.
class DensityEvaluator {
public:
    explicit DensityEvaluator(const CopulaSpec& spec, const DensityOptions& options = {});

    double log_pdf(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    double pdf(const Eigen::Ref<const Eigen::VectorXd>& u) const;

    const CopulaSpec& spec() const noexcept { return spec_; }

private:
    double log_pdf_gaussian(const Eigen::VectorXd& u) const;
    double log_mixing_integral(const double* coefficients, const Eigen::VectorXd& u) const;

    CopulaSpec spec_;
    DensityOptions options_;
    Eigen::MatrixXd precision_;
    double log_det_ = 0.0;
    std::shared_ptr<const detail::MixingTable> table_;
};

double copula_pdf(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u,
                  const DensityOptions& options = {});
double copula_log_pdf(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u,
                      const DensityOptions& options = {});

struct LikelihoodOptions {
    DensityOptions density{1e-8, 4, 11};
    unsigned threads = 1;
};

/// Per-observation log densities, in row order.
Eigen::VectorXd log_density_terms(const CopulaSpec& spec, const UniformSample& sample,
                                  const LikelihoodOptions& options = {});

/// Sum of log densities over the rows of the sample (pairwise summation, so the result
/// does not depend on the thread count).
double log_likelihood(const CopulaSpec& spec, const UniformSample& sample,
                      const LikelihoodOptions& options = {});

/// Clamps a coordinate to [1e-12, 1 - 1e-12] with a warning; throws DomainError outside (0, 1).
double clamp_interior(double u);

}  // namespace tcopula::copula
