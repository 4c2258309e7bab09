#pragma once

#include "tcopula/numerics/special.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace tcopula::copula {

using numerics::Dof;

/// Parameters of the t copula family with one degrees-of-freedom value per coordinate.
///
/// The correlation matrix is held through its lower Cholesky factor A (Sigma = A A'),
/// whose rows have unit Euclidean norm and whose diagonal is strictly positive.
/// Gaussian, standard t, grouped t and per-coordinate dof copulas are all instances:
///  - Gaussian: no dofs (the nu -> infinity limit, evaluated in closed form);
///  - standard t: all dofs equal;
///  - grouped t: a group index per coordinate, dofs constant within a group.
/// Instances are immutable once built.
class CopulaSpec {
public:
    static CopulaSpec gaussian(const Eigen::MatrixXd& corr);
    static CopulaSpec multidof(const Eigen::MatrixXd& corr, std::vector<Dof> dofs);
    static CopulaSpec standard_t(const Eigen::MatrixXd& corr, Dof nu);
    /// `groups[i]` is the group of coordinate i (0-based, contiguous labels);
    /// `group_dofs[g]` the shared dof of group g.
    static CopulaSpec grouped(const Eigen::MatrixXd& corr, std::vector<int> groups,
                              const std::vector<Dof>& group_dofs);
    /// Builds from a Cholesky factor; rows must have unit norm to within 1e-10
    /// and are renormalised exactly.
    static CopulaSpec from_cholesky(Eigen::MatrixXd chol, std::optional<std::vector<Dof>> dofs,
                                    std::optional<std::vector<int>> groups = std::nullopt);

    static CopulaSpec bivariate(double rho, Dof nu1, Dof nu2);
    static CopulaSpec bivariate_gaussian(double rho);

    int dim() const noexcept { return static_cast<int>(chol_.rows()); }
    const Eigen::MatrixXd& chol() const noexcept { return chol_; }
    Eigen::MatrixXd corr() const { return chol_ * chol_.transpose(); }
    /// Correlation between coordinates 1 and 0.
    double rho() const { return corr()(1, 0); }

    bool is_gaussian() const noexcept { return !dofs_.has_value(); }
    /// Per-coordinate dofs. Throws DomainError for a Gaussian spec.
    const std::vector<Dof>& dofs() const;
    const std::optional<std::vector<int>>& groups() const noexcept { return groups_; }
    /// True when every coordinate shares one dof value.
    bool has_equal_dofs() const;

private:
    CopulaSpec(Eigen::MatrixXd chol, std::optional<std::vector<Dof>> dofs,
               std::optional<std::vector<int>> groups);

    Eigen::MatrixXd chol_;
    std::optional<std::vector<Dof>> dofs_;
    std::optional<std::vector<int>> groups_;
};

/// Lower Cholesky factor of a correlation matrix after checking symmetry, unit diagonal
/// and positive definiteness.
Eigen::MatrixXd correlation_cholesky(const Eigen::MatrixXd& corr);

/// K x n matrix of pseudo-observations, every entry strictly inside (0, 1).
class UniformSample {
public:
    UniformSample() = default;
    /// Throws DomainError naming the first row with an entry outside (0, 1).
    explicit UniformSample(Eigen::MatrixXd data);

    Eigen::Index size() const noexcept { return data_.rows(); }
    int dim() const noexcept { return static_cast<int>(data_.cols()); }
    const Eigen::MatrixXd& data() const noexcept { return data_; }
    auto row(Eigen::Index j) const { return data_.row(j); }
    auto col(Eigen::Index i) const { return data_.col(i); }

private:
    Eigen::MatrixXd data_;
};

}  // namespace tcopula::copula
