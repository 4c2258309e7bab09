#include "tcopula/copula/spec.hpp"

#include "tcopula/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace tcopula::copula {

Eigen::MatrixXd correlation_cholesky(const Eigen::MatrixXd& corr) {
    if (corr.rows() != corr.cols() || corr.rows() < 2)
        throw ShapeError("correlation matrix must be square with dimension >= 2");
    if (!corr.allFinite()) throw DomainError("correlation matrix has non-finite entries");
    const Eigen::Index n = corr.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(corr(i, i) - 1.0) > 1e-10)
            throw DomainError("correlation matrix must have unit diagonal");
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(corr(i, j) - corr(j, i)) > 1e-10)
                throw DomainError("correlation matrix must be symmetric");
            if (!(std::abs(corr(i, j)) < 1.0))
                throw DegenerateCorrelationError("correlation entries must satisfy |rho| < 1");
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
        throw DegenerateCorrelationError("correlation matrix is not positive definite");
    Eigen::MatrixXd chol = llt.matrixL();
    if ((chol.diagonal().array() <= 0.0).any())
        throw DegenerateCorrelationError("correlation matrix is not positive definite");
    return chol;
}

CopulaSpec::CopulaSpec(Eigen::MatrixXd chol, std::optional<std::vector<Dof>> dofs,
                       std::optional<std::vector<int>> groups)
    : chol_(std::move(chol)), dofs_(std::move(dofs)), groups_(std::move(groups)) {
    const Eigen::Index n = chol_.rows();
    if (n < 2 || chol_.cols() != n) throw ShapeError("Cholesky factor must be square, n >= 2");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (chol_(i, j) != 0.0) throw DomainError("Cholesky factor must be lower triangular");
        if (!(chol_(i, i) > 0.0))
            throw DegenerateCorrelationError("Cholesky factor must have a positive diagonal");
        const double norm = chol_.row(i).norm();
        if (std::abs(norm - 1.0) > 1e-10)
            throw DomainError("Cholesky row " + std::to_string(i) + " has norm " +
                              std::to_string(norm) + " (unit variances required)");
        chol_.row(i) /= norm;
    }
    if (dofs_ && static_cast<Eigen::Index>(dofs_->size()) != n)
        throw ShapeError("dof vector length " + std::to_string(dofs_->size()) +
                         " does not match dimension " + std::to_string(n));
    if (groups_) {
        if (!dofs_) throw DomainError("a Gaussian copula cannot carry a group map");
        if (static_cast<Eigen::Index>(groups_->size()) != n)
            throw ShapeError("group map length does not match dimension");
        const int m = *std::max_element(groups_->begin(), groups_->end()) + 1;
        std::set<int> seen(groups_->begin(), groups_->end());
        if (*seen.begin() != 0 || static_cast<int>(seen.size()) != m)
            throw DomainError("group labels must be the contiguous range 0..m-1");
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < i; ++j)
                if ((*groups_)[i] == (*groups_)[j] && !((*dofs_)[i] == (*dofs_)[j]))
                    throw DomainError("dofs must be constant within each group");
    }
}

CopulaSpec CopulaSpec::gaussian(const Eigen::MatrixXd& corr) {
    return CopulaSpec(correlation_cholesky(corr), std::nullopt, std::nullopt);
}

CopulaSpec CopulaSpec::multidof(const Eigen::MatrixXd& corr, std::vector<Dof> dofs) {
    return CopulaSpec(correlation_cholesky(corr), std::move(dofs), std::nullopt);
}

CopulaSpec CopulaSpec::standard_t(const Eigen::MatrixXd& corr, Dof nu) {
    std::vector<Dof> dofs(static_cast<std::size_t>(corr.rows()), nu);
    return CopulaSpec(correlation_cholesky(corr), std::move(dofs), std::nullopt);
}

CopulaSpec CopulaSpec::grouped(const Eigen::MatrixXd& corr, std::vector<int> groups,
                               const std::vector<Dof>& group_dofs) {
    std::vector<Dof> dofs;
    dofs.reserve(groups.size());
    for (int g : groups) {
        if (g < 0 || g >= static_cast<int>(group_dofs.size()))
            throw DomainError("group label " + std::to_string(g) + " has no dof");
        dofs.push_back(group_dofs[static_cast<std::size_t>(g)]);
    }
    return CopulaSpec(correlation_cholesky(corr), std::move(dofs), std::move(groups));
}

CopulaSpec CopulaSpec::from_cholesky(Eigen::MatrixXd chol, std::optional<std::vector<Dof>> dofs,
                                     std::optional<std::vector<int>> groups) {
    return CopulaSpec(std::move(chol), std::move(dofs), std::move(groups));
}

namespace {
Eigen::Matrix2d corr2(double rho) {
    if (!(std::abs(rho) < 1.0))
        throw DegenerateCorrelationError("bivariate correlation must satisfy |rho| < 1");
    Eigen::Matrix2d c;
    c << 1.0, rho, rho, 1.0;
    return c;
}
}  // namespace

CopulaSpec CopulaSpec::bivariate(double rho, Dof nu1, Dof nu2) {
    return multidof(corr2(rho), {nu1, nu2});
}

CopulaSpec CopulaSpec::bivariate_gaussian(double rho) { return gaussian(corr2(rho)); }

const std::vector<Dof>& CopulaSpec::dofs() const {
    if (!dofs_) throw DomainError("Gaussian copula has no degrees of freedom");
    return *dofs_;
}

bool CopulaSpec::has_equal_dofs() const {
    if (!dofs_) return false;
    return std::all_of(dofs_->begin(), dofs_->end(),
                       [&](Dof d) { return d == dofs_->front(); });
}

UniformSample::UniformSample(Eigen::MatrixXd data) : data_(std::move(data)) {
    for (Eigen::Index j = 0; j < data_.rows(); ++j)
        for (Eigen::Index i = 0; i < data_.cols(); ++i) {
            const double u = data_(j, i);
            if (!(u > 0.0 && u < 1.0))
                throw DomainError("observation row " + std::to_string(j) + " column " +
                                  std::to_string(i) + " is not strictly inside (0, 1): " +
                                  std::to_string(u));
        }
}

}  // namespace tcopula::copula
