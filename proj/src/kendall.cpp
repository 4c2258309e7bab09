#include "tcopula/calibrate/kendall.hpp"

#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace tcopula::calibrate {

namespace {

// Number of tied pairs within runs of equal values of a sorted sequence.
template <class Equal>
long long tied_pairs(std::size_t n, Equal same) {
    long long total = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && same(i - 1, i)) {
            ++run;
        } else {
            total += static_cast<long long>(run) * static_cast<long long>(run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

// Stable merge sort of v counting inversions (pairs i<j with v[i] > v[j]).
long long merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    long long swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<long long>(mid - i);
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

}  // namespace

double kendall_tau(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) throw ShapeError("kendall_tau: columns differ in length");
    const auto n = static_cast<std::size_t>(x.size());
    if (n < 2) throw EstimationError("kendall_tau: need at least 2 observations");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x(static_cast<Eigen::Index>(i))) || !std::isfinite(y(static_cast<Eigen::Index>(i))))
            throw DomainError("kendall_tau: non-finite observation at row " + std::to_string(i));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(b);
        return x(ia) < x(ib) || (x(ia) == x(ib) && y(ia) < y(ib));
    });
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x(static_cast<Eigen::Index>(order[i]));
        ys[i] = y(static_cast<Eigen::Index>(order[i]));
    }
    const long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
    const long long n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
    const long long n3 =
        tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b] && ys[a] == ys[b]; });
    std::vector<double> buf(n);
    const long long swaps = merge_count(ys, buf, 0, n);
    const long long n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

    if (n0 == n1 || n0 == n2) throw EstimationError("kendall_tau: constant column, tau is undefined");
    const double numerator = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
    const double denom = std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
    return std::clamp(numerator / denom, -1.0, 1.0);
}

Eigen::MatrixXd kendall_tau_matrix(const Eigen::Ref<const Eigen::MatrixXd>& data) {
    const Eigen::Index n = data.cols();
    Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 1; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) tau(i, j) = tau(j, i) = kendall_tau(data.col(i), data.col(j));
    return tau;
}

double corr_from_tau(double tau) { return std::sin(0.5 * std::numbers::pi * tau); }

Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (n != matrix.cols()) throw ShapeError("repair_correlation: matrix must be square");
    if (!matrix.isApprox(matrix.transpose(), 1e-12))
        throw DomainError("repair_correlation: matrix must be symmetric");
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(matrix(i, i) - 1.0) > 1e-12)
            throw DomainError("repair_correlation: diagonal entries must be 1");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
    if (eig.eigenvalues().minCoeff() >= kEigenvalueFloor) return matrix;

    Eigen::MatrixXd repaired = matrix;
    for (double floor = kEigenvalueFloor; floor < 1.0; floor *= 2.0) {
        const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(floor);
        Eigen::MatrixXd m = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
        const Eigen::VectorXd d = m.diagonal().cwiseSqrt().cwiseInverse();
        m = d.asDiagonal() * m * d.asDiagonal();
        m = 0.5 * (m + m.transpose());
        m.diagonal().setOnes();
        repaired = m;
        if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() >=
            kEigenvalueFloor)
            break;
    }
    log::warn("correlation matrix was not positive definite; eigenvalues floored and rescaled");
    return repaired;
}

Eigen::MatrixXd tau_correlation(const copula::UniformSample& sample) {
    Eigen::MatrixXd corr = kendall_tau_matrix(sample.data()).unaryExpr([](double t) { return corr_from_tau(t); });
    return repair_correlation(corr);
}

}  // namespace tcopula::calibrate
