#include "tcopula/garch/garch.hpp"

#include "tcopula/detail/parallel.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"
#include "tcopula/numerics/optimize.hpp"

#include <Eigen/Cholesky>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace tcopula::garch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double mean = x.mean();
    return (x.array() - mean).square().sum() / static_cast<double>(x.size());
}

struct Params {
    double mu, omega, alpha, beta;
};

Params from_free(const Eigen::VectorXd& eta) {
    const double ea = std::exp(eta(2));
    const double eb = std::exp(eta(3));
    const double d = 1.0 + ea + eb;
    return {eta(0), std::exp(eta(1)), ea / d, eb / d};
}

}  // namespace

void validate_series(const Eigen::Ref<const Eigen::VectorXd>& series) {
    if (series.size() < kMinSeriesLength)
        throw DomainError("return series needs at least " + std::to_string(kMinSeriesLength) + " values, got " +
                          std::to_string(series.size()));
    for (Eigen::Index t = 0; t < series.size(); ++t)
        if (!std::isfinite(series(t))) throw DomainError("return series has a non-finite value at t = " + std::to_string(t));
}

double garch11_loglik(const Eigen::Ref<const Eigen::VectorXd>& x, double mu, double omega, double alpha, double beta,
                      double sigma0_sq) {
    const Eigen::Index n = x.size();
    double sigma2 = omega + (alpha + beta) * sigma0_sq;
    double ll = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t > 0) {
            const double e = x(t - 1) - mu;
            sigma2 = omega + alpha * e * e + beta * sigma2;
        }
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return -kInf;
        const double e = x(t) - mu;
        ll += std::log(sigma2) + e * e / sigma2;
    }
    return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + ll);
}

GarchFit fit_garch11(const Eigen::Ref<const Eigen::VectorXd>& series, const GarchOptions& options) {
    validate_series(series);
    const Eigen::Index n = series.size();
    const double mean = series.mean();
    const double var = sample_variance(series);
    if (series.maxCoeff() == series.minCoeff() || !(var > 0.0))
        throw EstimationError("fit_garch11: constant series, volatility is degenerate");
    const double scale = std::sqrt(var);
    const Eigen::VectorXd z = (series.array() - mean) / scale;
    const double z_var = sample_variance(z);

    auto objective = [&](const Eigen::VectorXd& eta) {
        const Params p = from_free(eta);
        if (!(p.alpha + p.beta < 1.0)) return kInf;
        return -garch11_loglik(z, p.mu, p.omega, p.alpha, p.beta, z_var);
    };

    numerics::NelderMeadOptions opts;
    opts.x_tol = 1e-7;
    opts.max_evaluations = 4000;
    const Eigen::Vector4d steps(0.05, 0.5, 0.5, 0.5);
    const double starts[][2] = {{0.05, 0.90}, {0.10, 0.80}, {0.02, 0.02}};
    numerics::NelderMeadResult best;
    best.value = kInf;
    std::size_t evaluations = 0;
    for (const auto& s : starts) {
        const double rest = 1.0 - s[0] - s[1];
        const Eigen::Vector4d eta(0.0, std::log(rest), std::log(s[0] / rest), std::log(s[1] / rest));
        auto res = numerics::nelder_mead(objective, eta, steps, opts);
        evaluations += res.evaluations;
        if (res.value < best.value) best = res;
    }

    GarchFit fit;
    fit.sigma0 = scale;
    fit.evaluations = evaluations;
    const double constant_ll = -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi) + std::log(z_var) + 1.0);
    Params p{0.0, z_var, 0.0, 0.0};
    if (std::isfinite(best.value) && -best.value >= constant_ll + options.min_loglik_gain) {
        p = from_free(best.x);
        fit.converged = best.converged;
    } else {
        fit.converged = true;
    }
    fit.mu = mean + scale * p.mu;
    fit.omega = p.omega * var;
    fit.alpha = p.alpha;
    fit.beta = p.beta;
    fit.loglik = garch11_loglik(series, fit.mu, fit.omega, fit.alpha, fit.beta, var);
    if (!fit.converged) log::warn("fit_garch11: simplex did not converge within the evaluation budget");

    // Observed information in natural parameters on the standardised scale.
    const Eigen::Vector4d theta(p.mu, p.omega, p.alpha, p.beta);
    auto ll = [&](const Eigen::VectorXd& th) {
        if (th(1) <= 0.0 || th(2) < 0.0 || th(3) < 0.0 || th(2) + th(3) >= 1.0)
            return std::numeric_limits<double>::quiet_NaN();
        return garch11_loglik(z, th(0), th(1), th(2), th(3), z_var);
    };
    Eigen::VectorXd h(4);
    for (int i = 0; i < 4; ++i) h(i) = 1e-4 * std::max(std::abs(theta(i)), 1e-2);
    const Eigen::MatrixXd info = -numerics::central_difference_hessian(ll, theta, h);
    if (info.allFinite()) {
        const Eigen::LLT<Eigen::MatrixXd> llt(info);
        if (llt.info() == Eigen::Success) {
            const Eigen::Vector4d se = llt.solve(Eigen::Matrix4d::Identity()).diagonal().cwiseSqrt();
            fit.std_errors = Eigen::Vector4d(se(0) * scale, se(1) * var, se(2), se(3));
        }
    }
    return fit;
}

Eigen::VectorXd filter_residuals(const Eigen::Ref<const Eigen::VectorXd>& x, const GarchFit& fit) {
    if (x.size() < 1) throw DomainError("filter_residuals: empty series");
    Eigen::VectorXd eps(x.size());
    const double s0 = fit.sigma0 * fit.sigma0;
    double sigma2 = fit.omega + (fit.alpha + fit.beta) * s0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        if (t > 0) {
            const double e = x(t - 1) - fit.mu;
            sigma2 = fit.omega + fit.alpha * e * e + fit.beta * sigma2;
        }
        if (!(sigma2 >= std::numeric_limits<double>::min()) || !std::isfinite(sigma2))
            throw NumericalDegeneracyError("filter_residuals: conditional variance underflows at t = " +
                                           std::to_string(t));
        eps(t) = (x(t) - fit.mu) / std::sqrt(sigma2);
    }
    return eps;
}

Eigen::VectorXd empirical_pit(const Eigen::Ref<const Eigen::VectorXd>& r) {
    const Eigen::Index n = r.size();
    if (n < 2) throw DomainError("empirical_pit: need at least 2 values");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return r(a) < r(b); });
    Eigen::VectorXd u(n);
    const double denom = static_cast<double>(n) + 1.0;
    for (Eigen::Index i = 0; i < n;) {
        Eigen::Index j = i;
        while (j + 1 < n && r(order[static_cast<std::size_t>(j + 1)]) == r(order[static_cast<std::size_t>(i)])) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) u(order[static_cast<std::size_t>(k)]) = rank / denom;
        i = j + 1;
    }
    return u;
}

Eigen::VectorXd simulate_garch11(double mu, double omega, double alpha, double beta, Eigen::Index t,
                                 std::uint64_t seed, Eigen::Index burn_in) {
    if (!(omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0))
        throw DomainError("simulate_garch11: need omega > 0, alpha, beta >= 0, alpha + beta < 1");
    if (t < 1 || burn_in < 0) throw DomainError("simulate_garch11: invalid length");
    boost::random::mt19937_64 gen(seed);
    boost::random::normal_distribution<double> normal;
    Eigen::VectorXd x(t);
    double sigma2 = omega / (1.0 - alpha - beta);
    double prev = 0.0;
    for (Eigen::Index i = -burn_in; i < t; ++i) {
        if (i > -burn_in) sigma2 = omega + alpha * prev * prev + beta * sigma2;
        prev = std::sqrt(sigma2) * normal(gen);
        if (i >= 0) x(i) = mu + prev;
    }
    return x;
}

FilteredPanel filter_panel(const Eigen::Ref<const Eigen::MatrixXd>& returns, int threads,
                           const GarchOptions& options) {
    const auto d = static_cast<std::size_t>(returns.cols());
    FilteredPanel out;
    out.fits.resize(d);
    out.residuals.resize(returns.rows(), returns.cols());
    out.pit.resize(returns.rows(), returns.cols());
    detail::parallel_for(d, static_cast<unsigned>(std::max(threads, 0)), [&](std::size_t i) {
        const auto c = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd x = returns.col(c);
        out.fits[i] = fit_garch11(x, options);
        out.residuals.col(c) = filter_residuals(x, out.fits[i]);
        out.pit.col(c) = empirical_pit(out.residuals.col(c));
    });
    return out;
}

}  // namespace tcopula::garch
