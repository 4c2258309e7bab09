#include "tcopula/copula/cdf.hpp"

#include "tcopula/copula/density.hpp"
#include "tcopula/copula/simulate.hpp"
#include "tcopula/detail/boost_policy.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/numerics/quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <atomic>
#include <cmath>
#include <limits>
#include <string>

namespace tcopula::copula {

namespace {

double mixing_root(double s, double s_complement, double nu) {
    const double half = 0.5 * nu;
    const double y = s <= 0.5
                         ? 2.0 * boost::math::gamma_p_inv(half, s, tcopula::detail::MathPolicy())
                         : 2.0 * boost::math::gamma_q_inv(half, s_complement, tcopula::detail::MathPolicy());
    return std::sqrt(y / nu);
}

double bivariate_exact(const CopulaSpec& spec, const Eigen::Vector2d& u, double rel_tol) {
    const double rho = spec.rho();
    if (spec.is_gaussian())
        return numerics::bvn_cdf(numerics::normal_quantile(u(0)), numerics::normal_quantile(u(1)), rho);
    const auto& dofs = spec.dofs();
    const double x1 = numerics::student_t_quantile(u(0), dofs[0]);
    const double x2 = numerics::student_t_quantile(u(1), dofs[1]);
    const double nu1 = dofs[0].value();
    const double nu2 = dofs[1].value();
    auto integrand = [&](double s, double xc) {
        const double sc = xc < 0 ? 1.0 - s : xc;
        const double r1 = mixing_root(s, sc, nu1);
        const double r2 = nu2 == nu1 ? r1 : mixing_root(s, sc, nu2);
        return numerics::bvn_cdf(x1 * r1, x2 * r2, rho);
    };
    boost::math::quadrature::tanh_sinh<double> rule;
    double err = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double value = rule.integrate(integrand, 0.0, 1.0, rel_tol, &err, &l1, &levels);
    if (!std::isfinite(value) || err > std::max(1e3 * rel_tol * std::abs(value), 1e-14)) {
        throw QuadratureError("copula cdf: integral did not converge at u = (" + std::to_string(u(0)) +
                                  ", " + std::to_string(u(1)) + ")",
                              value, err, levels);
    }
    return std::clamp(value, 0.0, 1.0);
}

CdfEstimate monte_carlo(const CopulaSpec& spec, const Eigen::VectorXd& u, const CdfOptions& options) {
    if (options.mc_samples < 1) throw DomainError("copula cdf: mc_samples must be >= 1");
    const Sampler sampler(spec, options.seed);
    const auto chunks =
        static_cast<std::size_t>((options.mc_samples + Sampler::kChunkRows - 1) / Sampler::kChunkRows);
    std::vector<long long> hits(chunks, 0);
    sampler.for_each_chunk(
        options.mc_samples, options.threads, false, true,
        [&](std::uint64_t c, Eigen::Index, const Eigen::MatrixXd&, const Eigen::MatrixXd& draws) {
            long long count = 0;
            for (Eigen::Index j = 0; j < draws.rows(); ++j)
                count += ((draws.row(j).transpose().array() <= u.array()).all()) ? 1 : 0;
            hits[c] = count;
        });
    long long total = 0;
    for (long long h : hits) total += h;
    const double n = static_cast<double>(options.mc_samples);
    const double p = static_cast<double>(total) / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace

CdfEstimate copula_cdf(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u_in,
                       const CdfOptions& options) {
    const int n = spec.dim();
    if (u_in.size() != n)
        throw ShapeError("copula cdf: point has dimension " + std::to_string(u_in.size()) +
                         ", copula has " + std::to_string(n));
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = clamp_interior(u_in(i));
    if (options.method == CdfMethod::monte_carlo) return monte_carlo(spec, u, options);
    if (n != 2)
        throw UnsupportedError("copula cdf: exact evaluation is available for n = 2 only; "
                               "use the Monte Carlo method for n = " + std::to_string(n));
    return {bivariate_exact(spec, Eigen::Vector2d(u(0), u(1)), options.rel_tol), 0.0};
}

double standard_t_copula_cdf(double rho, Dof nu, const Eigen::Vector2d& u_in) {
    if (!(std::abs(rho) < 1.0))
        throw DegenerateCorrelationError("standard t copula cdf: |rho| must be < 1, got " +
                                         std::to_string(rho));
    const double a = numerics::student_t_quantile(clamp_interior(u_in(0)), nu);
    const double b = numerics::student_t_quantile(clamp_interior(u_in(1)), nu);
    const double v = nu.value();
    const Dof nu1(v + 1.0);
    const double c = (1.0 - rho * rho) / (v + 1.0);
    auto f = [&](double x) {
        const double arg = (b - rho * x) / std::sqrt(c * (v + x * x));
        return numerics::student_t_pdf(x, nu) * numerics::student_t_cdf(arg, nu1);
    };
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-15;
    const double lower = -std::numeric_limits<double>::infinity();
    return numerics::integrate(f, lower, a, opts).value;
}

}  // namespace tcopula::copula
