#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcopula/copula/cdf.hpp"
#include "tcopula/copula/density.hpp"
#include "tcopula/copula/simulate.hpp"
#include "tcopula/copula/spec.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"
#include "tcopula/numerics/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace tcopula;
using namespace tcopula::copula;

namespace {

constexpr double pi = std::numbers::pi;

double t_quantile(double u, double nu) { return numerics::student_t_quantile(u, Dof(nu)); }

// Univariate and bivariate t densities written out from their formulas.
double t_pdf(double x, double nu) {
    return std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(nu * pi) -
                    (nu + 1) / 2 * std::log1p(x * x / nu));
}
double bvt_pdf(double x, double y, double rho, double nu) {
    const double q = (x * x - 2 * rho * x * y + y * y) / (1 - rho * rho);
    return std::exp(std::lgamma((nu + 2) / 2) - std::lgamma(nu / 2) - std::log(nu * pi) -
                    0.5 * std::log(1 - rho * rho) - (nu + 2) / 2 * std::log1p(q / nu));
}
double standard_t_density(double u1, double u2, double rho, double nu) {
    const double x = t_quantile(u1, nu), y = t_quantile(u2, nu);
    return bvt_pdf(x, y, rho, nu) / (t_pdf(x, nu) * t_pdf(y, nu));
}
double gaussian_copula_density(double u1, double u2, double rho) {
    const double x = numerics::normal_quantile(u1), y = numerics::normal_quantile(u2);
    const double q = (rho * rho * (x * x + y * y) - 2 * rho * x * y) / (1 - rho * rho);
    return std::exp(-0.5 * q) / std::sqrt(1 - rho * rho);
}

// P(X <= a, Y <= b) for the standard bivariate t by nested Simpson rules.
// x = a - (1 - v) / v maps v in (0, 1] onto (-inf, a].
double bvt_cdf_2d(double a, double b, double rho, double nu, int n) {
    auto inner = [&](double x) {
        double s = 0.0;
        const double h = 1.0 / n;
        for (int j = 0; j <= n; ++j) {
            const double v = std::max(j * h, 1e-300);
            if (j == 0) continue;  // integrand vanishes at v = 0
            const double y = b - (1 - v) / v;
            s += bvt_pdf(x, y, rho, nu) / (v * v) * (j == n ? 1.0 : (j % 2 ? 4.0 : 2.0));
        }
        return s * h / 3.0;
    };
    double s = 0.0;
    const double h = 1.0 / n;
    for (int i = 1; i <= n; ++i) {
        const double v = i * h;
        s += inner(a - (1 - v) / v) / (v * v) * (i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return s * h / 3.0;
}

double ks_uniform(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        d = std::max({d, (i + 1) / n - x[i], x[i] - i / n});
    return d;
}

double tau_naive(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = 0.0;
    const auto n = a.size();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) s += ((a(i) - a(j)) * (b(i) - b(j)) > 0) ? 1.0 : -1.0;
    return s / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

const CopulaSpec spec_728 = CopulaSpec::bivariate(0.7, Dof(2), Dof(8));

}  // namespace

TEST_CASE("CopulaSpec invariants") {
    Eigen::Matrix3d corr;
    corr << 1, 0.5, 0.2, 0.5, 1, -0.3, 0.2, -0.3, 1;
    const auto s = CopulaSpec::multidof(corr, {Dof(2), Dof(5), Dof(9)});
    CHECK(s.dim() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(s.chol().row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.chol()(i, i) > 0.0);
    }
    CHECK((s.corr() - corr).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_FALSE(s.has_equal_dofs());
    CHECK(CopulaSpec::standard_t(corr, Dof(4)).has_equal_dofs());
    const auto g = CopulaSpec::grouped(corr, {0, 0, 1}, {Dof(3), Dof(10)});
    CHECK(g.dofs()[0] == g.dofs()[1]);
    CHECK(g.dofs()[2].value() == 10.0);
    CHECK(CopulaSpec::gaussian(corr).is_gaussian());
    CHECK_THROWS_AS(CopulaSpec::gaussian(corr).dofs(), DomainError);

    Eigen::Matrix2d bad;
    bad << 1, 1.2, 1.2, 1;
    CHECK_THROWS(CopulaSpec::gaussian(bad));
    CHECK_THROWS_AS(CopulaSpec::bivariate(1.0, Dof(2), Dof(3)), DegenerateCorrelationError);
    CHECK_THROWS_AS(CopulaSpec::multidof(corr, {Dof(2), Dof(5)}), ShapeError);
    CHECK_THROWS(CopulaSpec::grouped(corr, {0, 2, 2}, {Dof(3), Dof(4), Dof(5)}));
    Eigen::Matrix2d asym;
    asym << 1, 0.3, 0.2, 1;
    CHECK_THROWS(CopulaSpec::gaussian(asym));
}

TEST_CASE("UniformSample rejects boundary values") {
    Eigen::MatrixXd d(3, 2);
    d << 0.2, 0.3, 0.5, 1.0, 0.1, 0.9;
    try {
        UniformSample s(d);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("copula_cdf") {
    log::ScopedWarningCapture quiet;
    const double one_minus = std::nextafter(1.0, 0.0);
    for (const auto& s : {spec_728, CopulaSpec::bivariate(-0.4, Dof(3), Dof(3)), CopulaSpec::bivariate(0.9, Dof(1), Dof(20))}) {
        CHECK(copula_cdf(s, Eigen::Vector2d(0.37, one_minus)).value == doctest::Approx(0.37).epsilon(1e-9));
        CHECK(copula_cdf(s, Eigen::Vector2d(one_minus, 0.81)).value == doctest::Approx(0.81).epsilon(1e-9));
    }
    for (double a : {0.5, 3.0})
        for (double b : {1.0, 12.0})
            CHECK(copula_cdf(CopulaSpec::bivariate(0.0, Dof(a), Dof(b)), Eigen::Vector2d(0.5, 0.5)).value ==
                  doctest::Approx(0.25).epsilon(1e-10));

    // standard t, oracle by 2-D quadrature of the bivariate t density
    const double a = t_quantile(0.3, 4), b = t_quantile(0.6, 4);
    const double oracle = bvt_cdf_2d(a, b, 0.7, 4.0, 800);
    CHECK(copula_cdf(CopulaSpec::bivariate(0.7, Dof(4), Dof(4)), Eigen::Vector2d(0.3, 0.6)).value ==
          doctest::Approx(oracle).epsilon(1e-7));

    double prev = 0.0;
    for (double u = 0.05; u < 1.0; u += 0.1) {
        const double c = copula_cdf(spec_728, Eigen::Vector2d(u, 0.4)).value;
        CHECK(c >= prev);
        CHECK(c <= 0.4 + 1e-12);
        prev = c;
    }

    Eigen::Matrix3d corr = Eigen::Matrix3d::Identity();
    const auto s3 = CopulaSpec::multidof(corr, {Dof(2), Dof(3), Dof(4)});
    CHECK_THROWS_AS(copula_cdf(s3, Eigen::Vector3d(0.5, 0.5, 0.5)), UnsupportedError);
    CdfOptions mc;
    mc.method = CdfMethod::monte_carlo;
    mc.mc_samples = 400'000;
    const auto est = copula_cdf(s3, Eigen::Vector3d(0.5, 0.5, 0.5), mc);
    // zero correlation: independent signs, so the orthant probability is 1/8
    CHECK(std::abs(est.value - 0.125) < 4 * est.mc_stderr);
    CHECK(est.mc_stderr > 0.0);
}

TEST_CASE("standard_t_copula_cdf") {
    CHECK(standard_t_copula_cdf(0.0, Dof(5), Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(0.25).epsilon(1e-12));
    const double direct = standard_t_copula_cdf(0.7, Dof(8), Eigen::Vector2d(0.9, 0.9));
    const double mixed = copula_cdf(CopulaSpec::bivariate(0.7, Dof(8), Dof(8)), Eigen::Vector2d(0.9, 0.9)).value;
    CHECK(std::abs(direct - mixed) <= 1e-7);
    for (double u1 : {0.01, 0.3, 0.77})
        for (double u2 : {0.02, 0.5, 0.95})
            CHECK(std::abs(standard_t_copula_cdf(-0.5, Dof(3), Eigen::Vector2d(u1, u2)) -
                           copula_cdf(CopulaSpec::bivariate(-0.5, Dof(3), Dof(3)), Eigen::Vector2d(u1, u2)).value) <=
                  1e-7);
    // C(q, q) / q approaches 2 t_{nu+1}(-sqrt((nu + 1)(1 - rho)/(1 + rho)))
    const double nu = 4, rho = 0.7;
    const double lambda = 2 * numerics::student_t_cdf(-std::sqrt((nu + 1) * (1 - rho) / (1 + rho)), Dof(nu + 1));
    double prev_gap = INFINITY;
    for (double q : {1e-2, 1e-4, 1e-6}) {
        const double gap = std::abs(standard_t_copula_cdf(rho, Dof(nu), Eigen::Vector2d(q, q)) / q - lambda);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.01);
}

TEST_CASE("copula_pdf symmetries and reductions") {
    const std::vector<double> grid{0.02, 0.2, 0.5, 0.73, 0.97};
    for (double u1 : grid)
        for (double u2 : grid) {
            const double c = copula_pdf(spec_728, Eigen::Vector2d(u1, u2));
            CHECK(c > 0.0);
            CHECK(c == doctest::Approx(copula_pdf(spec_728, Eigen::Vector2d(1 - u1, 1 - u2))).epsilon(1e-8));
            CHECK(c == doctest::Approx(copula_pdf(CopulaSpec::bivariate(-0.7, Dof(2), Dof(8)),
                                                  Eigen::Vector2d(1 - u1, u2)))
                           .epsilon(1e-8));
            CHECK(copula_pdf(CopulaSpec::bivariate(0.4, Dof(6), Dof(6)), Eigen::Vector2d(u1, u2)) ==
                  doctest::Approx(standard_t_density(u1, u2, 0.4, 6.0)).epsilon(1e-9));
            CHECK(copula_pdf(CopulaSpec::bivariate_gaussian(-0.6), Eigen::Vector2d(u1, u2)) ==
                  doctest::Approx(gaussian_copula_density(u1, u2, -0.6)).epsilon(1e-12));
        }
    const double c12 = copula_pdf(spec_728, Eigen::Vector2d(0.95, 0.99));
    const double c21 = copula_pdf(spec_728, Eigen::Vector2d(0.99, 0.95));
    CHECK(std::abs(c12 - c21) > 1e-4);
}

TEST_CASE("copula_pdf integrates to one") {
    // logistic substitution u = 1 / (1 + e^-t); corners decay exponentially in t
    const double h = 0.1, t_max = 27.0;
    const int n = static_cast<int>(2 * t_max / h);
    const DensityEvaluator eval(spec_728);
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t1 = -t_max + i * h;
        const double u1 = 1 / (1 + std::exp(-t1)), v1 = 1 / (1 + std::exp(t1));
        for (int j = 0; j <= n; ++j) {
            const double t2 = -t_max + j * h;
            const double u2 = 1 / (1 + std::exp(-t2)), v2 = 1 / (1 + std::exp(t2));
            total += eval.pdf(Eigen::Vector2d(u1, u2)) * u1 * v1 * u2 * v2;
        }
    }
    CHECK(total * h * h == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("copula_pdf boundary handling") {
    log::ScopedWarningCapture cap;
    const double c = copula_pdf(spec_728, Eigen::Vector2d(1e-14, 0.5));
    CHECK(std::isfinite(c));
    CHECK(c == doctest::Approx(copula_pdf(spec_728, Eigen::Vector2d(1e-12, 0.5))).epsilon(1e-12));
    CHECK(cap.contains("clamp"));
    CHECK_THROWS_AS(copula_pdf(spec_728, Eigen::Vector2d(0.0, 0.5)), DomainError);
    CHECK_THROWS_AS(copula_pdf(spec_728, Eigen::Vector2d(0.5, 1.2)), DomainError);
    CHECK_THROWS_AS(copula_pdf(spec_728, Eigen::Vector3d(0.5, 0.5, 0.5)), ShapeError);
}

TEST_CASE("log_likelihood") {
    const auto spec = CopulaSpec::bivariate(0.5, Dof(3), Dof(7));
    Eigen::MatrixXd pts(3, 2);
    pts << 0.1, 0.2, 0.6, 0.35, 0.999, 0.97;
    double direct = 0.0;
    for (int j = 0; j < 3; ++j) direct += std::log(copula_pdf(spec, pts.row(j).transpose()));
    CHECK(log_likelihood(spec, UniformSample(pts)) == doctest::Approx(direct).epsilon(1e-8));
    CHECK(log_likelihood(spec, UniformSample(pts.topRows(1))) ==
          doctest::Approx(std::log(copula_pdf(spec, pts.row(0).transpose()))).epsilon(1e-8));
    double gauss = 0.0;
    for (int j = 0; j < 3; ++j) gauss += std::log(gaussian_copula_density(pts(j, 0), pts(j, 1), 0.3));
    CHECK(log_likelihood(CopulaSpec::bivariate_gaussian(0.3), UniformSample(pts)) ==
          doctest::Approx(gauss).epsilon(1e-12));
    // deep tail observations stay finite
    Eigen::MatrixXd tail(1, 2);
    tail << 1e-11, 1 - 1e-11;
    CHECK(std::isfinite(log_likelihood(spec_728, UniformSample(tail))));
    LikelihoodOptions threaded;
    threaded.threads = 3;
    const auto big = simulate(spec_728, 500, 5);
    CHECK(log_likelihood(spec_728, big, threaded) == log_likelihood(spec_728, big));
}

TEST_CASE("simulate") {
    const auto spec = CopulaSpec::bivariate(0.9, Dof(2), Dof(10));
    const auto a = simulate(spec, 1000, 42);
    const auto b = simulate(spec, 1000, 42);
    CHECK(a.data() == b.data());
    CHECK(simulate(spec, 9000, 42, 3).data() == simulate(spec, 9000, 42, 1).data());
    CHECK_FALSE(simulate(spec, 1000, 43).data() == a.data());

    const auto big = simulate(spec, 100'000, 1);
    CHECK(big.data().minCoeff() > 0.0);
    CHECK(big.data().maxCoeff() < 1.0);
    const double crit = 1.628 / std::sqrt(100'000.0);  // alpha = 0.01
    for (int i = 0; i < 2; ++i) {
        std::vector<double> col(big.col(i).data(), big.col(i).data() + big.size());
        CHECK(ks_uniform(col) < crit);
    }
}

namespace {

// Mean of 20 batch taus of 1000 rows and its standard error.
std::pair<double, double> batch_tau(const UniformSample& s) {
    const int batches = 20, m = 1000;
    std::vector<double> taus;
    for (int k = 0; k < batches; ++k)
        taus.push_back(tau_naive(s.data().block(k * m, 0, m, 1), s.data().block(k * m, 1, m, 1)));
    double mean = 0.0, var = 0.0;
    for (double t : taus) mean += t / batches;
    for (double t : taus) var += (t - mean) * (t - mean) / (batches - 1);
    return {mean, std::sqrt(var / batches)};
}

}  // namespace

TEST_CASE("sample Kendall tau") {
    // elliptical case: tau = (2 / pi) asin(rho) exactly
    const auto [t_eq, se_eq] = batch_tau(simulate(CopulaSpec::bivariate(0.9, Dof(5), Dof(5)), 20'000, 3));
    CHECK(std::abs(t_eq - 2 / pi * std::asin(0.9)) < 3 * se_eq);
    // unequal dofs are not elliptical; the published tau-based estimate at (0.9, 2, 10) is rho = 0.885
    const auto [t_md, se_md] = batch_tau(simulate(CopulaSpec::bivariate(0.9, Dof(2), Dof(10)), 20'000, 3));
    CHECK(std::abs(t_md - 2 / pi * std::asin(0.885)) < 3 * se_md + 2 / pi * 0.0005 / std::sqrt(1 - 0.885 * 0.885));
    CHECK(t_md < 2 / pi * std::asin(0.9));
}

TEST_CASE("sampler agrees with the CDF on a 4x4 partition") {
    const long long k = 200'000;
    const auto sample = simulate(spec_728, k, 11);
    int counts[4][4] = {};
    for (Eigen::Index j = 0; j < sample.size(); ++j)
        ++counts[std::min(3, int(sample.data()(j, 0) * 4))][std::min(3, int(sample.data()(j, 1) * 4))];
    auto C = [](double u1, double u2) {
        if (u1 <= 0 || u2 <= 0) return 0.0;
        if (u1 >= 1) return std::min(u2, 1.0);
        if (u2 >= 1) return u1;
        return copula_cdf(spec_728, Eigen::Vector2d(u1, u2)).value;
    };
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double a1 = i / 4.0, b1 = (i + 1) / 4.0, a2 = j / 4.0, b2 = (j + 1) / 4.0;
            const double p = C(b1, b2) - C(a1, b2) - C(b1, a2) + C(a1, a2);
            const double se = std::sqrt(p * (1 - p) / k);
            CHECK(std::abs(counts[i][j] / double(k) - p) < 4 * se);
        }
}
