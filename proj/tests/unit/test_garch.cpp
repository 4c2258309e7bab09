#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcopula/errors.hpp"
#include "tcopula/garch/garch.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace tcopula;
using namespace tcopula::garch;

namespace {

double ks_uniform(Eigen::VectorXd u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        d = std::max({d, (i + 1) / n - u(i), u(i) - i / n});
    return d;
}

// Gaussian quasi log-likelihood written out directly.
double loglik_oracle(const Eigen::VectorXd& x, double mu, double omega, double alpha, double beta, double s0sq) {
    const double log2pi = std::log(2 * 3.14159265358979323846);
    double s2 = omega + (alpha + beta) * s0sq, ll = 0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        if (t > 0) s2 = omega + alpha * std::pow(x(t - 1) - mu, 2) + beta * s2;
        ll += -0.5 * (log2pi + std::log(s2) + std::pow(x(t) - mu, 2) / s2);
    }
    return ll;
}

}  // namespace

TEST_CASE("simulate and refit") {
    const double omega = 1e-6, alpha = 0.08, beta = 0.90;
    const Eigen::VectorXd x = simulate_garch11(0.0, omega, alpha, beta, 4000, 42);
    CHECK(x.size() == 4000);
    CHECK(x == simulate_garch11(0.0, omega, alpha, beta, 4000, 42));
    const GarchFit f = fit_garch11(x);
    CHECK(f.converged);
    REQUIRE(f.std_errors);
    const Eigen::Vector4d se = *f.std_errors;
    CHECK(std::abs(f.mu - 0.0) < 3 * se(0));
    CHECK(std::abs(f.omega - omega) < 3 * se(1));
    CHECK(std::abs(f.alpha - alpha) < 3 * se(2));
    CHECK(std::abs(f.beta - beta) < 3 * se(3));
    CHECK(f.omega >= 0.0);
    CHECK(f.alpha + f.beta < 1.0);
    const double s0sq = f.sigma0 * f.sigma0;
    CHECK(f.loglik == doctest::Approx(loglik_oracle(x, f.mu, f.omega, f.alpha, f.beta, s0sq)).epsilon(1e-10));
    CHECK(garch11_loglik(x, f.mu, f.omega, f.alpha, f.beta, s0sq) == doctest::Approx(f.loglik).epsilon(1e-12));

    // constant-volatility submodel is never better
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    CHECK(f.loglik >= loglik_oracle(x, mean, var, 0.0, 0.0, s0sq) - 1e-6);
    CHECK(s0sq == doctest::Approx(var).epsilon(1e-3));

    const Eigen::VectorXd eps = filter_residuals(x, f);
    const GarchFit again = fit_garch11(eps);
    CHECK(again.alpha + again.beta < 0.2);

    // true parameters: residual variance near 1
    GarchFit tru;
    tru.omega = omega;
    tru.alpha = alpha;
    tru.beta = beta;
    tru.sigma0 = std::sqrt(omega / (1 - alpha - beta));
    const Eigen::VectorXd e0 = filter_residuals(x, tru);
    const double v0 = (e0.array() - e0.mean()).square().mean();
    CHECK(std::abs(v0 - 1.0) < 3 * std::sqrt(2.0 / 4000));
}

TEST_CASE("constant-volatility series") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01(0.3, 2.0);
    Eigen::VectorXd x(1500);
    for (auto& v : x) v = n01(rng);
    const GarchFit f = fit_garch11(x);
    CHECK(f.alpha == 0.0);
    CHECK(f.beta == 0.0);
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    CHECK(f.mu == doctest::Approx(mean).epsilon(1e-6));
    CHECK(f.omega == doctest::Approx(var).epsilon(1e-6));
    const Eigen::VectorXd eps = filter_residuals(x, f);
    const Eigen::VectorXd affine = (x.array() - f.mu) / std::sqrt(f.omega);
    CHECK((eps - affine).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(eps == filter_residuals(x, f));
}

TEST_CASE("stationary variance") {
    const double omega = 0.2, alpha = 0.1, beta = 0.5;
    const Eigen::VectorXd x = simulate_garch11(0.0, omega, alpha, beta, 100000, 3);
    // batch means for the standard error of the mean square
    const int batches = 100, len = 1000;
    Eigen::VectorXd m(batches);
    for (int b = 0; b < batches; ++b) m(b) = x.segment(b * len, len).array().square().mean();
    const double se = std::sqrt((m.array() - m.mean()).square().sum() / (batches - 1) / batches);
    CHECK(std::abs(m.mean() - omega / (1 - alpha - beta)) < 3 * se);
}

TEST_CASE("empirical_pit") {
    CHECK(empirical_pit(Eigen::Vector3d(3, 1, 2)) == Eigen::Vector3d(0.75, 0.25, 0.5));
    CHECK(empirical_pit(Eigen::Vector4d(1, 2, 2, 5)) == Eigen::Vector4d(0.2, 0.5, 0.5, 0.8));
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    Eigen::VectorXd r(10000);
    for (auto& v : r) v = n01(rng);
    const Eigen::VectorXd u = empirical_pit(r);
    CHECK(u.maxCoeff() == doctest::Approx(10000.0 / 10001.0));
    CHECK(u.minCoeff() > 0.0);
    CHECK(u.maxCoeff() < 1.0);
    CHECK(ks_uniform(u) < 1.628 / std::sqrt(10000.0));
    for (Eigen::Index i = 1; i < r.size(); ++i) CHECK((r(i) < r(0)) == (u(i) < u(0)));
    CHECK_THROWS_AS(empirical_pit(Eigen::VectorXd::Ones(1)), DomainError);
}

TEST_CASE("pipeline is scale free") {
    Eigen::MatrixXd panel(3000, 2);
    panel.col(0) = simulate_garch11(0.0, 2e-6, 0.07, 0.9, 3000, 10);
    panel.col(1) = simulate_garch11(1e-4, 1e-6, 0.05, 0.93, 3000, 11);
    const FilteredPanel a = filter_panel(panel, 1);
    const FilteredPanel b = filter_panel(panel * 37.0, 2);
    CHECK(a.pit == b.pit);
    CHECK(a.fits.size() == 2);
    CHECK(a.residuals.rows() == 3000);
    CHECK(a.pit.minCoeff() > 0.0);
    CHECK(a.pit.maxCoeff() < 1.0);
    const FilteredPanel c = filter_panel(panel, 2);
    CHECK(c.residuals == a.residuals);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(fit_garch11(Eigen::VectorXd::Constant(100, 0.01)), EstimationError);
    CHECK_THROWS_AS(fit_garch11(Eigen::VectorXd::Ones(20)), DomainError);
    Eigen::VectorXd bad = Eigen::VectorXd::LinSpaced(50, 0, 1);
    bad(7) = NAN;
    CHECK_THROWS_WITH_AS(validate_series(bad), doctest::Contains("t = 7"), DomainError);
    GarchFit tiny;
    tiny.beta = 1e-200;
    tiny.sigma0 = 1e-200;
    CHECK_THROWS_WITH_AS(filter_residuals(Eigen::VectorXd::Ones(5), tiny), doctest::Contains("t = 0"),
                         NumericalDegeneracyError);
    CHECK_THROWS_AS(simulate_garch11(0, 1e-6, 0.5, 0.5, 10, 1), DomainError);
}
