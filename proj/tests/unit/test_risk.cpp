#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcopula/calibrate/fit.hpp"
#include "tcopula/copula/simulate.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"
#include "tcopula/risk/risk.hpp"
#include "tcopula/taildep/taildep.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

using namespace tcopula;
using namespace tcopula::risk;
using copula::CopulaSpec;

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); }
double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_quantile(double p) {
    double lo = -40, hi = 40;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (Phi(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// t4 quantile in closed form.
double t4_quantile(double p) {
    const double a = 4 * p * (1 - p);
    const double qq = std::cos(std::acos(std::sqrt(a)) / 3) / std::sqrt(a);
    return (p < 0.5 ? -1 : 1) * 2 * std::sqrt(qq - 1);
}

const CopulaSpec truth = CopulaSpec::bivariate(0.9, Dof(2), Dof(10));

}  // namespace

TEST_CASE("margin models") {
    const auto n = MarginModel::standard_normal();
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999})
        CHECK(std::abs(n.quantile(p) - norm_quantile(p)) <= 1e-10 * (1 + std::abs(norm_quantile(p))));
    const auto t = MarginModel::student_t(Dof(4));
    CHECK(t.kind() == MarginModel::Kind::student_t);
    for (double p : {0.001, 0.2, 0.7, 0.995}) CHECK(t.quantile(p) == doctest::Approx(t4_quantile(p)).epsilon(1e-10));
    CHECK_THROWS_AS(MarginModel::student_t(Dof(-1)), DomainError);

    const auto e = MarginModel::empirical({4.0, 1.0, 3.0, 2.0});
    // plotting positions 0.2, 0.4, 0.6, 0.8
    CHECK(e.quantile(0.2) == doctest::Approx(1.0));
    CHECK(e.quantile(0.5) == doctest::Approx(2.5));
    CHECK(e.quantile(0.8) == doctest::Approx(4.0));
    bool clamped = false;
    CHECK(e.quantile(0.95, &clamped) == 4.0);
    CHECK(clamped);
    clamped = false;
    CHECK(e.quantile(0.05, &clamped) == 1.0);
    CHECK(clamped);
    CHECK_THROWS_AS(MarginModel::empirical({2.0, 2.0, 2.0}), DomainError);
    CHECK_THROWS_AS(e.quantile(1.0), DomainError);
}

TEST_CASE("var_es_from_returns") {
    std::vector<double> z(100);
    std::iota(z.begin(), z.end(), 1.0);
    const auto r = var_es_from_returns(z, 0.9);
    CHECK(r.var == 90.0);
    CHECK(r.es == doctest::Approx(95.5));
    CHECK(r.mc_n == 100);
    CHECK(r.var_stderr > 0.0);
    CHECK_THROWS_AS(var_es_from_returns({}, 0.9), DomainError);
    CHECK_THROWS_AS(var_es_from_returns(z, 1.0), DomainError);
}

TEST_CASE("var_es on a gaussian copula matches the normal closed form") {
    const double rho = 0.868;
    const auto spec = CopulaSpec::bivariate_gaussian(rho);
    const auto pf = Portfolio::long_short(MarginModel::standard_normal());
    const auto r = var_es(spec, pf, 0.99, 1000000, 5, 1);
    const double s = std::sqrt(2 - 2 * rho);
    const double z = norm_quantile(0.99);
    CHECK(z * s == doctest::Approx(1.195).epsilon(0.0005 / 1.195));
    CHECK(std::abs(r.var - z * s) < 4 * r.var_stderr);
    CHECK(std::abs(r.es - s * phi(z) / 0.01) < 4 * r.es_stderr);
    CHECK(r.es >= r.var);
    CHECK(r.mc_n == 1000000);
    CHECK(r.seed == 5);

    Portfolio one = pf;
    one.weights = Eigen::Vector2d(1.0, 0.0);
    const auto u = var_es(truth, one, 0.99, 1000000, 6, 1);
    CHECK(std::abs(u.var - 2.3263) < 4 * u.var_stderr);
}

TEST_CASE("var_es invariants") {
    const auto pf = Portfolio::long_short(MarginModel::standard_normal());
    const long long n = 200000;
    const auto r = var_es(truth, pf, 0.99, n, 9, 1);
    CHECK(r.es >= r.var);

    Portfolio scaled = pf;
    scaled.weights *= 2.5;
    const auto s = var_es(truth, scaled, 0.99, n, 9, 1);
    CHECK(s.var == doctest::Approx(2.5 * r.var).epsilon(1e-12));
    CHECK(s.es == doctest::Approx(2.5 * r.es).epsilon(1e-12));

    const auto lo = var_es(truth, pf, 0.01, n, 9, 1);
    CHECK(std::abs(r.var + lo.var) < 4 * std::hypot(r.var_stderr, lo.var_stderr));

    const auto t3 = var_es(truth, pf, 0.99, n, 9, 3);
    CHECK(t3.var == r.var);
    CHECK(t3.es == r.es);

    Portfolio bad = pf;
    bad.weights.setZero();
    CHECK_THROWS_AS(var_es(truth, bad, 0.99, n, 1, 1), DomainError);
    Portfolio short_pf = pf;
    short_pf.margins.pop_back();
    CHECK_THROWS_AS(var_es(truth, short_pf, 0.99, n, 1, 1), ShapeError);

    log::ScopedWarningCapture cap;
    Portfolio emp = pf;
    emp.margins = {MarginModel::empirical({-1.0, 0.0, 1.0}), MarginModel::empirical({-1.0, 0.0, 1.0})};
    const auto er = var_es(truth, emp, 0.99, 20000, 2, 1);
    CHECK(er.var <= 2.0);
    CHECK(cap.contains("clamp"));
}

TEST_CASE("model comparison at moderate K") {
    const auto models = fit_competing_models(truth, 5000, 21, 1, false);
    CHECK(models.k_fit == 5000);
    CHECK_FALSE(models.multidof.has_value());
    CHECK(models.gaussian.is_gaussian());
    CHECK(models.gaussian.rho() == doctest::Approx(0.868).epsilon(0.02));
    CHECK(models.standard_t.spec.rho() == doctest::Approx(0.885).epsilon(0.015));
    const double nu = models.standard_t.spec.dofs()[0].value();
    CHECK(nu > 4.0);
    CHECK(nu < 15.0);

    const auto pf = Portfolio::long_short(MarginModel::standard_normal());
    const auto table = compare_models(models, pf, 0.99, 100000, 4, 1);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].model == "true");
    CHECK(table.rows[1].model == "gaussian");
    CHECK(table.rows[2].model == "standard-t");
    CHECK(table.rows[0].var_rel_diff == 0.0);
    const auto& t = table.rows[2];
    CHECK(t.var_rel_diff == doctest::Approx((t.risk.var - table.rows[0].risk.var) / table.rows[0].risk.var));
    CHECK(t.es_rel_diff < 0.0);
    REQUIRE(t.lambda_L);
    REQUIRE(table.rows[0].lambda_L);
    CHECK(*table.rows[0].lambda_L == doctest::Approx(taildep::lambda_multidof(0.9, Dof(2), Dof(10))));
    CHECK(*t.lambda_L > 2 * *table.rows[0].lambda_L);
    CHECK(*table.rows[1].lambda_L == 0.0);
}

TEST_CASE("finite_sample_study") {
    const auto s = finite_sample_study(truth, 200, 4, calibrate::FitMethod::joint, 100, 1);
    CHECK(s.n_used + s.failures == 4);
    CHECK(s.estimates.rows() == 4);
    REQUIRE(s.params.size() == 3);
    CHECK(s.params[0].name == "A[1,0]");
    CHECK(s.params[1].truth == 2.0);
    for (std::size_t p = 0; p < 3; ++p) {
        double ms = 0;
        int used = 0;
        for (int i = 0; i < 4; ++i)
            if (s.used[i]) {
                ms += std::pow(s.estimates(i, static_cast<Eigen::Index>(p)) - s.params[p].truth, 2);
                ++used;
            }
        CHECK(s.params[p].rmse == doctest::Approx(std::sqrt(ms / used)).epsilon(1e-12));
        CHECK(s.params[p].rmse * s.params[p].rmse ==
              doctest::Approx(s.params[p].sd * s.params[p].sd + s.params[p].bias * s.params[p].bias));
    }
    // replicate i refits the sample drawn with seed 100 + i
    REQUIRE(s.used[2]);
    calibrate::FitOptions o;
    const auto direct = calibrate::fit_mle(copula::simulate(truth, 200, 102), o);
    CHECK(s.estimates(2, 0) == doctest::Approx(direct.spec.rho()).epsilon(1e-12));

    const auto t2 = finite_sample_study(truth, 200, 4, calibrate::FitMethod::joint, 100, 2);
    CHECK(t2.estimates(1, 2) == s.estimates(1, 2));
    CHECK_THROWS_AS(finite_sample_study(truth, 200, 0, calibrate::FitMethod::joint, 1, 1), DomainError);
}

TEST_CASE("paired_small_sample_study") {
    const auto pf = Portfolio::long_short(MarginModel::standard_normal());
    const auto s = paired_small_sample_study(truth, pf, 200, 3, 0.99, 20000, 7, 1);
    CHECK(s.n_used + s.failures == 3);
    CHECK(s.replicates.cols() == 6);
    CHECK(s.delta_var.mean == doctest::Approx(s.var_t.mean - s.var_multidof.mean).epsilon(1e-12));
    CHECK(s.delta_es.mean == doctest::Approx(s.es_t.mean - s.es_multidof.mean).epsilon(1e-12));
    CHECK(s.delta_var.sd.has_value());

    const auto one = paired_small_sample_study(truth, pf, 200, 1, 0.99, 20000, 7, 1);
    CHECK_FALSE(one.var_t.sd.has_value());
    CHECK(one.var_t.mean == s.replicates(0, 0));
    CHECK(one.delta_es.mean == s.replicates(0, 5));
}
