#include "tcopula/numerics/special.hpp"

#include "tcopula/detail/boost_policy.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tcopula::numerics {

using detail::MathPolicy;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": argument must be finite");
}

void require_open_unit(double u, const char* what) {
    if (!(u > 0.0 && u < 1.0))
        throw DomainError(std::string(what) + ": probability must lie in (0, 1), got " +
                          std::to_string(u));
}

}  // namespace

Dof::Dof(double value) : value_(value) {
    if (!std::isfinite(value) || !(value > 0.0))
        throw DomainError("degrees of freedom must be finite and > 0, got " +
                          std::to_string(value));
}

double normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double u) {
    require_open_unit(u, "normal_quantile");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u, MathPolicy());
}

double student_t_log_pdf(double x, Dof nu) {
    const double v = nu.value();
    return std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
           0.5 * std::log(v * std::numbers::pi) - 0.5 * (v + 1.0) * std::log1p(x * x / v);
}

double student_t_pdf(double x, Dof nu) { return std::exp(student_t_log_pdf(x, nu)); }

double student_t_cdf(double x, Dof nu) {
    require_finite(x, "student_t_cdf");
    const boost::math::students_t_distribution<double, MathPolicy> dist(nu.value());
    return boost::math::cdf(dist, x);
}

double student_t_quantile(double u, Dof nu) {
    require_open_unit(u, "student_t_quantile");
    const boost::math::students_t_distribution<double, MathPolicy> dist(nu.value());
    // Work from the nearer tail so that q(1 - u) == -q(u) holds exactly.
    if (u > 0.5) return -boost::math::quantile(dist, 1.0 - u);
    return boost::math::quantile(dist, u);
}

double chisq_pdf(double t, Dof nu) {
    if (!(t >= 0.0)) throw DomainError("chisq_pdf: argument must be >= 0");
    const double k = 0.5 * nu.value();
    if (t == 0.0) {
        if (k < 1.0) return kInf;
        return k == 1.0 ? 0.5 : 0.0;
    }
    if (std::isinf(t)) return 0.0;
    return std::exp(-0.5 * t + (k - 1.0) * std::log(t) - k * std::numbers::ln2 - std::lgamma(k));
}

double chisq_cdf(double t, Dof nu) {
    if (!(t >= 0.0)) throw DomainError("chisq_cdf: argument must be >= 0");
    if (std::isinf(t)) return 1.0;
    return boost::math::gamma_p(0.5 * nu.value(), 0.5 * t, MathPolicy());
}

double chisq_survival(double t, Dof nu) {
    if (!(t >= 0.0)) throw DomainError("chisq_survival: argument must be >= 0");
    if (std::isinf(t)) return 0.0;
    return boost::math::gamma_q(0.5 * nu.value(), 0.5 * t, MathPolicy());
}

double chisq_quantile(double s, Dof nu) {
    if (!(s >= 0.0 && s < 1.0))
        throw DomainError("chisq_quantile: probability must lie in [0, 1), got " +
                          std::to_string(s));
    if (s == 0.0) return 0.0;
    return 2.0 * boost::math::gamma_p_inv(0.5 * nu.value(), s, MathPolicy());
}

double chisq_quantile_upper(double tail, Dof nu) {
    if (!(tail > 0.0 && tail <= 1.0))
        throw DomainError("chisq_quantile_upper: tail probability must lie in (0, 1]");
    if (tail == 1.0) return 0.0;
    return 2.0 * boost::math::gamma_q_inv(0.5 * nu.value(), tail, MathPolicy());
}

double w_mixing(double s, Dof nu) {
    require_open_unit(s, "w_mixing");
    const double q = s > 0.5 ? chisq_quantile_upper(1.0 - s, nu) : chisq_quantile(s, nu);
    if (!(q > 0.0)) throw DomainError("w_mixing: chi-square quantile underflows to zero");
    return std::sqrt(nu.value() / q);
}

namespace {

// Genz's BVND: P(X > h, Y > k) for a standard bivariate normal with correlation r.
// Drezner & Wesolowsky (1990) with Genz's refinements; absolute accuracy ~1e-15.
template <int Points>
double gauss_sum_orthant(double h, double k, double r) {
    using Rule = boost::math::quadrature::gauss<double, Points>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    const double hk = h * k;
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int mult = (x[i] == 0.0) ? 1 : 2;
        for (int sign = -1; sign <= 1; sign += 2) {
            if (mult == 1 && sign == 1) continue;
            const double sn = std::sin(asr * (sign * x[i] + 1.0) / 2.0);
            sum += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
    }
    return sum * asr / (4.0 * std::numbers::pi) + normal_cdf(-h) * normal_cdf(-k);
}

double bvnd(double h, double k, double r) {
    const double ar = std::abs(r);
    if (ar < 0.3) return gauss_sum_orthant<6>(h, k, r);
    if (ar < 0.75) return gauss_sum_orthant<12>(h, k, r);
    if (ar < 0.925) return gauss_sum_orthant<20>(h, k, r);

    using Rule = boost::math::quadrature::gauss<double, 20>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    const double two_pi = 2.0 * std::numbers::pi;

    if (r < 0.0) k = -k;
    double hk = h * k;
    double bvn = 0.0;
    if (ar < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        double asr = -(bs / as + hk) / 2.0;
        if (asr > -100.0)
            bvn = a * std::exp(asr) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (-hk < 100.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * normal_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const double xs = std::pow(a * (sign * x[i] + 1.0), 2);
                const double rs = std::sqrt(1.0 - xs);
                asr = -(bs / xs + hk) / 2.0;
                if (asr > -100.0)
                    bvn += a * w[i] * std::exp(asr) *
                           (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                            (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / two_pi;
    }
    if (r > 0.0) return bvn + normal_cdf(-std::max(h, k));
    bvn = -bvn;
    if (k > h) {
        if (h < 0.0)
            bvn += normal_cdf(k) - normal_cdf(h);
        else
            bvn += normal_cdf(-h) - normal_cdf(-k);
    }
    return bvn;
}

}  // namespace

double bvn_cdf(double a, double b, double rho) {
    if (std::isnan(a) || std::isnan(b) || std::isnan(rho))
        throw DomainError("bvn_cdf: NaN argument");
    if (!(std::abs(rho) < 1.0))
        throw DegenerateCorrelationError("bvn_cdf: |rho| must be < 1, got " +
                                         std::to_string(rho));
    constexpr double kMaxAbsRho = 1.0 - 1e-12;
    if (std::abs(rho) > kMaxAbsRho) {
        log::warn("bvn_cdf: correlation " + std::to_string(rho) + " clamped to +/-(1 - 1e-12)");
        rho = std::copysign(kMaxAbsRho, rho);
    }
    if (a == -kInf || b == -kInf) return 0.0;
    if (a == kInf) return b == kInf ? 1.0 : normal_cdf(b);
    if (b == kInf) return normal_cdf(a);
    const double p = bvnd(-a, -b, rho);
    return std::clamp(p, 0.0, 1.0);
}

double mvn_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::MatrixXd>& chol) {
    if (chol.rows() != chol.cols() || chol.rows() != z.size())
        throw ShapeError("mvn_pdf: factor is " + std::to_string(chol.rows()) + "x" +
                         std::to_string(chol.cols()) + " but point has dimension " +
                         std::to_string(z.size()));
    const Eigen::VectorXd y = chol.triangularView<Eigen::Lower>().solve(z);
    const double log_det = 2.0 * chol.diagonal().array().log().sum();
    const double n = static_cast<double>(z.size());
    return -0.5 * y.squaredNorm() - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double mvn_pdf(const Eigen::Ref<const Eigen::VectorXd>& z,
               const Eigen::Ref<const Eigen::MatrixXd>& chol) {
    return std::exp(mvn_log_pdf(z, chol));
}

}  // namespace tcopula::numerics
