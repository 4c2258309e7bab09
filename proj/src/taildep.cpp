#include "tcopula/taildep/taildep.hpp"

#include "tcopula/copula/cdf.hpp"
#include "tcopula/copula/simulate.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"
#include "tcopula/numerics/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace tcopula::taildep {

namespace {

void check_rho(double rho, const char* where) {
    if (!(std::abs(rho) < 1.0))
        throw DegenerateCorrelationError(std::string(where) + ": |rho| must be < 1, got " + std::to_string(rho));
}

void check_bivariate(const copula::CopulaSpec& spec, const char* where) {
    if (spec.dim() != 2)
        throw ShapeError(std::string(where) + ": needs a bivariate spec, got dimension " + std::to_string(spec.dim()));
}

RatioEstimate ratio(long long a, long long b) {
    RatioEstimate r;
    r.numerator_count = a;
    r.denominator_count = b;
    if (b == 0) {
        r.infinite = true;
        r.value = std::numeric_limits<double>::infinity();
        r.mc_stderr = std::numeric_limits<double>::infinity();
        return r;
    }
    r.value = static_cast<double>(a) / static_cast<double>(b);
    r.mc_stderr = a == 0 ? 0.0 : r.value * std::sqrt(1.0 / static_cast<double>(a) + 1.0 / static_cast<double>(b));
    return r;
}

}  // namespace

double lambda_standard_t(double rho, Dof nu) {
    if (!(rho > -1.0 && rho <= 1.0))
        throw DegenerateCorrelationError("lambda_standard_t: rho must lie in (-1, 1], got " + std::to_string(rho));
    const double v = nu.value();
    const double arg = -std::sqrt((v + 1.0) * (1.0 - rho) / (1.0 + rho));
    return 2.0 * numerics::student_t_cdf(arg, Dof(v + 1.0));
}

double b_coefficient(Dof nu1, Dof nu2) {
    const double a = nu1.value();
    const double b = nu2.value();
    if (a == b) return 1.0;
    const double log_ratio = 0.5 * b * std::numbers::ln2 + std::lgamma(0.5 * (1.0 + b)) -
                             0.5 * a * std::numbers::ln2 - std::lgamma(0.5 * (1.0 + a));
    return std::exp(log_ratio / b);
}

double omega(double rho, Dof nu1, Dof nu2) {
    check_rho(rho, "omega");
    const double bcoef = b_coefficient(nu1, nu2);
    const double power = 0.5 * nu1.value() / nu2.value();
    const double scale = std::sqrt(1.0 - rho * rho);
    const Dof k(nu1.value() + 1.0);
    auto f = [&](double t) {
        if (t <= 0.0) return 0.0;
        const double arg = -(bcoef * std::pow(t, power) - rho * std::sqrt(t)) / scale;
        return numerics::chisq_pdf(t, k) * numerics::normal_cdf(arg);
    };
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-15;
    const double cut = numerics::chisq_quantile(1.0 - 1e-12, k);
    const double head = numerics::integrate(f, 0.0, cut, opts).value;
    const double tail = numerics::integrate(f, cut, std::numeric_limits<double>::infinity(), opts).value;
    return head + tail;
}

double lambda_multidof(double rho, Dof nu1, Dof nu2) {
    if (nu1 == nu2) return 2.0 * omega(rho, nu1, nu2);
    return omega(rho, nu1, nu2) + omega(rho, nu2, nu1);
}

double lambda_quadrant(double rho, Dof nu1, Dof nu2) { return lambda_multidof(-rho, nu1, nu2); }

TailDepReport tail_dependence(const copula::CopulaSpec& spec) {
    check_bivariate(spec, "tail_dependence");
    TailDepReport r;
    if (spec.is_gaussian()) return r;
    const double rho = spec.rho();
    const auto& d = spec.dofs();
    r.lambda_L = r.lambda_U = lambda_multidof(rho, d[0], d[1]);
    r.lambda_NW = r.lambda_SE = lambda_quadrant(rho, d[0], d[1]);
    return r;
}

TdcLimit numerical_tdc_limit(const copula::CopulaSpec& spec, const std::vector<double>& q_sequence) {
    check_bivariate(spec, "numerical_tdc_limit");
    if (q_sequence.empty()) throw DomainError("numerical_tdc_limit: empty q sequence");
    double previous = 1.0;
    for (double q : q_sequence) {
        if (!(q > 0.0 && q <= 0.1 && q < previous))
            throw DomainError("numerical_tdc_limit: q values must be decreasing within (0, 0.1]");
        previous = q;
    }
    TdcLimit out;
    copula::CdfOptions opts;
    opts.rel_tol = 1e-12;
    for (double q : q_sequence) {
        try {
            const double c = copula::copula_cdf(spec, Eigen::Vector2d(q, q), opts).value;
            out.q.push_back(q);
            out.ratio.push_back(c / q);
        } catch (const NumericalError& e) {
            log::warn(std::string("numerical_tdc_limit: dropping q = ") + std::to_string(q) + ": " + e.what());
            break;
        }
    }
    const std::size_t m = out.ratio.size();
    if (m == 0) throw QuadratureError("numerical_tdc_limit: no q value could be evaluated", 0.0, 0.0, 0);
    out.estimate = out.ratio.back();
    out.extrapolation = "none";
    if (m >= 3) {
        const double r0 = out.ratio[m - 3];
        const double r1 = out.ratio[m - 2];
        const double r2 = out.ratio[m - 1];
        const double d1 = r1 - r0;
        const double d2 = r2 - r1;
        const double denom = d2 - d1;
        if (d1 != 0.0 && d2 / d1 > 0.0 && d2 / d1 < 1.0 && denom != 0.0) {
            out.estimate = r2 - d2 * d2 / denom;
            out.extrapolation = "aitken";
            return out;
        }
    }
    if (m >= 2) {
        const double q1 = out.q[m - 2];
        const double q2 = out.q[m - 1];
        out.estimate = out.ratio[m - 1] - (out.ratio[m - 2] - out.ratio[m - 1]) * q2 / (q1 - q2);
        out.extrapolation = "linear";
    }
    return out;
}

AsymmetryReport asymmetry(const copula::CopulaSpec& spec, double q, long long mc_n, std::uint64_t seed,
                          unsigned threads) {
    check_bivariate(spec, "asymmetry");
    if (!(q > 0.5 && q < 1.0)) throw DomainError("asymmetry: q must lie in (0.5, 1), got " + std::to_string(q));
    if (mc_n < 1) throw DomainError("asymmetry: mc_n must be >= 1");
    if (mc_n < 100000) log::warn("asymmetry: mc_n below 1e5 gives noisy tail ratios");

    struct Counts {
        std::array<long long, 8> region{};
        long long upper_a = 0, upper_b = 0, lower_a = 0, lower_b = 0;
    };
    const copula::Sampler sampler(spec, seed);
    const auto chunks = static_cast<std::size_t>((mc_n + copula::Sampler::kChunkRows - 1) / copula::Sampler::kChunkRows);
    std::vector<Counts> per_chunk(chunks);
    const double lo = 1.0 - q;
    sampler.for_each_chunk(mc_n, threads, false, true,
                           [&](std::uint64_t c, Eigen::Index, const Eigen::MatrixXd&, const Eigen::MatrixXd& u) {
                               Counts k;
                               for (Eigen::Index j = 0; j < u.rows(); ++j) {
                                   const double u1 = u(j, 0);
                                   const double u2 = u(j, 1);
                                   const double sum = u1 + u2;
                                   int region;
                                   if (u2 > 0.5) {
                                       if (u1 < 0.5) region = sum < 1.0 ? 0 : 1;
                                       else region = u2 > u1 ? 2 : 3;
                                   } else {
                                       if (u1 > 0.5) region = sum > 1.0 ? 4 : 5;
                                       else region = u2 < u1 ? 6 : 7;
                                   }
                                   ++k.region[static_cast<std::size_t>(region)];
                                   if (u1 > q && u2 > u1) ++k.upper_a;
                                   if (u2 > q && u1 > u2) ++k.upper_b;
                                   if (u1 < lo && u2 < u1) ++k.lower_a;
                                   if (u2 < lo && u1 < u2) ++k.lower_b;
                               }
                               per_chunk[c] = k;
                           });
    Counts total;
    for (const Counts& k : per_chunk) {
        for (std::size_t i = 0; i < 8; ++i) total.region[i] += k.region[i];
        total.upper_a += k.upper_a;
        total.upper_b += k.upper_b;
        total.lower_a += k.lower_a;
        total.lower_b += k.lower_b;
    }
    AsymmetryReport r;
    r.q = q;
    r.mc_n = mc_n;
    r.seed = seed;
    const double n = static_cast<double>(mc_n);
    for (std::size_t i = 0; i < 8; ++i) {
        r.region_counts[i] = total.region[i];
        const double p = static_cast<double>(total.region[i]) / n;
        r.region_probs[i] = p;
        r.region_stderr[i] = std::sqrt(p * (1.0 - p) / n);
    }
    r.xi = ratio(total.upper_a, total.upper_b);
    r.eta = ratio(total.lower_a, total.lower_b);
    r.pr1_over_pr2 = ratio(total.region[0], total.region[1]);
    r.pr3_over_pr4 = ratio(total.region[2], total.region[3]);
    if (r.xi.infinite || r.eta.infinite)
        log::warn("asymmetry: a tail ratio has a zero denominator count; increase mc_n");
    return r;
}

}  // namespace tcopula::taildep
