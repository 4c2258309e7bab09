#include "tcopula/copula/density.hpp"

#include "tcopula/detail/boost_policy.hpp"
#include "tcopula/detail/parallel.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

namespace tcopula::copula {

namespace detail {

// Tanh-sinh abscissae for integrals over s in (0, 1):
//   s(t) = 1 / (1 + exp(-pi sinh t)),  ds/dt = pi cosh t s (1 - s),
// with t restricted to [-4.5, 4.5] (s down to ~1e-61 at either end). Level 0 uses unit
// spacing; level L adds the midpoints at spacing 2^-L.
class MixingTable {
public:
    static constexpr int kMaxLevels = 16;
    static constexpr double kTMax = 4.5;

    struct Level {
        std::vector<double> base;   // log(ds/dt) + sum_k log r_k(s), r_k = sqrt(y_k / nu_k)
        std::vector<double> pairs;  // r_k r_l for k <= l, node-major
    };

    explicit MixingTable(const std::vector<Dof>& dofs) : dim_(static_cast<int>(dofs.size())) {
        for (const Dof& d : dofs) {
            int idx = -1;
            for (std::size_t j = 0; j < distinct_.size(); ++j)
                if (distinct_[j] == d.value()) idx = static_cast<int>(j);
            if (idx < 0) {
                idx = static_cast<int>(distinct_.size());
                distinct_.push_back(d.value());
            }
            coord_dof_.push_back(idx);
        }
        pairs_ = dim_ * (dim_ + 1) / 2;
    }

    int pair_count() const noexcept { return pairs_; }

    const Level& level(int l) const {
        std::call_once(once_[static_cast<std::size_t>(l)], [&] { build(l); });
        return *levels_[static_cast<std::size_t>(l)];
    }

private:
    static double softplus(double a) { return a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

    void build(int l) const {
        auto lev = std::make_unique<Level>();
        const double h = std::ldexp(1.0, -l);
        std::vector<double> ts;
        if (l == 0) {
            for (int k = -4; k <= 4; ++k) ts.push_back(k);
        } else {
            const int kmax = static_cast<int>(std::floor((kTMax / h - 1.0) / 2.0));
            for (int k = -kmax - 1; k <= kmax; ++k) ts.push_back((2 * k + 1) * h);
        }
        lev->base.reserve(ts.size());
        lev->pairs.reserve(ts.size() * static_cast<std::size_t>(pairs_));
        std::vector<double> log_r(distinct_.size());
        std::vector<double> r(static_cast<std::size_t>(dim_));
        for (double t : ts) {
            const double a = std::numbers::pi * std::sinh(t);
            const double log_s = -softplus(-a);
            const double log_sc = -softplus(a);
            const double s = std::exp(log_s);
            const double sc = std::exp(log_sc);
            const double log_w = std::log(std::numbers::pi * std::cosh(t)) + log_s + log_sc;
            for (std::size_t d = 0; d < distinct_.size(); ++d) {
                const double half = 0.5 * distinct_[d];
                const double y = s <= 0.5
                                     ? 2.0 * boost::math::gamma_p_inv(half, s, tcopula::detail::MathPolicy())
                                     : 2.0 * boost::math::gamma_q_inv(half, sc, tcopula::detail::MathPolicy());
                log_r[d] = (y > 0.0 && std::isfinite(y))
                               ? 0.5 * (std::log(y) - std::log(distinct_[d]))
                               : -std::numeric_limits<double>::infinity();
            }
            double base = log_w;
            for (int k = 0; k < dim_; ++k) {
                const double lr = log_r[static_cast<std::size_t>(coord_dof_[static_cast<std::size_t>(k)])];
                base += lr;
                r[static_cast<std::size_t>(k)] = std::exp(lr);
            }
            lev->base.push_back(std::isnan(base) ? -std::numeric_limits<double>::infinity() : base);
            for (int k = 0; k < dim_; ++k)
                for (int m = k; m < dim_; ++m)
                    lev->pairs.push_back(r[static_cast<std::size_t>(k)] * r[static_cast<std::size_t>(m)]);
        }
        levels_[static_cast<std::size_t>(l)] = std::move(lev);
    }

    int dim_;
    int pairs_ = 0;
    std::vector<double> distinct_;
    std::vector<int> coord_dof_;
    mutable std::array<std::once_flag, kMaxLevels> once_;
    mutable std::array<std::unique_ptr<Level>, kMaxLevels> levels_;
};

}  // namespace detail

double clamp_interior(double u) {
    constexpr double kEdge = 1e-12;
    if (!(u > 0.0 && u < 1.0))
        throw DomainError("copula evaluation point " + std::to_string(u) +
                          " is not strictly inside (0, 1)");
    if (u < kEdge || u > 1.0 - kEdge) {
        const double clamped = u < kEdge ? kEdge : 1.0 - kEdge;
        std::ostringstream msg;
        msg.precision(17);
        msg << "copula coordinate " << u << " clamped to " << clamped;
        log::warn(msg.str());
        return clamped;
    }
    return u;
}

DensityEvaluator::DensityEvaluator(const CopulaSpec& spec, const DensityOptions& options)
    : spec_(spec), options_(options) {
    if (options.min_level < 1 || options.max_level < options.min_level ||
        options.max_level >= detail::MixingTable::kMaxLevels)
        throw DomainError("density options: need 1 <= min_level <= max_level < 16");
    if (!(options.rel_tol > 0.0)) throw DomainError("density options: rel_tol must be > 0");
    const Eigen::MatrixXd& a = spec.chol();
    const Eigen::MatrixXd a_inv =
        a.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    precision_ = a_inv.transpose() * a_inv;
    log_det_ = 2.0 * a.diagonal().array().log().sum();
    if (!spec.is_gaussian()) table_ = std::make_shared<detail::MixingTable>(spec.dofs());
}

double DensityEvaluator::log_pdf_gaussian(const Eigen::VectorXd& u) const {
    Eigen::VectorXd z(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) z(i) = numerics::normal_quantile(u(i));
    const double quad = z.dot(precision_ * z) - z.squaredNorm();
    return -0.5 * quad - 0.5 * log_det_;
}

double DensityEvaluator::log_mixing_integral(const double* coef, const Eigen::VectorXd& u) const {
    const int npairs = table_->pair_count();
    constexpr double kSkip = 40.0;
    double m = -std::numeric_limits<double>::infinity();
    double scaled_sum = 0.0;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int l = 0; l <= options_.max_level; ++l) {
        const auto& lev = table_->level(l);
        const std::size_t count = lev.base.size();
        const double* pairs = lev.pairs.data();
        for (std::size_t j = 0; j < count; ++j, pairs += npairs) {
            const double b = lev.base[j];
            if (b < m - kSkip) continue;
            double q = 0.0;
            for (int p = 0; p < npairs; ++p) q += coef[p] * pairs[p];
            const double term = b - 0.5 * q;
            if (!(term > -std::numeric_limits<double>::infinity())) continue;
            if (term > m) {
                scaled_sum = scaled_sum * std::exp(m - term) + 1.0;
                m = term;
            } else {
                scaled_sum += std::exp(term - m);
            }
        }
        const double log_integral = m + std::log(scaled_sum) -
                                    static_cast<double>(l) * std::numbers::ln2;
        if (l >= options_.min_level && std::abs(log_integral - previous) <= options_.rel_tol)
            return log_integral;
        previous = log_integral;
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "copula density: mixing integral did not converge at u = (";
    for (Eigen::Index i = 0; i < u.size(); ++i) msg << (i ? ", " : "") << u(i);
    msg << ")";
    throw QuadratureError(msg.str(), std::exp(previous), std::numeric_limits<double>::infinity(), 0);
}

double DensityEvaluator::log_pdf(const Eigen::Ref<const Eigen::VectorXd>& u_in) const {
    const int n = spec_.dim();
    if (u_in.size() != n)
        throw ShapeError("copula density: point has dimension " + std::to_string(u_in.size()) +
                         ", copula has " + std::to_string(n));
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = clamp_interior(u_in(i));
    if (spec_.is_gaussian()) return log_pdf_gaussian(u);

    const auto& dofs = spec_.dofs();
    Eigen::VectorXd x(n);
    double log_margins = 0.0;
    for (int i = 0; i < n; ++i) {
        x(i) = numerics::student_t_quantile(u(i), dofs[static_cast<std::size_t>(i)]);
        log_margins += numerics::student_t_log_pdf(x(i), dofs[static_cast<std::size_t>(i)]);
    }
    std::array<double, 64> small{};
    std::vector<double> large;
    double* coef = small.data();
    const int npairs = n * (n + 1) / 2;
    if (npairs > static_cast<int>(small.size())) {
        large.resize(static_cast<std::size_t>(npairs));
        coef = large.data();
    }
    int p = 0;
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l)
            coef[p++] = (k == l ? 1.0 : 2.0) * precision_(k, l) * x(k) * x(l);

    const double log_norm =
        -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_;
    return log_mixing_integral(coef, u) + log_norm - log_margins;
}

double DensityEvaluator::pdf(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    return std::exp(log_pdf(u));
}

double copula_log_pdf(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u,
                      const DensityOptions& options) {
    return DensityEvaluator(spec, options).log_pdf(u);
}

double copula_pdf(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u,
                  const DensityOptions& options) {
    return std::exp(copula_log_pdf(spec, u, options));
}

Eigen::VectorXd log_density_terms(const CopulaSpec& spec, const UniformSample& sample,
                                  const LikelihoodOptions& options) {
    if (sample.dim() != spec.dim())
        throw ShapeError("log_likelihood: sample has " + std::to_string(sample.dim()) +
                         " columns, copula has dimension " + std::to_string(spec.dim()));
    const DensityEvaluator eval(spec, options.density);
    const Eigen::Index k = sample.size();
    Eigen::VectorXd terms(k);
    constexpr Eigen::Index kChunk = 64;
    const auto chunks = static_cast<std::size_t>((k + kChunk - 1) / kChunk);
    tcopula::detail::parallel_for(chunks, options.threads, [&](std::size_t c) {
        const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
        const Eigen::Index end = std::min(k, begin + kChunk);
        for (Eigen::Index j = begin; j < end; ++j) {
            try {
                terms(j) = eval.log_pdf(sample.row(j).transpose());
            } catch (const QuadratureError& e) {
                throw QuadratureError("observation row " + std::to_string(j) + ": " + e.what(),
                                      e.best_estimate(), e.abs_error_estimate(), e.evaluations());
            }
        }
    });
    return terms;
}

double log_likelihood(const CopulaSpec& spec, const UniformSample& sample,
                      const LikelihoodOptions& options) {
    const Eigen::VectorXd terms = log_density_terms(spec, sample, options);
    return tcopula::detail::pairwise_sum(terms.data(), terms.data() + terms.size());
}

}  // namespace tcopula::copula
