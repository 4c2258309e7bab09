#include "tcopula/copula/simulate.hpp"

#include "tcopula/detail/boost_policy.hpp"
#include "tcopula/detail/parallel.hpp"
#include "tcopula/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace tcopula::copula {

namespace {

double open_uniform(boost::random::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

double chisq_inverse(double s, double nu) {
    const double half = 0.5 * nu;
    return s <= 0.5 ? 2.0 * boost::math::gamma_p_inv(half, s, tcopula::detail::MathPolicy())
                    : 2.0 * boost::math::gamma_q_inv(half, 1.0 - s, tcopula::detail::MathPolicy());
}

double interior(double u) {
    constexpr double kLow = std::numeric_limits<double>::min();
    constexpr double kHigh = 1.0 - 0x1.0p-53;
    return u < kLow ? kLow : (u > kHigh ? kHigh : u);
}

}  // namespace

Sampler::Sampler(CopulaSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    if (spec_.is_gaussian()) return;
    for (const Dof& d : spec_.dofs()) {
        int idx = -1;
        for (std::size_t j = 0; j < distinct_dofs_.size(); ++j)
            if (distinct_dofs_[j] == d.value()) idx = static_cast<int>(j);
        if (idx < 0) {
            idx = static_cast<int>(distinct_dofs_.size());
            distinct_dofs_.push_back(d.value());
        }
        coord_dof_.push_back(idx);
    }
}

void Sampler::draw_chunk(std::uint64_t chunk, Eigen::Index rows, Eigen::MatrixXd* x,
                         Eigen::MatrixXd* u) const {
    const int n = spec_.dim();
    boost::random::mt19937_64 gen(tcopula::detail::derive_seed(seed_, chunk));
    boost::random::normal_distribution<double> normal;
    const Eigen::MatrixXd& a = spec_.chol();
    if (x) x->resize(rows, n);
    if (u) u->resize(rows, n);
    Eigen::VectorXd eps(n);
    Eigen::VectorXd z(n);
    std::vector<double> scale(distinct_dofs_.size());
    for (Eigen::Index j = 0; j < rows; ++j) {
        for (int i = 0; i < n; ++i) eps(i) = normal(gen);
        z.noalias() = a.triangularView<Eigen::Lower>() * eps;
        if (spec_.is_gaussian()) {
            for (int i = 0; i < n; ++i) {
                if (x) (*x)(j, i) = z(i);
                if (u) (*u)(j, i) = interior(numerics::normal_cdf(z(i)));
            }
            continue;
        }
        const double s = open_uniform(gen);
        for (std::size_t d = 0; d < distinct_dofs_.size(); ++d)
            scale[d] = std::sqrt(distinct_dofs_[d] / chisq_inverse(s, distinct_dofs_[d]));
        for (int i = 0; i < n; ++i) {
            const auto d = static_cast<std::size_t>(coord_dof_[static_cast<std::size_t>(i)]);
            const double xi = z(i) * scale[d];
            if (x) (*x)(j, i) = xi;
            if (u) {
                double ui;
                if (std::isfinite(xi))
                    ui = numerics::student_t_cdf(xi, Dof(distinct_dofs_[d]));
                else
                    ui = xi > 0 ? 1.0 : 0.0;
                (*u)(j, i) = interior(ui);
            }
        }
    }
}

void Sampler::for_each_chunk(Eigen::Index k, unsigned threads, bool want_x, bool want_u,
                             const ChunkVisitor& visit) const {
    if (k < 1) throw DomainError("simulate: sample size must be >= 1, got " + std::to_string(k));
    const auto chunks = static_cast<std::size_t>((k + kChunkRows - 1) / kChunkRows);
    tcopula::detail::parallel_for(chunks, threads, [&](std::size_t c) {
        const Eigen::Index first = static_cast<Eigen::Index>(c) * kChunkRows;
        const Eigen::Index rows = std::min(kChunkRows, k - first);
        Eigen::MatrixXd x;
        Eigen::MatrixXd u;
        draw_chunk(c, rows, want_x ? &x : nullptr, want_u ? &u : nullptr);
        visit(c, first, x, u);
    });
}

UniformSample simulate(const CopulaSpec& spec, Eigen::Index k, std::uint64_t seed, unsigned threads) {
    Eigen::MatrixXd out(k, spec.dim());
    Sampler(spec, seed).for_each_chunk(
        k, threads, false, true,
        [&](std::uint64_t, Eigen::Index first, const Eigen::MatrixXd&, const Eigen::MatrixXd& u) {
            out.middleRows(first, u.rows()) = u;
        });
    return UniformSample(std::move(out));
}

Eigen::MatrixXd simulate_latent(const CopulaSpec& spec, Eigen::Index k, std::uint64_t seed,
                                unsigned threads) {
    Eigen::MatrixXd out(k, spec.dim());
    Sampler(spec, seed).for_each_chunk(
        k, threads, true, false,
        [&](std::uint64_t, Eigen::Index first, const Eigen::MatrixXd& x, const Eigen::MatrixXd&) {
            out.middleRows(first, x.rows()) = x;
        });
    return out;
}

}  // namespace tcopula::copula
