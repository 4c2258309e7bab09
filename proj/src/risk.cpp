#include "tcopula/risk/risk.hpp"

#include "tcopula/calibrate/kendall.hpp"
#include "tcopula/copula/simulate.hpp"
#include "tcopula/detail/parallel.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"
#include "tcopula/taildep/taildep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

namespace tcopula::risk {

using copula::CopulaSpec;
using calibrate::FitMethod;
using calibrate::FitOptions;
using calibrate::Family;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Moment moment(const std::vector<double>& v) {
    Moment m;
    if (v.empty()) {
        m.mean = kNaN;
        return m;
    }
    m.mean = tcopula::detail::pairwise_sum(v.begin(), v.end()) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

void check_portfolio(const Portfolio& p, int dim) {
    if (p.weights.size() != dim || static_cast<int>(p.margins.size()) != dim)
        throw ShapeError("portfolio: weights and margins must both have length " + std::to_string(dim));
    if ((p.weights.array() == 0.0).all()) throw DomainError("portfolio: at least one weight must be nonzero");
    if (!p.weights.allFinite()) throw DomainError("portfolio: weights must be finite");
}

}  // namespace

MarginModel MarginModel::standard_normal() { return {Kind::standard_normal, std::nullopt, {}}; }

MarginModel MarginModel::student_t(Dof nu) { return {Kind::student_t, nu, {}}; }

MarginModel MarginModel::empirical(std::vector<double> data) {
    for (double x : data)
        if (!std::isfinite(x)) throw DomainError("empirical margin: data must be finite");
    std::sort(data.begin(), data.end());
    if (data.size() < 2 || data.front() == data.back())
        throw DomainError("empirical margin: needs at least two distinct data points");
    return {Kind::empirical, std::nullopt, std::move(data)};
}

double MarginModel::quantile(double u, bool* clamped) const {
    switch (kind_) {
        case Kind::standard_normal: return numerics::normal_quantile(u);
        case Kind::student_t: return numerics::student_t_quantile(u, *nu_);
        case Kind::empirical: break;
    }
    if (!(u > 0.0 && u < 1.0)) throw DomainError("empirical margin: u must lie in (0, 1)");
    const double m = static_cast<double>(sorted_.size());
    const double pos = u * (m + 1.0) - 1.0;
    if (pos <= 0.0 || pos >= m - 1.0) {
        if (clamped && (pos < 0.0 || pos > m - 1.0)) *clamped = true;
        return pos <= 0.0 ? sorted_.front() : sorted_.back();
    }
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return sorted_[i] + frac * (sorted_[i + 1] - sorted_[i]);
}

std::string MarginModel::describe() const {
    switch (kind_) {
        case Kind::standard_normal: return "standard-normal";
        case Kind::student_t: {
            std::ostringstream s;
            s << "student-t(" << nu_->value() << ")";
            return s.str();
        }
        case Kind::empirical: return "empirical(" + std::to_string(sorted_.size()) + ")";
    }
    return "?";
}

Portfolio Portfolio::long_short(const MarginModel& margin) {
    Portfolio p;
    p.weights = Eigen::Vector2d(1.0, -1.0);
    p.margins = {margin, margin};
    return p;
}

RiskReport var_es_from_returns(std::vector<double> z, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("var_es: q must lie in (0, 1)");
    const auto n = static_cast<long long>(z.size());
    if (n < 1) throw DomainError("var_es: no returns");
    RiskReport r;
    r.q = q;
    r.mc_n = n;
    const long long k = std::clamp(static_cast<long long>(std::ceil(q * static_cast<double>(n))), 1LL, n);
    auto at = [&](long long i) { return z.begin() + static_cast<std::ptrdiff_t>(i); };
    std::nth_element(z.begin(), at(k - 1), z.end());
    r.var = z[static_cast<std::size_t>(k - 1)];
    const long long tail = n - k;
    if (tail > 0) {
        r.es = tcopula::detail::pairwise_sum(at(k), z.end()) / static_cast<double>(tail);
        double ss = 0.0;
        for (auto it = at(k); it != z.end(); ++it) ss += (*it - r.es) * (*it - r.es);
        const double tail_var = tail > 1 ? ss / static_cast<double>(tail - 1) : 0.0;
        r.es_stderr = std::sqrt((tail_var + q * (r.es - r.var) * (r.es - r.var)) /
                                (static_cast<double>(n) * (1.0 - q)));
    } else {
        r.es = r.var;
    }
    const auto m = static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(n) * q * (1.0 - q))));
    const long long hi = std::min(n - 1, k - 1 + m);
    const long long lo = std::max(0LL, k - 1 - m);
    double z_hi = r.var;
    double z_lo = r.var;
    if (hi > k - 1) {
        std::nth_element(at(k), at(hi), z.end());
        z_hi = z[static_cast<std::size_t>(hi)];
    }
    if (lo < k - 1) {
        std::nth_element(z.begin(), at(lo), at(k - 1));
        z_lo = z[static_cast<std::size_t>(lo)];
    }
    r.var_stderr = 0.5 * (z_hi - z_lo);
    return r;
}

RiskReport var_es(const CopulaSpec& spec, const Portfolio& portfolio, double q, long long mc_n, std::uint64_t seed,
                  unsigned threads) {
    const int n = spec.dim();
    check_portfolio(portfolio, n);
    if (!(q > 0.0 && q < 1.0)) throw DomainError("var_es: q must lie in (0, 1), got " + std::to_string(q));
    if (mc_n < 1) throw DomainError("var_es: mc_n must be >= 1");
    if (mc_n < 10000) log::warn("var_es: mc_n below 1e4 gives a noisy tail estimate");

    std::vector<double> z(static_cast<std::size_t>(mc_n));
    std::atomic<long long> clamps{0};
    copula::Sampler(spec, seed).for_each_chunk(
        mc_n, threads, false, true,
        [&](std::uint64_t, Eigen::Index first, const Eigen::MatrixXd&, const Eigen::MatrixXd& u) {
            long long local = 0;
            for (Eigen::Index j = 0; j < u.rows(); ++j) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double w = portfolio.weights(i);
                    if (w == 0.0) continue;
                    bool clamped = false;
                    sum += w * portfolio.margins[static_cast<std::size_t>(i)].quantile(u(j, i), &clamped);
                    local += clamped ? 1 : 0;
                }
                z[static_cast<std::size_t>(first + j)] = sum;
            }
            clamps += local;
        });
    if (clamps > 0)
        log::warn("var_es: " + std::to_string(clamps.load()) +
                  " draws fell outside the empirical margin range and were clamped to the extremes");
    RiskReport r = var_es_from_returns(std::move(z), q);
    r.seed = seed;
    return r;
}

CompetingModels fit_competing_models(const CopulaSpec& truth, Eigen::Index k_fit, std::uint64_t seed,
                                     unsigned threads, bool fit_multidof) {
    const copula::UniformSample sample = copula::simulate(truth, k_fit, seed, threads);
    const int n = truth.dim();

    Eigen::MatrixXd scores(k_fit, n);
    for (Eigen::Index j = 0; j < k_fit; ++j)
        for (int i = 0; i < n; ++i) scores(j, i) = numerics::normal_quantile(sample.data()(j, i));
    const Eigen::MatrixXd centered = scores.rowwise() - scores.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
    corr = 0.5 * (corr + corr.transpose());
    corr.diagonal().setOnes();

    FitOptions t_opts;
    t_opts.family = Family::standard_t;
    t_opts.method = FitMethod::tau_then_dof;
    t_opts.likelihood.threads = threads;
    calibrate::FitResult t_fit = calibrate::fit_mle(sample, t_opts);

    std::optional<calibrate::FitResult> md;
    if (fit_multidof) {
        FitOptions m_opts;
        m_opts.family = Family::multidof_t;
        m_opts.method = FitMethod::joint;
        m_opts.likelihood.threads = threads;
        md = calibrate::fit_mle(sample, m_opts);
    }
    return {truth, CopulaSpec::gaussian(calibrate::repair_correlation(corr)), std::move(t_fit), std::move(md),
            k_fit, seed};
}

ModelRiskTable compare_models(const CompetingModels& models, const Portfolio& portfolio, double q, long long mc_n,
                              std::uint64_t seed, unsigned threads) {
    ModelRiskTable table;
    table.q = q;
    table.mc_n = mc_n;
    auto add = [&](const std::string& name, const CopulaSpec& spec) {
        ModelRow row{name, spec, var_es(spec, portfolio, q, mc_n, seed, threads), 0.0, 0.0, std::nullopt};
        if (spec.dim() == 2) row.lambda_L = taildep::tail_dependence(spec).lambda_L;
        table.rows.push_back(std::move(row));
    };
    add("true", models.truth);
    add("gaussian", models.gaussian);
    add("standard-t", models.standard_t.spec);
    if (models.multidof) add("multidof-t", models.multidof->spec);
    const RiskReport& ref = table.rows.front().risk;
    for (ModelRow& row : table.rows) {
        row.var_rel_diff = (row.risk.var - ref.var) / ref.var;
        row.es_rel_diff = (row.risk.es - ref.es) / ref.es;
    }
    return table;
}

ModelRiskTable model_risk_study(const CopulaSpec& truth, const Portfolio& portfolio, Eigen::Index k_fit, double q,
                                long long mc_n, std::uint64_t seed, unsigned threads, bool fit_multidof) {
    const CompetingModels models = fit_competing_models(truth, k_fit, seed, threads, fit_multidof);
    return compare_models(models, portfolio, q, mc_n, tcopula::detail::derive_seed(seed, 1), threads);
}

StudySummary finite_sample_study(const CopulaSpec& truth, Eigen::Index k, long long n_replicates, FitMethod method,
                                 std::uint64_t seed, unsigned threads) {
    if (n_replicates < 1) throw DomainError("finite_sample_study: need at least one replicate");
    if (truth.is_gaussian()) throw DomainError("finite_sample_study: the true spec must be a t copula");
    const Family family = Family::multidof_t;
    const Eigen::VectorXd theta = calibrate::natural_parameters(truth, family);
    const Eigen::Index m = theta.size();

    StudySummary s;
    s.k = k;
    s.n_requested = n_replicates;
    s.method = method;
    s.seed = seed;
    s.estimates = Eigen::MatrixXd::Constant(n_replicates, m, kNaN);
    Eigen::MatrixXd var_mle = Eigen::MatrixXd::Constant(n_replicates, m, kNaN);
    std::vector<char> used(static_cast<std::size_t>(n_replicates), 0);

    tcopula::detail::parallel_for(static_cast<std::size_t>(n_replicates), threads, [&](std::size_t i) {
        try {
            const auto sample = copula::simulate(truth, k, seed + i);
            FitOptions opts;
            opts.family = family;
            opts.method = method;
            const calibrate::FitResult fit = calibrate::fit_mle(sample, opts);
            if (!fit.converged) return;
            const auto ii = static_cast<Eigen::Index>(i);
            s.estimates.row(ii) = calibrate::natural_parameters(fit.spec, family).transpose();
            if (fit.std_errors) var_mle.row(ii) = fit.std_errors->array().square().transpose().matrix();
            used[i] = 1;
        } catch (const Error& e) {
            log::warn("finite_sample_study: replicate " + std::to_string(i) + " failed: " + e.what());
        }
    });

    s.used.assign(used.begin(), used.end());
    const auto names = calibrate::parameter_names(truth.dim(), family, {});
    for (Eigen::Index p = 0; p < m; ++p) {
        std::vector<double> values;
        std::vector<double> vars;
        for (long long i = 0; i < n_replicates; ++i) {
            if (!used[static_cast<std::size_t>(i)]) continue;
            values.push_back(s.estimates(i, p));
            if (std::isfinite(var_mle(i, p))) vars.push_back(var_mle(i, p));
        }
        ParameterSummary ps;
        ps.name = names[static_cast<std::size_t>(p)];
        ps.truth = theta(p);
        if (!values.empty()) {
            ps.mean = tcopula::detail::pairwise_sum(values.begin(), values.end()) / static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - ps.mean) * (v - ps.mean);
            ps.sd = std::sqrt(ss / static_cast<double>(values.size()));
            ps.bias = ps.mean - ps.truth;
            ps.rmse = std::sqrt(ps.sd * ps.sd + ps.bias * ps.bias);
        } else {
            ps.mean = ps.sd = ps.bias = ps.rmse = kNaN;
        }
        if (!vars.empty())
            ps.sqrt_ave_var_mle =
                std::sqrt(tcopula::detail::pairwise_sum(vars.begin(), vars.end()) / static_cast<double>(vars.size()));
        s.params.push_back(ps);
    }
    s.n_used = static_cast<long long>(std::count(used.begin(), used.end(), 1));
    s.failures = n_replicates - s.n_used;
    return s;
}

PairedStudySummary paired_small_sample_study(const CopulaSpec& truth, const Portfolio& portfolio, Eigen::Index k,
                                             long long n_replicates, double q, long long mc_n, std::uint64_t seed,
                                             unsigned threads) {
    if (n_replicates < 1) throw DomainError("paired_small_sample_study: need at least one replicate");
    check_portfolio(portfolio, truth.dim());
    PairedStudySummary s;
    s.k = k;
    s.n_requested = n_replicates;
    s.q = q;
    s.mc_n = mc_n;
    s.seed = seed;
    s.replicates = Eigen::MatrixXd::Constant(n_replicates, 6, kNaN);

    tcopula::detail::parallel_for(static_cast<std::size_t>(n_replicates), threads, [&](std::size_t i) {
        try {
            const auto sample = copula::simulate(truth, k, seed + i);
            FitOptions t_opts;
            t_opts.family = Family::standard_t;
            t_opts.standard_errors = false;
            const auto t_fit = calibrate::fit_mle(sample, t_opts);
            FitOptions m_opts;
            m_opts.family = Family::multidof_t;
            m_opts.standard_errors = false;
            const auto m_fit = calibrate::fit_mle(sample, m_opts);
            if (!t_fit.converged || !m_fit.converged) return;
            const std::uint64_t mc_seed = tcopula::detail::derive_seed(seed + i, 1);
            const RiskReport rt = var_es(t_fit.spec, portfolio, q, mc_n, mc_seed);
            const RiskReport rm = var_es(m_fit.spec, portfolio, q, mc_n, mc_seed);
            const auto ii = static_cast<Eigen::Index>(i);
            s.replicates.row(ii) << rt.var, rm.var, rt.var - rm.var, rt.es, rm.es, rt.es - rm.es;
        } catch (const Error& e) {
            log::warn("paired_small_sample_study: replicate " + std::to_string(i) + " failed: " + e.what());
        }
    });

    std::array<std::vector<double>, 6> cols;
    for (Eigen::Index i = 0; i < n_replicates; ++i) {
        if (!std::isfinite(s.replicates(i, 0))) continue;
        for (std::size_t c = 0; c < 6; ++c) cols[c].push_back(s.replicates(i, static_cast<Eigen::Index>(c)));
    }
    s.n_used = static_cast<long long>(cols[0].size());
    s.failures = n_replicates - s.n_used;
    s.var_t = moment(cols[0]);
    s.var_multidof = moment(cols[1]);
    s.delta_var = moment(cols[2]);
    s.es_t = moment(cols[3]);
    s.es_multidof = moment(cols[4]);
    s.delta_es = moment(cols[5]);
    return s;
}

}  // namespace tcopula::risk
