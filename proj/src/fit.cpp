#include "tcopula/calibrate/fit.hpp"

#include "tcopula/calibrate/kendall.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/log.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tcopula::calibrate {

using copula::CopulaSpec;
using copula::UniformSample;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DofLayout {
    int count = 0;
    std::vector<int> coord_param;
};

DofLayout dof_layout(Family family, int n, const std::vector<int>& groups) {
    DofLayout layout;
    switch (family) {
        case Family::gaussian:
            break;
        case Family::standard_t:
            layout.count = 1;
            layout.coord_param.assign(static_cast<std::size_t>(n), 0);
            break;
        case Family::multidof_t:
            layout.count = n;
            for (int i = 0; i < n; ++i) layout.coord_param.push_back(i);
            break;
        case Family::grouped_t:
            if (static_cast<int>(groups.size()) != n)
                throw ShapeError("grouped-t fit: group map has " + std::to_string(groups.size()) +
                                 " entries, sample has " + std::to_string(n) + " columns");
            layout.coord_param = groups;
            layout.count = *std::max_element(groups.begin(), groups.end()) + 1;
            for (int g : groups)
                if (g < 0) throw DomainError("grouped-t fit: group indices must be >= 0");
            break;
    }
    return layout;
}

int offdiag_count(int n) { return n * (n - 1) / 2; }

std::optional<CopulaSpec> spec_from_natural(const Eigen::VectorXd& theta, int n, Family family,
                                            const DofLayout& layout, const std::vector<int>& groups) {
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n, n);
    chol(0, 0) = 1.0;
    int p = 0;
    for (int i = 1; i < n; ++i) {
        double norm2 = 0.0;
        for (int j = 0; j < i; ++j, ++p) {
            chol(i, j) = theta(p);
            norm2 += theta(p) * theta(p);
        }
        if (!(norm2 < 1.0)) return std::nullopt;
        chol(i, i) = std::sqrt(1.0 - norm2);
    }
    if (family == Family::gaussian) return CopulaSpec::from_cholesky(std::move(chol), std::nullopt);
    std::vector<copula::Dof> dofs;
    dofs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double v = theta(p + layout.coord_param[static_cast<std::size_t>(i)]);
        if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
        dofs.emplace_back(v);
    }
    if (family == Family::grouped_t) return CopulaSpec::from_cholesky(std::move(chol), std::move(dofs), groups);
    return CopulaSpec::from_cholesky(std::move(chol), std::move(dofs));
}

double average_loglik(const CopulaSpec& spec, const UniformSample& sample, const copula::LikelihoodOptions& opts) {
    return copula::log_likelihood(spec, sample, opts) / static_cast<double>(sample.size());
}

}  // namespace

const char* to_string(Family family) {
    switch (family) {
        case Family::gaussian: return "gaussian";
        case Family::standard_t: return "standard-t";
        case Family::grouped_t: return "grouped-t";
        case Family::multidof_t: return "multidof-t";
    }
    return "?";
}

const char* to_string(FitMethod method) { return method == FitMethod::joint ? "joint" : "tau-then-dof"; }

Family parse_family(const std::string& text) {
    for (Family f : {Family::gaussian, Family::standard_t, Family::grouped_t, Family::multidof_t})
        if (text == to_string(f)) return f;
    throw DomainError("unknown copula family '" + text + "' (gaussian, standard-t, grouped-t, multidof-t)");
}

FitMethod parse_method(const std::string& text) {
    if (text == "joint") return FitMethod::joint;
    if (text == "tau-then-dof") return FitMethod::tau_then_dof;
    throw DomainError("unknown fit method '" + text + "' (joint, tau-then-dof)");
}

std::vector<std::string> parameter_names(int dim, Family family, const std::vector<int>& groups) {
    std::vector<std::string> names;
    for (int i = 1; i < dim; ++i)
        for (int j = 0; j < i; ++j) names.push_back("A[" + std::to_string(i) + "," + std::to_string(j) + "]");
    const DofLayout layout = dof_layout(family, dim, groups);
    for (int g = 0; g < layout.count; ++g) {
        switch (family) {
            case Family::standard_t: names.emplace_back("nu"); break;
            case Family::grouped_t: names.push_back("nu_group[" + std::to_string(g) + "]"); break;
            default: names.push_back("nu[" + std::to_string(g) + "]"); break;
        }
    }
    return names;
}

Eigen::VectorXd natural_parameters(const CopulaSpec& spec, Family family) {
    const int n = spec.dim();
    const std::vector<int> groups = spec.groups().value_or(std::vector<int>{});
    const DofLayout layout = dof_layout(family, n, family == Family::grouped_t ? groups : std::vector<int>{});
    Eigen::VectorXd theta(offdiag_count(n) + layout.count);
    int p = 0;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) theta(p++) = spec.chol()(i, j);
    if (layout.count > 0) {
        if (spec.is_gaussian()) throw DomainError("natural_parameters: Gaussian spec has no dofs for a t family");
        for (int i = n - 1; i >= 0; --i)
            theta(p + layout.coord_param[static_cast<std::size_t>(i)]) = spec.dofs()[static_cast<std::size_t>(i)].value();
    }
    return theta;
}

FitResult fit_mle(const UniformSample& sample, const FitOptions& options) {
    const int n = sample.dim();
    if (n < 2) throw ShapeError("fit_mle: need at least 2 columns");
    if (sample.size() < 10)
        log::warn("fit_mle: only " + std::to_string(sample.size()) + " observations (fewer than 10)");
    const Family family = options.family;
    const DofLayout layout = dof_layout(family, n, options.groups);
    const bool fit_corr = options.method == FitMethod::joint;
    const int n_corr = offdiag_count(n);
    const int n_free = (fit_corr ? n_corr : 0) + layout.count;
    const std::vector<int>& groups = options.groups;

    const Eigen::MatrixXd tau_chol = copula::correlation_cholesky(tau_correlation(sample));

    auto corr_to_eta = [&](const Eigen::MatrixXd& chol, Eigen::VectorXd& eta) {
        int p = 0;
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j) eta(p++) = chol(i, j) / chol(i, i);
    };
    auto dof_to_eta = [&](double nu) {
        nu = std::clamp(nu, kDofLower, kDofUpper);
        return options.dof_scale == DofScale::log ? std::log(nu) : nu;
    };

    // Free vector -> natural parameters (off-diagonal Cholesky entries, then dofs).
    auto to_natural = [&](const Eigen::VectorXd& eta, Eigen::VectorXd& theta) -> bool {
        int p = 0;
        int q = 0;
        for (int i = 1; i < n; ++i) {
            if (fit_corr) {
                double norm2 = 0.0;
                for (int j = 0; j < i; ++j) norm2 += eta(p + j) * eta(p + j);
                const double scale = 1.0 / std::sqrt(1.0 + norm2);
                for (int j = 0; j < i; ++j, ++p) theta(q++) = eta(p) * scale;
            } else {
                for (int j = 0; j < i; ++j) theta(q++) = tau_chol(i, j);
            }
        }
        for (int g = 0; g < layout.count; ++g) {
            const double e = eta(p + g);
            double nu;
            if (options.dof_scale == DofScale::log) {
                nu = std::clamp(std::exp(e), kDofLower, kDofUpper);
            } else {
                if (!(e >= kDofLower && e <= kDofUpper)) return false;
                nu = e;
            }
            theta(q + g) = nu;
        }
        return true;
    };

    Eigen::VectorXd theta(n_corr + layout.count);
    auto objective = [&](const Eigen::VectorXd& eta) {
        Eigen::VectorXd th(n_corr + layout.count);
        if (!to_natural(eta, th)) return kInf;
        const auto spec = spec_from_natural(th, n, family, layout, groups);
        if (!spec) return kInf;
        try {
            return -copula::log_likelihood(*spec, sample, options.likelihood);
        } catch (const QuadratureError&) {
            return kInf;
        }
    };

    std::vector<Eigen::VectorXd> starts;
    auto make_start = [&](const Eigen::MatrixXd& chol, const std::vector<double>& dof_values) {
        Eigen::VectorXd eta(n_free);
        int p = 0;
        if (fit_corr) {
            Eigen::VectorXd corr_eta(n_corr);
            corr_to_eta(chol, corr_eta);
            eta.head(n_corr) = corr_eta;
            p = n_corr;
        }
        for (int g = 0; g < layout.count; ++g) eta(p + g) = dof_to_eta(dof_values[static_cast<std::size_t>(g)]);
        starts.push_back(eta);
    };
    if (options.init) {
        const CopulaSpec& init = *options.init;
        if (init.dim() != n) throw ShapeError("fit_mle: init spec dimension does not match the sample");
        std::vector<double> dof_values(static_cast<std::size_t>(layout.count),
                                       options.start_dofs.empty() ? 5.0 : options.start_dofs.front());
        if (!init.is_gaussian())
            for (int i = n - 1; i >= 0; --i)
                if (layout.count > 0)
                    dof_values[static_cast<std::size_t>(layout.coord_param[static_cast<std::size_t>(i)])] =
                        init.dofs()[static_cast<std::size_t>(i)].value();
        make_start(init.chol(), dof_values);
    }
    if (layout.count == 0) {
        make_start(tau_chol, {});
    } else {
        for (double d : options.start_dofs)
            make_start(tau_chol, std::vector<double>(static_cast<std::size_t>(layout.count), d));
    }

    FitResult best(CopulaSpec::from_cholesky(tau_chol, std::nullopt));
    double best_value = kInf;
    bool have = false;
    if (n_free == 0) {
        theta.setZero();
        to_natural(Eigen::VectorXd(0), theta);
        best_value = objective(Eigen::VectorXd(0));
        best.converged = true;
        have = std::isfinite(best_value);
    } else {
        Eigen::VectorXd steps(n_free);
        for (int p = 0; p < n_free; ++p) {
            const bool is_corr = fit_corr && p < n_corr;
            steps(p) = is_corr ? 0.2 : (options.dof_scale == DofScale::log ? 0.4 : 0.0);
        }
        for (const Eigen::VectorXd& start : starts) {
            Eigen::VectorXd s = steps;
            if (options.dof_scale == DofScale::identity)
                for (int p = fit_corr ? n_corr : 0; p < n_free; ++p) s(p) = 0.4 * start(p);
            const auto res = numerics::nelder_mead(objective, start, s, options.optimizer);
            if (!have || res.value < best_value) {
                have = std::isfinite(res.value);
                best_value = res.value;
                to_natural(res.x, theta);
                best.converged = res.converged;
                best.iterations = res.iterations;
            }
            best.evaluations += res.evaluations;
        }
    }
    if (!have) throw OptimizerError("fit_mle: no finite log-likelihood found from any start");

    best.spec = *spec_from_natural(theta, n, family, layout, groups);
    best.loglik = copula::log_likelihood(best.spec, sample, options.likelihood);
    best.param_order = parameter_names(n, family, groups);
    best.method = options.method;
    best.family = family;
    if (!best.converged)
        log::warn("fit_mle: optimizer stopped at its evaluation budget before the simplex converged");
    if (options.standard_errors)
        best.std_errors = observed_information(best.spec, sample, family, !fit_corr, options.likelihood.threads).std_errors;
    return best;
}

ObservedInformation observed_information(const CopulaSpec& spec, const UniformSample& sample, Family family,
                                         bool fixed_correlation, unsigned threads) {
    const int n = spec.dim();
    const std::vector<int> groups =
        family == Family::grouped_t ? spec.groups().value_or(std::vector<int>{}) : std::vector<int>{};
    const DofLayout layout = dof_layout(family, n, groups);
    const Eigen::VectorXd theta = natural_parameters(spec, family);
    const Eigen::Index m = theta.size();

    copula::LikelihoodOptions opts;
    opts.density = {1e-13, 5, 14};
    opts.threads = threads;
    auto f = [&](const Eigen::VectorXd& th) {
        const auto s = spec_from_natural(th, n, family, layout, groups);
        if (!s) return std::numeric_limits<double>::quiet_NaN();
        return average_loglik(*s, sample, opts);
    };
    Eigen::VectorXd steps(m);
    for (Eigen::Index i = 0; i < m; ++i) steps(i) = std::max(1e-4, 1e-4 * std::abs(theta(i)));

    ObservedInformation out;
    out.param_order = parameter_names(n, family, groups);
    out.information = -numerics::central_difference_hessian(f, theta, steps);
    out.gradient = numerics::central_difference_gradient(f, theta, steps);

    const Eigen::Index first = fixed_correlation ? offdiag_count(n) : 0;
    const double grad_norm = out.gradient.tail(m - first).cwiseAbs().maxCoeff();
    if (m > first && grad_norm > 1e-3) {
        std::ostringstream msg;
        msg << "observed information: gradient max-norm " << grad_norm
            << " at the supplied point; it may not be an interior optimum";
        log::warn(msg.str());
    }
    if (!out.information.allFinite()) {
        log::warn("observed information: non-finite Hessian entries; standard errors omitted");
        return out;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(out.information);
    if (llt.info() != Eigen::Success) {
        log::warn("observed information: matrix is not positive definite; standard errors omitted");
        return out;
    }
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
    out.std_errors = (inv.diagonal() / static_cast<double>(sample.size())).cwiseSqrt();
    return out;
}

LrtResult likelihood_ratio_test(double restricted_loglik, double full_loglik, int df) {
    if (df < 1) throw DomainError("likelihood_ratio_test: df must be >= 1");
    if (!std::isfinite(restricted_loglik) || !std::isfinite(full_loglik))
        throw DomainError("likelihood_ratio_test: log-likelihoods must be finite");
    const double diff = full_loglik - restricted_loglik;
    LrtResult r;
    r.df = df;
    if (diff < 0.0) {
        if (diff < -kNestingTolerance) {
            std::ostringstream msg;
            msg << "likelihood_ratio_test: restricted model beats the full model by " << -diff
                << " log-likelihood units; models are not nested or a fit failed";
            throw NestingError(msg.str());
        }
        log::warn("likelihood_ratio_test: slightly negative statistic floored at 0");
        r.statistic = 0.0;
    } else {
        r.statistic = 2.0 * diff;
    }
    r.p_value = r.statistic == 0.0 ? 1.0 : numerics::chisq_survival(r.statistic, numerics::Dof(df));
    return r;
}

LrtResult likelihood_ratio_test(const FitResult& restricted, const FitResult& full, int df) {
    return likelihood_ratio_test(restricted.loglik, full.loglik, df);
}

}  // namespace tcopula::calibrate
