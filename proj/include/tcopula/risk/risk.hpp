#pragma once

#include "tcopula/calibrate/fit.hpp"
#include "tcopula/copula/spec.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tcopula::risk {

using numerics::Dof;

/// Marginal distribution used to map copula draws to returns.
class MarginModel {
public:
    enum class Kind { standard_normal, student_t, empirical };

    static MarginModel standard_normal();
    static MarginModel student_t(Dof nu);
    /// Piecewise-linear inverse through the plotting positions i / (m + 1) of the sorted data.
    /// Needs at least two distinct points.
    static MarginModel empirical(std::vector<double> data);

    /// Inverse CDF. Empirical margins clamp to the extreme data points outside
    /// [1/(m+1), m/(m+1)]; `clamped`, when given, is set if that happened.
    double quantile(double u, bool* clamped = nullptr) const;

    Kind kind() const noexcept { return kind_; }
    std::optional<Dof> dof() const noexcept { return nu_; }
    std::string describe() const;

private:
    MarginModel(Kind kind, std::optional<Dof> nu, std::vector<double> data)
        : kind_(kind), nu_(nu), sorted_(std::move(data)) {}

    Kind kind_;
    std::optional<Dof> nu_;
    std::vector<double> sorted_;
};

struct Portfolio {
    Eigen::VectorXd weights;
    std::vector<MarginModel> margins;

    /// Weights (1, -1) on two coordinates with the same margin.
    static Portfolio long_short(const MarginModel& margin);
};

struct RiskReport {
    double q = 0.99;
    /// q-quantile of the portfolio return Z (order statistic ceil(q n)).
    double var = 0.0;
    /// Mean of the simulated Z above the VaR order statistic.
    double es = 0.0;
    long long mc_n = 0;
    /// Half the distance between the order statistics one binomial standard deviation either side.
    double var_stderr = 0.0;
    /// sqrt((Var(Z | Z > VaR) + q (ES - VaR)^2) / (n (1 - q))).
    double es_stderr = 0.0;
    std::uint64_t seed = 0;
};

/// Monte Carlo VaR and ES of Z = sum_i w_i F_i^{-1}(U_i) with U drawn from the copula.
/// Identical seeds give common random numbers across copula specs of the same dimension.
RiskReport var_es(const copula::CopulaSpec& spec, const Portfolio& portfolio, double q, long long mc_n,
                  std::uint64_t seed, unsigned threads = 1);

/// VaR and ES of a given sample of portfolio returns (same estimators as var_es).
RiskReport var_es_from_returns(std::vector<double> z, double q);

struct CompetingModels {
    copula::CopulaSpec truth;
    /// Pearson correlation of the normal scores.
    copula::CopulaSpec gaussian;
    /// Tau-calibrated correlation, ML dof.
    calibrate::FitResult standard_t;
    std::optional<calibrate::FitResult> multidof;
    Eigen::Index k_fit = 0;
    std::uint64_t seed = 0;
};

/// Simulates k_fit observations from `truth` and fits the competing copulas to them.
CompetingModels fit_competing_models(const copula::CopulaSpec& truth, Eigen::Index k_fit, std::uint64_t seed,
                                     unsigned threads = 1, bool fit_multidof = true);

struct ModelRow {
    std::string model;
    copula::CopulaSpec spec;
    RiskReport risk;
    /// (Q_model - Q_true) / Q_true and the same for ES.
    double var_rel_diff = 0.0;
    double es_rel_diff = 0.0;
    /// Lower tail dependence coefficient (bivariate specs).
    std::optional<double> lambda_L;
};

struct ModelRiskTable {
    /// The true model first, then gaussian, standard-t and (if fitted) multidof-t.
    std::vector<ModelRow> rows;
    double q = 0.99;
    long long mc_n = 0;
};

/// VaR/ES of each model with common random numbers, relative to the true model.
ModelRiskTable compare_models(const CompetingModels& models, const Portfolio& portfolio, double q, long long mc_n,
                              std::uint64_t seed, unsigned threads = 1);

ModelRiskTable model_risk_study(const copula::CopulaSpec& truth, const Portfolio& portfolio, Eigen::Index k_fit,
                                double q, long long mc_n, std::uint64_t seed, unsigned threads = 1,
                                bool fit_multidof = true);

struct ParameterSummary {
    std::string name;
    double truth = 0.0;
    double mean = 0.0;
    /// Replicate standard deviation with divisor N, so rmse^2 = sd^2 + bias^2.
    double sd = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    /// sqrt of the average squared observed-information standard error over replicates
    /// where it was available.
    std::optional<double> sqrt_ave_var_mle;
};

struct StudySummary {
    Eigen::Index k = 0;
    long long n_requested = 0;
    long long n_used = 0;
    long long failures = 0;
    calibrate::FitMethod method = calibrate::FitMethod::joint;
    std::vector<ParameterSummary> params;
    /// One row per replicate (natural parameters); rows of failed replicates are NaN.
    Eigen::MatrixXd estimates;
    std::vector<bool> used;
    std::uint64_t seed = 0;
};

/// Replicate i simulates K observations with seed base + i and refits the multidof-t copula.
/// Replicates that throw or whose optimizer does not converge are excluded and counted.
StudySummary finite_sample_study(const copula::CopulaSpec& truth, Eigen::Index k, long long n_replicates,
                                 calibrate::FitMethod method, std::uint64_t seed, unsigned threads = 1);

struct Moment {
    double mean = 0.0;
    /// Divisor N - 1; absent for a single replicate.
    std::optional<double> sd;
};

struct PairedStudySummary {
    Eigen::Index k = 0;
    long long n_requested = 0;
    long long n_used = 0;
    long long failures = 0;
    double q = 0.99;
    long long mc_n = 0;
    Moment var_t, var_multidof, delta_var, es_t, es_multidof, delta_es;
    /// Columns Q_t, Q_multidof, dQ, Psi_t, Psi_multidof, dPsi; failed replicates are NaN.
    Eigen::MatrixXd replicates;
    std::uint64_t seed = 0;
};

/// Each replicate sample is fitted by joint ML with both the standard t and the multidof t
/// copula; VaR/ES of the two fits use common random numbers, so the deltas are paired.
PairedStudySummary paired_small_sample_study(const copula::CopulaSpec& truth, const Portfolio& portfolio,
                                             Eigen::Index k, long long n_replicates, double q, long long mc_n,
                                             std::uint64_t seed, unsigned threads = 1);

}  // namespace tcopula::risk
