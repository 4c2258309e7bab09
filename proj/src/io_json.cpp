#include "tcopula/io/json.hpp"

#include "tcopula/errors.hpp"

#include <cmath>

namespace tcopula::io {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json ratio_json(const taildep::RatioEstimate& r) {
    return Json{{"value", number(r.value)},
                {"mc_stderr", number(r.mc_stderr)},
                {"numerator_count", r.numerator_count},
                {"denominator_count", r.denominator_count},
                {"infinite", r.infinite}};
}

Json moment_json(const risk::Moment& m) {
    return Json{{"mean", number(m.mean)}, {"sd", m.sd ? number(*m.sd) : Json(nullptr)}};
}

Json clean(Json j) {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) return nullptr;
    if (j.is_structured())
        for (auto& v : j) v = clean(std::move(v));
    return j;
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw DomainError("matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ShapeError("matrix rows must all have " + std::to_string(cols) + " entries");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Json to_json(const copula::CopulaSpec& spec) {
    Json j;
    j["dim"] = spec.dim();
    if (spec.is_gaussian()) {
        j["dofs"] = "gaussian";
    } else {
        Json d = Json::array();
        for (const auto& nu : spec.dofs()) d.push_back(nu.value());
        j["dofs"] = d;
    }
    j["corr"] = matrix_to_json(spec.corr());
    if (spec.groups()) j["groups"] = *spec.groups();
    return j;
}

copula::CopulaSpec spec_from_json(const Json& j) {
    try {
        const Eigen::MatrixXd corr = matrix_from_json(j.at("corr"));
        if (j.contains("dim") && j.at("dim").get<int>() != corr.rows())
            throw ShapeError("spec json: 'dim' does not match the correlation matrix");
        const Json& dofs = j.at("dofs");
        if (dofs.is_string()) {
            if (dofs.get<std::string>() != "gaussian") throw DomainError("spec json: dofs must be an array or \"gaussian\"");
            return copula::CopulaSpec::gaussian(corr);
        }
        std::vector<copula::Dof> nus;
        for (const auto& v : dofs) nus.emplace_back(v.get<double>());
        if (j.contains("groups") && !j.at("groups").is_null()) {
            const auto groups = j.at("groups").get<std::vector<int>>();
            const int m = groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1;
            std::vector<copula::Dof> group_dofs;
            for (int g = 0; g < m; ++g) {
                const auto it = std::find(groups.begin(), groups.end(), g);
                if (it == groups.end()) throw DomainError("spec json: group labels must be contiguous from 0");
                group_dofs.push_back(nus.at(static_cast<std::size_t>(it - groups.begin())));
            }
            for (std::size_t i = 0; i < groups.size() && i < nus.size(); ++i)
                if (!(nus[i] == group_dofs[static_cast<std::size_t>(groups[i])]))
                    throw DomainError("spec json: dofs must be constant within each group");
            return copula::CopulaSpec::grouped(corr, groups, group_dofs);
        }
        return copula::CopulaSpec::multidof(corr, std::move(nus));
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("spec json: ") + e.what());
    }
}

Json to_json(const calibrate::FitResult& fit) {
    Json se = nullptr;
    if (fit.std_errors) {
        se = Json::array();
        for (Eigen::Index i = 0; i < fit.std_errors->size(); ++i) se.push_back(number((*fit.std_errors)(i)));
    }
    return clean(Json{{"spec", to_json(fit.spec)},
                {"loglik", number(fit.loglik)},
                {"stderr", se},
                {"param_order", fit.param_order},
                {"converged", fit.converged},
                {"iterations", fit.iterations},
                {"evaluations", fit.evaluations},
                {"method", calibrate::to_string(fit.method)},
                {"family", calibrate::to_string(fit.family)}});
}

Json to_json(const calibrate::LrtResult& lrt) {
    return clean(Json{{"statistic", lrt.statistic}, {"df", lrt.df}, {"p_value", lrt.p_value}});
}

Json to_json(const taildep::TailDepReport& r) {
    return clean(Json{{"lambda_L", r.lambda_L},
                {"lambda_U", r.lambda_U},
                {"lambda_NW", r.lambda_NW},
                {"lambda_SE", r.lambda_SE},
                {"method", r.method},
                {"mc_stderr", r.mc_stderr ? Json(*r.mc_stderr) : Json(nullptr)}});
}

Json to_json(const taildep::TdcLimit& l) {
    return clean(Json{{"q", l.q}, {"ratio", l.ratio}, {"estimate", l.estimate}, {"extrapolation", l.extrapolation}});
}

Json to_json(const taildep::AsymmetryReport& r) {
    Json regions = Json::array();
    for (std::size_t i = 0; i < 8; ++i)
        regions.push_back(Json{{"region", i + 1},
                               {"prob", r.region_probs[i]},
                               {"mc_stderr", r.region_stderr[i]},
                               {"count", r.region_counts[i]}});
    return clean(Json{{"q", r.q},
                {"xi_q", ratio_json(r.xi)},
                {"eta_q", ratio_json(r.eta)},
                {"region_probs", regions},
                {"pr1_over_pr2", ratio_json(r.pr1_over_pr2)},
                {"pr3_over_pr4", ratio_json(r.pr3_over_pr4)},
                {"mc_n", r.mc_n},
                {"seed", r.seed}});
}

Json to_json(const risk::RiskReport& r) {
    return clean(Json{{"q", r.q},
                {"var", number(r.var)},
                {"es", number(r.es)},
                {"mc_n", r.mc_n},
                {"mc_stderr_var", number(r.var_stderr)},
                {"mc_stderr_es", number(r.es_stderr)},
                {"seed", r.seed}});
}

Json to_json(const risk::ModelRiskTable& t) {
    Json rows = Json::array();
    for (const auto& row : t.rows)
        rows.push_back(Json{{"model", row.model},
                            {"spec", to_json(row.spec)},
                            {"risk", to_json(row.risk)},
                            {"var_rel_diff", number(row.var_rel_diff)},
                            {"es_rel_diff", number(row.es_rel_diff)},
                            {"lambda_L", row.lambda_L ? Json(*row.lambda_L) : Json(nullptr)}});
    return clean(Json{{"q", t.q}, {"mc_n", t.mc_n}, {"models", rows}});
}

Json to_json(const risk::StudySummary& s) {
    Json params = Json::array();
    for (const auto& p : s.params)
        params.push_back(Json{{"name", p.name},
                              {"truth", p.truth},
                              {"mean", number(p.mean)},
                              {"sd", number(p.sd)},
                              {"bias", number(p.bias)},
                              {"rmse", number(p.rmse)},
                              {"sqrt_ave_var_mle", p.sqrt_ave_var_mle ? number(*p.sqrt_ave_var_mle) : Json(nullptr)}});
    return clean(Json{{"k", s.k},
                {"n_requested", s.n_requested},
                {"n_used", s.n_used},
                {"failures", s.failures},
                {"method", calibrate::to_string(s.method)},
                {"seed", s.seed},
                {"params", params}});
}

Json to_json(const risk::PairedStudySummary& s) {
    return clean(Json{{"k", s.k},
                {"n_requested", s.n_requested},
                {"n_used", s.n_used},
                {"failures", s.failures},
                {"q", s.q},
                {"mc_n", s.mc_n},
                {"seed", s.seed},
                {"var_t", moment_json(s.var_t)},
                {"var_multidof", moment_json(s.var_multidof)},
                {"delta_var", moment_json(s.delta_var)},
                {"es_t", moment_json(s.es_t)},
                {"es_multidof", moment_json(s.es_multidof)},
                {"delta_es", moment_json(s.delta_es)}});
}

Json to_json(const garch::GarchFit& f) {
    Json se = nullptr;
    if (f.std_errors) se = Json{{"mu", (*f.std_errors)(0)}, {"omega", (*f.std_errors)(1)},
                                {"alpha", (*f.std_errors)(2)}, {"beta", (*f.std_errors)(3)}};
    return clean(Json{{"mu", f.mu},         {"omega", f.omega},   {"alpha", f.alpha},
                {"beta", f.beta},     {"loglik", f.loglik}, {"sigma0", f.sigma0},
                {"stderr", se},       {"converged", f.converged}, {"evaluations", f.evaluations}});
}

}  // namespace tcopula::io
