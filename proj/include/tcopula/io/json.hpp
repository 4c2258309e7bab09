#pragma once

#include "tcopula/calibrate/fit.hpp"
#include "tcopula/copula/spec.hpp"
#include "tcopula/garch/garch.hpp"
#include "tcopula/risk/risk.hpp"
#include "tcopula/taildep/taildep.hpp"

#include <nlohmann/json.hpp>

namespace tcopula::io {

using Json = nlohmann::ordered_json;

/// {"dim", "dofs": [..] | "gaussian", "corr": full matrix, "groups": [..] (optional)}.
Json to_json(const copula::CopulaSpec& spec);
/// Inverse of to_json; the Cholesky factor is recomputed from "corr".
copula::CopulaSpec spec_from_json(const Json& j);

Json to_json(const calibrate::FitResult& fit);
Json to_json(const calibrate::LrtResult& lrt);
Json to_json(const taildep::TailDepReport& report);
Json to_json(const taildep::TdcLimit& limit);
Json to_json(const taildep::AsymmetryReport& report);
Json to_json(const risk::RiskReport& report);
Json to_json(const risk::ModelRiskTable& table);
Json to_json(const risk::StudySummary& summary);
Json to_json(const risk::PairedStudySummary& summary);
Json to_json(const garch::GarchFit& fit);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

}  // namespace tcopula::io
