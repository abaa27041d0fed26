#pragma once

#include "gapdecomp/data_model.hpp"
#include "gapdecomp/decomposition.hpp"
#include "gapdecomp/diagnostics.hpp"
#include "gapdecomp/logit.hpp"

#include <span>
#include <string>

#include <json.hpp>

namespace gapdecomp::report {

/// Non-finite values become null.
nlohmann::json number(double x);

nlohmann::json fit_json(const LogitFit& fit);
/// Coefficient, robust SE, odds ratio and its SE per column, with stars.
std::string fit_text(const LogitFit& fit, const std::string& title);
std::string fit_csv(const LogitFit& fit);

nlohmann::json vif_json(const VifReport& vif);
nlohmann::json link_test_json(const LinkTestResult& lt);
nlohmann::json diagnostics_json(const DiagnosticsReport& d);
std::string diagnostics_text(const DiagnosticsReport& d, const std::string& title);
std::string roc_csv(std::span<const RocPoint> roc);

nlohmann::json decomposition_json(const DecompositionResult& r);
std::string decomposition_csv(const DecompositionResult& r);

nlohmann::json oaxaca_json(const OaxacaResult& r);
std::string oaxaca_text(const OaxacaResult& r);

nlohmann::json dropped_json(const DesignMatrix& X);
nlohmann::json perfect_predictors_json(std::span<const PerfectPredictor> pp);

}  // namespace gapdecomp::report
