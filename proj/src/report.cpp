#include "gapdecomp/report.hpp"

#include "gapdecomp/csv.hpp"

#include <fmt/format.h>

#include <cmath>
#include <sstream>

namespace gapdecomp::report {

using nlohmann::json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

std::string fixed(double x, int digits) {
  if (std::isnan(x)) return "n/a";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.{}f}", x, digits);
}

}  // namespace

json fit_json(const LogitFit& fit) {
  const Eigen::VectorXd se = fit.robust_se();
  const Eigen::VectorXd p = fit.robust_p_values();
  json j;
  j["labels"] = fit.labels;
  j["coef"] = vector_json(fit.beta);
  j["robust_se"] = vector_json(se);
  j["p_values"] = vector_json(p);
  json ors = json::array(), or_se = json::array();
  for (const auto& o : odds_ratios(fit)) {
    ors.push_back(number(o.odds_ratio));
    or_se.push_back(number(o.robust_se));
  }
  j["or"] = ors;
  j["or_se"] = or_se;
  j["loglik"] = number(fit.log_lik);
  j["n"] = fit.n;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["ridge"] = fit.ridge;
  return j;
}

std::string fit_text(const LogitFit& fit, const std::string& title) {
  const Eigen::VectorXd se = fit.robust_se();
  const Eigen::VectorXd p = fit.robust_p_values();
  const auto ors = odds_ratios(fit);
  std::string out = fmt::format("{}\nLogistic regression  n = {}  log likelihood = {}  iterations = {}\n\n",
                                title, fit.n, fixed(fit.log_lik, 4), fit.iterations);
  out += fmt::format("{:<40}{:>15}{:>12}{:>14}{:>12}\n", "Variable", "Coef.", "Robust SE", "Odds ratio",
                     "OR SE");
  for (std::size_t j = 0; j < fit.labels.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out += fmt::format("{:<40}{:>15}{:>12}{:>14}{:>12}\n", fit.labels[j],
                       fixed(fit.beta(jj), 7) + fmt::format("{:<3}", significance_stars(p(jj))),
                       fixed(se(jj), 7), fixed(ors[j].odds_ratio, 6), fixed(ors[j].robust_se, 6));
  }
  out += "*** p<0.01, ** p<0.05, * p<0.1\n";
  return out;
}

std::string fit_csv(const LogitFit& fit) {
  const Eigen::VectorXd se = fit.robust_se();
  const Eigen::VectorXd p = fit.robust_p_values();
  const auto ors = odds_ratios(fit);
  std::ostringstream out;
  csv::write_row(out, {"variable", "coef", "robust_se", "p_value", "or", "or_se"});
  for (std::size_t j = 0; j < fit.labels.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    csv::write_row(out, {fit.labels[j], fmt::format("{}", fit.beta(jj)), fmt::format("{}", se(jj)),
                         fmt::format("{}", p(jj)), fmt::format("{}", ors[j].odds_ratio),
                         fmt::format("{}", ors[j].robust_se)});
  }
  return out.str();
}

json vif_json(const VifReport& vif) {
  json cols = json::array();
  for (const auto& e : vif.columns) cols.push_back({{"label", e.label}, {"vif", number(e.vif)}});
  return {{"columns", cols},
          {"mean", number(vif.mean)},
          {"max", number(vif.max)},
          {"collinearity_warning", vif.collinearity_warning}};
}

json link_test_json(const LinkTestResult& lt) {
  return {{"intercept", number(lt.intercept)},
          {"hat", {{"coef", number(lt.beta_hat)}, {"se", number(lt.se_hat)}, {"p", number(lt.p_hat)}}},
          {"hatsq", {{"coef", number(lt.beta_hatsq)}, {"se", number(lt.se_hatsq)}, {"p", number(lt.p_hatsq)}}},
          {"verdict", lt.well_specified ? "specified" : "misspecified"}};
}

json diagnostics_json(const DiagnosticsReport& d) {
  return {{"vif", vif_json(d.vif)},
          {"link_test", link_test_json(d.link_test)},
          {"auc", number(d.auc)},
          {"roc_points", d.roc.size()}};
}

std::string diagnostics_text(const DiagnosticsReport& d, const std::string& title) {
  std::string out = title + "\n";
  if (d.vif.collinearity_warning)
    out += "WARNING: infinite VIF, at least one column is an exact linear combination of others\n";
  out += fmt::format("\n{:<40}{:>12}\n", "Variable", "VIF");
  for (const auto& e : d.vif.columns) out += fmt::format("{:<40}{:>12}\n", e.label, fixed(e.vif, 4));
  out += fmt::format("{:<40}{:>12}\n", "Mean VIF", fixed(d.vif.mean, 4));
  out += fmt::format("{:<40}{:>12}\n", "Max VIF", fixed(d.vif.max, 4));
  const auto& lt = d.link_test;
  out += fmt::format("\nLink test\n{:<12}{:>14}{:>12}{:>10}\n", "", "Coef.", "Robust SE", "P>|z|");
  out += fmt::format("{:<12}{:>14}{:>12}{:>10}\n", "_hat", fixed(lt.beta_hat, 7), fixed(lt.se_hat, 7),
                     fixed(lt.p_hat, 4));
  out += fmt::format("{:<12}{:>14}{:>12}{:>10}\n", "_hatsq", fixed(lt.beta_hatsq, 7), fixed(lt.se_hatsq, 7),
                     fixed(lt.p_hatsq, 4));
  out += fmt::format("{:<12}{:>14}\n", "_cons", fixed(lt.intercept, 7));
  out += fmt::format("Verdict: {}\n", lt.well_specified ? "specified" : "misspecified");
  out += fmt::format("\nAUC = {}  ({} ROC points)\n", fixed(d.auc, 6), d.roc.size());
  return out;
}

std::string roc_csv(std::span<const RocPoint> roc) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : roc) out += fmt::format("{},{}\n", p.fpr, p.tpr);
  return out;
}

json decomposition_json(const DecompositionResult& r) {
  json contributions = json::array();
  for (const auto& c : r.contributions)
    contributions.push_back({{"variable", c.variable},
                             {"coef", number(c.coef)},
                             {"se", number(c.se)},
                             {"pct", c.pct ? number(*c.pct) : json(nullptr)}});
  return {{"group1", r.label1},
          {"group2", r.label2},
          {"n1", r.n1},
          {"n2", r.n2},
          {"p1", number(r.p1)},
          {"p2", number(r.p2)},
          {"gap", number(r.gap)},
          {"explained", number(r.total_explained)},
          {"pct_explained", r.pct_explained ? number(*r.pct_explained) : json(nullptr)},
          {"replications", r.replications},
          {"seed", r.seed},
          {"coef_source", to_string(r.coef_source)},
          {"ordering", to_string(r.ordering)},
          {"unit", to_string(r.unit)},
          {"se_method", "replication standard deviation / sqrt(R), approximate"},
          {"omitted_columns", r.omitted_columns},
          {"omitted_rows", r.omitted_rows},
          {"contributions", contributions}};
}

std::string decomposition_csv(const DecompositionResult& r) {
  std::ostringstream out;
  csv::write_row(out, {"variable", "coef", "se", "pct"});
  for (const auto& c : r.contributions)
    csv::write_row(out, {c.variable, fmt::format("{}", c.coef),
                         std::isfinite(c.se) ? fmt::format("{}", c.se) : std::string(),
                         c.pct ? fmt::format("{}", *c.pct) : std::string()});
  return out.str();
}

json oaxaca_json(const OaxacaResult& r) {
  json per = json::array();
  for (const auto& s : r.per_variable) per.push_back({{"variable", s.variable}, {"explained", number(s.explained)}});
  return {{"mean1", number(r.mean1)},       {"mean2", number(r.mean2)},
          {"gap", number(r.gap)},           {"explained", number(r.explained)},
          {"unexplained", number(r.unexplained)}, {"per_variable", per},
          {"omitted_columns", r.omitted_columns}};
}

std::string oaxaca_text(const OaxacaResult& r) {
  std::string out = "Linear (Blinder-Oaxaca) decomposition, group 1 coefficients\n";
  out += fmt::format("{:<36}{:>16}\n", "Difference", fixed(r.gap, 7));
  out += fmt::format("{:<36}{:>16}\n", "Explained", fixed(r.explained, 7));
  out += fmt::format("{:<36}{:>16}\n", "Unexplained", fixed(r.unexplained, 7));
  for (const auto& s : r.per_variable) out += fmt::format("  {:<34}{:>16}\n", s.variable, fixed(s.explained, 7));
  for (const auto& c : r.omitted_columns) out += "Note: no observations for " + c + "; coefficient set to 0\n";
  return out;
}

json dropped_json(const DesignMatrix& X) {
  json out = json::array();
  for (const auto& d : X.dropped)
    out.push_back({{"variable", d.variable}, {"category", d.category}, {"reason", d.reason}, {"rows", d.rows}});
  return out;
}

json perfect_predictors_json(std::span<const PerfectPredictor> pp) {
  json out = json::array();
  for (const auto& p : pp)
    out.push_back({{"variable", p.variable},
                   {"category", p.category},
                   {"outcome", p.direction == PredictorDirection::AllZero ? 0 : 1},
                   {"rows", p.rows}});
  return out;
}

}  // namespace gapdecomp::report
