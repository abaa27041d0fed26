#include "gapdecomp/cli.hpp"
#include "gapdecomp/decomposition.hpp"
#include "gapdecomp/diagnostics.hpp"
#include "gapdecomp/errors.hpp"
#include "gapdecomp/logit.hpp"
#include "gapdecomp/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace gapdecomp;

namespace {

using Columns = std::vector<std::pair<std::string, std::string>>;

py::dict fit_dict(const LogitFit& fit) {
  py::dict d;
  d["labels"] = fit.labels;
  d["beta"] = fit.beta;
  d["robust_se"] = fit.robust_se();
  d["classical_se"] = fit.classical_se();
  d["p_values"] = fit.robust_p_values();
  d["cov_robust"] = fit.cov_robust;
  d["odds_ratios"] = Eigen::VectorXd(fit.beta.array().exp());
  d["log_likelihood"] = fit.log_lik;
  d["iterations"] = fit.iterations;
  d["converged"] = fit.converged;
  d["n"] = fit.n;
  return d;
}

GroupSample group(const std::string& label, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Columns& columns) {
  if (static_cast<Eigen::Index>(columns.size()) != X.cols())
    throw ShapeError("one (variable, category) pair per design column required");
  GroupSample g;
  g.label = label;
  for (const auto& [variable, category] : columns) g.X.columns.push_back({variable, category});
  g.X.values = X;
  g.y = y;
  return g;
}

py::dict decomposition_dict(const DecompositionResult& r) {
  py::dict d;
  d["labels"] = std::make_pair(r.label1, r.label2);
  d["n"] = std::make_pair(r.n1, r.n2);
  d["p"] = std::make_pair(r.p1, r.p2);
  d["gap"] = r.gap;
  d["explained"] = r.total_explained;
  d["pct_explained"] = r.pct_explained;
  py::list contributions;
  for (const auto& c : r.contributions) {
    py::dict row;
    row["variable"] = c.variable;
    row["coef"] = c.coef;
    row["se"] = c.se;
    row["pct"] = c.pct;
    contributions.append(row);
  }
  d["contributions"] = contributions;
  d["beta"] = r.beta;
  d["omitted_columns"] = r.omitted_columns;
  d["omitted_rows"] = r.omitted_rows;
  d["replications"] = r.replications;
  d["seed"] = r.seed;
  d["report"] = decomposition_report(r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Logit estimation, model diagnostics and group-gap decompositions.";

  static py::handle base = py::exception<Error>(m, "GapdecompError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = base(std::string(e.kind()) + ": " + e.what());
      err.attr("kind") = e.kind();
      err.attr("exit_code") = e.exit_code();
      PyErr_SetObject(base.ptr(), err.ptr());
    }
  });

  m.def("logistic", &logistic, py::arg("t"));
  m.def("log_likelihood", &log_likelihood, py::arg("beta"), py::arg("X"), py::arg("y"));
  m.def("score", &score, py::arg("beta"), py::arg("X"), py::arg("y"));
  m.def(
      "predict", [](const Eigen::VectorXd& beta, const Eigen::MatrixXd& X) { return predict_probabilities(beta, X); },
      py::arg("beta"), py::arg("X"));

  m.def(
      "fit_logit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> labels, double tol,
         int max_iter, double ridge) {
        FitOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        o.ridge = ridge;
        return fit_dict(fit_logit(X, y, std::move(labels), o));
      },
      py::arg("X"), py::arg("y"), py::arg("labels") = std::vector<std::string>{}, py::arg("tol") = 1e-8,
      py::arg("max_iter") = 50, py::arg("ridge") = 0.0,
      "Maximum-likelihood logit by IRLS. Returns coefficients, robust and classical SEs, p-values and odds ratios.");

  m.def(
      "vif",
      [](const Eigen::MatrixXd& X, const std::vector<std::string>& labels) {
        const auto r = vif(X, labels);
        py::dict d;
        py::dict per;
        for (const auto& e : r.columns) per[py::str(e.label)] = e.vif;
        d["vif"] = per;
        d["mean"] = r.mean;
        d["max"] = r.max;
        d["collinearity_warning"] = r.collinearity_warning;
        return d;
      },
      py::arg("X"), py::arg("labels"), "Variance inflation factors; the first column is the intercept.");

  m.def(
      "roc_curve",
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
        const auto roc = roc_curve(y, scores);
        Eigen::VectorXd fpr(static_cast<Eigen::Index>(roc.size())), tpr(fpr.size());
        for (std::size_t i = 0; i < roc.size(); ++i) {
          fpr(static_cast<Eigen::Index>(i)) = roc[i].fpr;
          tpr(static_cast<Eigen::Index>(i)) = roc[i].tpr;
        }
        return std::make_pair(fpr, tpr);
      },
      py::arg("y"), py::arg("scores"));
  m.def(
      "auc", [](const Eigen::VectorXd& y, const Eigen::VectorXd& scores) { return auc(roc_curve(y, scores)); },
      py::arg("y"), py::arg("scores"), "Trapezoidal area under the ROC curve.");
  m.def("auc_concordance", &auc_concordance, py::arg("y"), py::arg("scores"));

  m.def(
      "link_test",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        const auto fit = fit_logit(X, y, {});
        const auto r = link_test(fit, X, y);
        py::dict d;
        d["hat"] = py::make_tuple(r.beta_hat, r.se_hat, r.p_hat);
        d["hatsq"] = py::make_tuple(r.beta_hatsq, r.se_hatsq, r.p_hatsq);
        d["well_specified"] = r.well_specified;
        return d;
      },
      py::arg("X"), py::arg("y"), "Fits the logit, then runs the link test on its linear prediction.");

  m.def(
      "fairlie_decompose",
      [](const Eigen::MatrixXd& X1, const Eigen::VectorXd& y1, const Eigen::MatrixXd& X2, const Eigen::VectorXd& y2,
         const Columns& columns, int replications, std::uint64_t seed, const std::string& ordering,
         const std::string& coef_source, const std::string& unit, unsigned threads,
         std::pair<std::string, std::string> labels) {
        FairlieOptions o;
        o.replications = replications;
        o.seed = seed;
        o.ordering = parse_ordering(ordering);
        o.coef_source = parse_coef_source(coef_source);
        o.unit = parse_unit(unit);
        o.threads = threads;
        const auto g1 = group(labels.first, X1, y1, columns);
        const auto g2 = group(labels.second, X2, y2, columns);
        DecompositionResult r;
        {
          py::gil_scoped_release release;
          r = fairlie_decompose(g1, g2, o);
        }
        return decomposition_dict(r);
      },
      py::arg("X1"), py::arg("y1"), py::arg("X2"), py::arg("y2"), py::arg("columns"), py::kw_only(),
      py::arg("replications") = 100, py::arg("seed") = 0, py::arg("ordering") = "randomized",
      py::arg("coef_source") = "group1", py::arg("unit") = "variable", py::arg("threads") = 0u,
      py::arg("labels") = std::make_pair(std::string("group1"), std::string("group2")),
      "Nonlinear decomposition of mean(y1) - mean(y2). `columns` names every design column as a "
      "(variable, category) pair, with (\"\", \"\") for the intercept.");

  m.def(
      "oaxaca_linear",
      [](const Eigen::MatrixXd& X1, const Eigen::VectorXd& y1, const Eigen::MatrixXd& X2, const Eigen::VectorXd& y2,
         const Columns& columns) {
        const auto r = oaxaca_linear(group("group1", X1, y1, columns), group("group2", X2, y2, columns));
        py::dict d;
        d["gap"] = r.gap;
        d["explained"] = r.explained;
        d["unexplained"] = r.unexplained;
        py::dict per;
        for (const auto& s : r.per_variable) per[py::str(s.variable)] = s.explained;
        d["per_variable"] = per;
        d["omitted_columns"] = r.omitted_columns;
        return d;
      },
      py::arg("X1"), py::arg("y1"), py::arg("X2"), py::arg("y2"), py::arg("columns"));

  m.def(
      "percentage_contributions",
      [](const std::vector<double>& coefs, double gap) { return percentage_contributions(coefs, gap); },
      py::arg("coefs"), py::arg("gap"));

  m.def(
      "simulate",
      [](const std::string& dgp_json, std::optional<std::uint64_t> seed) {
        const auto dgp = synth::DataGeneratingProcess::from_json(nlohmann::json::parse(dgp_json));
        if (!seed) seed = dgp.seed;
        if (!seed) throw ConfigError("a seed is required");
        auto [g1, g2] = synth::generate_microdata(dgp, *seed);
        Columns columns;
        for (const auto& c : g1.X.columns) columns.emplace_back(c.variable, c.category);
        py::dict d;
        d["X1"] = g1.X.values;
        d["y1"] = g1.y;
        d["X2"] = g2.X.values;
        d["y2"] = g2.y;
        d["columns"] = columns;
        d["labels"] = std::make_pair(g1.label, g2.label);
        return d;
      },
      py::arg("dgp_json"), py::arg("seed") = std::nullopt,
      "Draws both groups from a data-generating process given as JSON text; returns encoded designs.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"gapdecomp"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a command-line invocation in process; returns (exit code, stdout, stderr).");
}
