#include "gapdecomp/diagnostics.hpp"

#include "gapdecomp/errors.hpp"
#include "vif_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gapdecomp {

VifReport vif(const Eigen::MatrixXd& X, const std::vector<std::string>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != X.cols())
    throw ShapeError("one label per design column required");
  std::vector<Eigen::Index> targets;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    if (labels[static_cast<std::size_t>(j)] != "_cons") targets.push_back(j);

  VifReport report;
  if (targets.empty()) return report;
  if (X.rows() < 2) throw ShapeError("VIF needs at least two rows");

  const auto m = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd Z(X.rows(), m);
  for (Eigen::Index a = 0; a < m; ++a) Z.col(a) = X.col(targets[a]);
  const Eigen::RowVectorXd mean = Z.colwise().mean();
  Z.rowwise() -= mean;
  const Eigen::MatrixXd cov = (Z.transpose() * Z) / static_cast<double>(X.rows());

  const auto values = detail::vif_from_covariance(cov);
  double sum = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    const double v = values[static_cast<std::size_t>(a)];
    report.columns.push_back({labels[static_cast<std::size_t>(targets[a])], v});
    sum += v;
    report.max = std::max(report.max, v);
    if (std::isinf(v)) report.collinearity_warning = true;
  }
  report.mean = sum / static_cast<double>(m);
  return report;
}

VifReport vif(const DesignMatrix& X) { return vif(X.values, X.labels()); }

LinkTestResult link_test(const LogitFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (!fit.converged) throw DiagnosticError("link test requires a converged fit");
  if (fit.beta.size() != X.cols() || y.size() != X.rows())
    throw ShapeError("link test inputs do not match the fitted model");

  const Eigen::VectorXd h = X * fit.beta;
  const double spread = h.maxCoeff() - h.minCoeff();
  if (!(spread > 1e-12 * (1.0 + h.cwiseAbs().maxCoeff())))
    throw DiagnosticError("linear prediction is constant; h and h^2 are collinear with the intercept");

  Eigen::MatrixXd A(X.rows(), 3);
  A.col(0).setOnes();
  A.col(1) = h;
  A.col(2) = h.cwiseProduct(h);

  LogitFit aux;
  try {
    aux = fit_logit(A, y, {"_cons", "_hat", "_hatsq"});
  } catch (const Error& e) {
    throw DiagnosticError(std::string("link-test auxiliary fit failed: ") + e.what());
  }
  if (!aux.converged) throw DiagnosticError("link-test auxiliary fit did not converge");

  const Eigen::VectorXd se = aux.robust_se();
  const Eigen::VectorXd p = aux.robust_p_values();
  LinkTestResult r;
  r.intercept = aux.beta(0);
  r.beta_hat = aux.beta(1);
  r.se_hat = se(1);
  r.p_hat = p(1);
  r.beta_hatsq = aux.beta(2);
  r.se_hatsq = se(2);
  r.p_hatsq = p(2);
  r.well_specified = r.p_hat < 0.01 && r.p_hatsq > 0.10;
  return r;
}

LinkTestResult link_test(const LogitFit& fit, const DesignMatrix& X, const Eigen::VectorXd& y) {
  if (X.labels() != fit.labels) throw ShapeError("design columns do not match the fitted model");
  return link_test(fit, X.values, y);
}

namespace {

void check_classes(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, std::size_t& pos,
                   std::size_t& neg) {
  if (y.size() != scores.size()) throw ShapeError("outcome and score lengths differ");
  pos = 0;
  neg = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1.0) ++pos;
    else if (y(i) == 0.0) ++neg;
    else throw DataError("outcome must be 0 or 1");
  }
  if (pos == 0 || neg == 0) throw UndefinedRocError("ROC needs both outcome classes");
}

}  // namespace

std::vector<RocPoint> roc_curve(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
  std::size_t pos = 0, neg = 0;
  check_classes(y, scores, pos, neg);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  std::vector<RocPoint> roc{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores(order[i]);
    while (i < order.size() && scores(order[i]) == s) {
      if (y(order[i]) == 1.0) ++tp;
      else ++fp;
      ++i;
    }
    roc.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return roc;
}

double auc(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i)
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) * 0.5;
  return area;
}

double auc_concordance(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
  std::size_t pos = 0, neg = 0;
  check_classes(y, scores, pos, neg);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });

  // Midranks, 1-based; summed over positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores(order[j]) == scores(order[i])) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (y(order[t]) == 1.0) rank_sum += midrank;
    i = j;
  }
  const double np = static_cast<double>(pos), nn = static_cast<double>(neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

DiagnosticsReport diagnose(const LogitFit& fit, const DesignMatrix& X, const Eigen::VectorXd& y) {
  DiagnosticsReport r;
  r.vif = vif(X);
  const Eigen::VectorXd p = predict_probabilities(fit, X);
  r.roc = roc_curve(y, p);
  r.auc = auc(r.roc);
  r.link_test = link_test(fit, X, y);
  return r;
}

}  // namespace gapdecomp
