#pragma once

#include "gapdecomp/data_model.hpp"
#include "gapdecomp/logit.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace gapdecomp {

struct VifEntry {
  std::string label;
  double vif;  // +inf for an exact linear dependence
};

struct VifReport {
  std::vector<VifEntry> columns;  // intercept excluded
  double mean = 0.0;
  double max = 0.0;
  /// Set when any column has R^2 >= 1 - 1e-12.
  bool collinearity_warning = false;
};

/// VIF_j = 1 / (1 - R^2_j), R^2_j from regressing column j on every other
/// column plus the intercept.
VifReport vif(const DesignMatrix& X);
VifReport vif(const Eigen::MatrixXd& X, const std::vector<std::string>& labels);

struct LinkTestResult {
  double intercept = 0.0;
  double beta_hat = 0.0;
  double se_hat = 0.0;
  double p_hat = 0.0;
  double beta_hatsq = 0.0;
  double se_hatsq = 0.0;
  double p_hatsq = 0.0;
  /// p(hat) < 0.01 and p(hatsq) > 0.10.
  bool well_specified = false;
};

/// Pregibon link test: auxiliary logit of y on {1, h, h^2} with h = X beta,
/// robust p-values. Throws DiagnosticError when the auxiliary fit fails.
LinkTestResult link_test(const LogitFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
LinkTestResult link_test(const LogitFit& fit, const DesignMatrix& X, const Eigen::VectorXd& y);

struct RocPoint {
  double fpr;
  double tpr;
};

/// One point per distinct score, thresholds swept downward from (0,0) to
/// (1,1). Throws UndefinedRocError unless both classes occur.
std::vector<RocPoint> roc_curve(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);

/// Trapezoidal area under the curve.
double auc(std::span<const RocPoint> roc);

/// Mann-Whitney concordance probability, ties counted 1/2 (rank-sum route).
double auc_concordance(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);

struct DiagnosticsReport {
  VifReport vif;
  LinkTestResult link_test;
  std::vector<RocPoint> roc;
  double auc = 0.0;
};

DiagnosticsReport diagnose(const LogitFit& fit, const DesignMatrix& X, const Eigen::VectorXd& y);

}  // namespace gapdecomp
