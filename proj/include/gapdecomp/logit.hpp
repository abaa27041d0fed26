#pragma once

#include "gapdecomp/data_model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace gapdecomp {

struct FitOptions {
  double tol = 1e-8;  // sup-norm of the score
  int max_iter = 50;
  double ridge = 0.0;  // added to the diagonal of the information matrix
};

struct LogitFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_classical;
  Eigen::MatrixXd cov_robust;
  double log_lik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t n = 0;
  double ridge = 0.0;
  double max_abs_score = 0.0;
  std::vector<std::string> labels;
  /// Log-likelihood after each accepted step, starting at beta = 0.
  std::vector<double> log_lik_trace;

  Eigen::VectorXd classical_se() const;
  Eigen::VectorXd robust_se() const;
  /// Two-sided normal p-values of the robust Wald statistics.
  Eigen::VectorXd robust_p_values() const;
};

/// Logistic CDF, evaluated without overflow for any finite argument.
double logistic(double t);
/// log(1 + e^t), stable for large |t|.
double log1p_exp(double t);

/// Sum of y ln p + (1-y) ln(1-p) with p = F(X beta), using
/// y*eta - log(1 + e^eta) so that p is never formed.
double log_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y);

/// X'(y - p).
Eigen::VectorXd score(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y);

/// Maximum likelihood by IRLS from beta = 0 with step halving (at most 10
/// halvings per step). Throws CollinearityError when the weighted normal
/// matrix is singular and NonConvergenceError when no halving recovers an
/// ascent. Hitting max_iter returns an unconverged fit.
LogitFit fit_logit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   std::vector<std::string> labels, const FitOptions& options = {});
LogitFit fit_logit(const DesignMatrix& X, const Eigen::VectorXd& y, const FitOptions& options = {});

/// Sandwich H^-1 (sum_i s_i s_i') H^-1 with s_i = x_i (y_i - p_i) and
/// H = X'WX (+ ridge). Requires a converged fit.
Eigen::MatrixXd robust_covariance(const LogitFit& fit, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y);

struct OddsRatio {
  std::string label;
  double odds_ratio;
  double robust_se;  // delta method: OR * SE(beta)
};

std::vector<OddsRatio> odds_ratios(const LogitFit& fit);

/// F(X beta). Throws ShapeError when the design's columns differ from the fit's.
Eigen::VectorXd predict_probabilities(const LogitFit& fit, const DesignMatrix& X);
Eigen::VectorXd predict_probabilities(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X);

/// Two-sided standard normal tail probability of |z|.
double normal_two_sided_p(double z);

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.1, else "".
std::string significance_stars(double p);

}  // namespace gapdecomp
