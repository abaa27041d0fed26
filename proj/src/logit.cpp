#include "gapdecomp/logit.hpp"

#include "gapdecomp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gapdecomp {

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log1p_exp(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

std::string significance_stars(double p) {
  if (!(p == p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

namespace {

void check_shapes(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (beta.size() != X.cols())
    throw ShapeError("coefficient length " + std::to_string(beta.size()) + " does not match " +
                     std::to_string(X.cols()) + " design columns");
  if (y.size() != X.rows())
    throw ShapeError("outcome length " + std::to_string(y.size()) + " does not match " +
                     std::to_string(X.rows()) + " design rows");
}

void check_binary(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0) throw DataError("outcome must be 0 or 1");
}

Eigen::VectorXd probabilities(const Eigen::VectorXd& eta) {
  return eta.unaryExpr([](double t) { return logistic(t); });
}

double log_lik_from_eta(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  // Neumaier summation keeps rounding well under the step-acceptance slack.
  double sum = 0.0, carry = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double term = y(i) * eta(i) - log1p_exp(eta(i));
    const double t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + carry;
}

Eigen::MatrixXd information(const Eigen::MatrixXd& X, const Eigen::VectorXd& p, double ridge) {
  const Eigen::VectorXd w = p.array() * (1.0 - p.array());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  H.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose() * w.cwiseSqrt().asDiagonal());
  H = H.selfadjointView<Eigen::Lower>();
  if (ridge > 0.0) H.diagonal().array() += ridge;
  return H;
}

// Relative pivot below which the Jacobi-scaled information matrix is treated
// as singular.
constexpr double kSingularPivot = 1e-12;

// LDLT of the information matrix after unit-diagonal scaling. Throws a
// CollinearityError naming the columns in the near-null direction.
class InformationSolver {
 public:
  InformationSolver(const Eigen::MatrixXd& H, const std::vector<std::string>& labels) {
    const Eigen::Index k = H.rows();
    scale_ = H.diagonal().cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!(scale_(j) > 0.0)) fail(H, labels, "column carries no information");
    }
    const Eigen::MatrixXd S = scale_.cwiseInverse().asDiagonal() * H * scale_.cwiseInverse().asDiagonal();
    ldlt_.compute(S);
    const Eigen::VectorXd d = ldlt_.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    Eigen::Index at = 0;
    const double dmin = d.minCoeff(&at);
    if (ldlt_.info() != Eigen::Success || !(dmin > kSingularPivot * dmax)) {
      std::ostringstream msg;
      msg << "weighted normal matrix is singular (smallest scaled pivot " << dmin << ")";
      fail(H, labels, msg.str());
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    return scale_.cwiseInverse().asDiagonal() *
           ldlt_.solve(scale_.cwiseInverse().asDiagonal() * rhs);
  }

  Eigen::MatrixXd inverse() const {
    const auto k = scale_.size();
    return solve_matrix(Eigen::MatrixXd::Identity(k, k));
  }

  Eigen::MatrixXd solve_matrix(const Eigen::MatrixXd& rhs) const {
    return scale_.cwiseInverse().asDiagonal() *
           ldlt_.solve(scale_.cwiseInverse().asDiagonal() * rhs);
  }

 private:
  [[noreturn]] static void fail(const Eigen::MatrixXd& H, const std::vector<std::string>& labels,
                                const std::string& why) {
    Eigen::VectorXd scale = H.diagonal().cwiseMax(0.0).cwiseSqrt();
    std::vector<std::string> involved;
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
      if (!(scale(j) > 0.0)) {
        involved.push_back(j < static_cast<Eigen::Index>(labels.size()) ? labels[j]
                                                                          : std::to_string(j));
        scale(j) = 1.0;
      }
    }
    if (involved.empty()) {
      const Eigen::MatrixXd S = scale.cwiseInverse().asDiagonal() * H * scale.cwiseInverse().asDiagonal();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
      const Eigen::VectorXd v = eig.eigenvectors().col(0);
      const double vmax = v.cwiseAbs().maxCoeff();
      for (Eigen::Index j = 0; j < v.size(); ++j)
        if (std::abs(v(j)) > 1e-3 * vmax)
          involved.push_back(j < static_cast<Eigen::Index>(labels.size()) ? labels[j]
                                                                            : std::to_string(j));
    }
    std::string msg = why + "; collinear columns:";
    for (const auto& c : involved) msg += " " + c;
    throw CollinearityError(msg, involved);
  }

  Eigen::VectorXd scale_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& resid) {
  const Eigen::MatrixXd S = resid.asDiagonal() * X;  // rows are s_i'
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  meat.selfadjointView<Eigen::Lower>().rankUpdate(S.transpose());
  meat = meat.selfadjointView<Eigen::Lower>();
  Eigen::MatrixXd V = bread * meat * bread;
  return 0.5 * (V + V.transpose());
}

}  // namespace

double log_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y) {
  check_shapes(beta, X, y);
  return log_lik_from_eta(X * beta, y);
}

Eigen::VectorXd score(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y) {
  check_shapes(beta, X, y);
  return X.transpose() * (y - probabilities(X * beta));
}

LogitFit fit_logit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   std::vector<std::string> labels, const FitOptions& options) {
  const Eigen::Index k = X.cols();
  const Eigen::Index n = X.rows();
  if (y.size() != n) throw ShapeError("outcome length does not match design rows");
  if (n <= k)
    throw ShapeError("need more rows (" + std::to_string(n) + ") than columns (" +
                     std::to_string(k) + ")");
  if (labels.empty())
    for (Eigen::Index j = 0; j < k; ++j) labels.push_back("x" + std::to_string(j));
  if (static_cast<Eigen::Index>(labels.size()) != k) throw ShapeError("one label per column required");
  if (options.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  check_binary(y);

  LogitFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.ridge = options.ridge;
  fit.labels = std::move(labels);
  fit.beta = Eigen::VectorXd::Zero(k);

  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p = probabilities(eta);
  double ll = log_lik_from_eta(eta, y);
  fit.log_lik_trace.push_back(ll);
  Eigen::VectorXd grad = X.transpose() * (y - p);

  // Slack for comparing log-likelihoods that differ only by rounding.
  auto slack = [&](double value) { return 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(value) + 1.0); };

  for (;;) {
    fit.max_abs_score = grad.cwiseAbs().maxCoeff();
    if (fit.max_abs_score < options.tol) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= options.max_iter) break;

    const InformationSolver solver(information(X, p, options.ridge), fit.labels);
    const Eigen::VectorXd step = solver.solve(grad);

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate, cand_eta;
    double cand_ll = 0.0;
    for (int halving = 0; halving <= 10; ++halving) {
      candidate = fit.beta + t * step;
      cand_eta = X * candidate;
      cand_ll = log_lik_from_eta(cand_eta, y);
      if (std::isfinite(cand_ll) && cand_ll >= ll - slack(ll)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw NonConvergenceError("log-likelihood decreased after 10 step halvings at iteration " +
                                std::to_string(fit.iterations + 1));

    fit.beta = candidate;
    eta = cand_eta;
    ll = cand_ll;
    p = probabilities(eta);
    grad = X.transpose() * (y - p);
    ++fit.iterations;
    fit.log_lik_trace.push_back(ll);
  }

  fit.log_lik = ll;
  const InformationSolver solver(information(X, p, options.ridge), fit.labels);
  fit.cov_classical = solver.inverse();
  fit.cov_classical = 0.5 * (fit.cov_classical + fit.cov_classical.transpose()).eval();
  fit.cov_robust = sandwich(fit.cov_classical, X, y - p);
  return fit;
}

LogitFit fit_logit(const DesignMatrix& X, const Eigen::VectorXd& y, const FitOptions& options) {
  return fit_logit(X.values, y, X.labels(), options);
}

Eigen::MatrixXd robust_covariance(const LogitFit& fit, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y) {
  if (!fit.converged) throw EstimationError("robust covariance requires a converged fit");
  check_shapes(fit.beta, X, y);
  const Eigen::VectorXd p = probabilities(X * fit.beta);
  const InformationSolver solver(information(X, p, fit.ridge), fit.labels);
  return sandwich(solver.inverse(), X, y - p);
}

Eigen::VectorXd LogitFit::classical_se() const { return cov_classical.diagonal().cwiseMax(0.0).cwiseSqrt(); }

Eigen::VectorXd LogitFit::robust_se() const { return cov_robust.diagonal().cwiseMax(0.0).cwiseSqrt(); }

Eigen::VectorXd LogitFit::robust_p_values() const {
  const Eigen::VectorXd se = robust_se();
  Eigen::VectorXd out(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    out(j) = se(j) > 0.0 ? normal_two_sided_p(beta(j) / se(j)) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<OddsRatio> odds_ratios(const LogitFit& fit) {
  const Eigen::VectorXd se = fit.robust_se();
  std::vector<OddsRatio> out;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    const double odds = std::exp(fit.beta(j));
    out.push_back({j < static_cast<Eigen::Index>(fit.labels.size()) ? fit.labels[j] : std::string{},
                   odds, odds * se(j)});
  }
  return out;
}

Eigen::VectorXd predict_probabilities(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X) {
  if (beta.size() != X.cols()) throw ShapeError("coefficient length does not match design columns");
  return probabilities(X * beta);
}

Eigen::VectorXd predict_probabilities(const LogitFit& fit, const DesignMatrix& X) {
  if (X.labels() != fit.labels) throw ShapeError("design columns do not match the fitted model");
  return predict_probabilities(fit.beta, X.values);
}

}  // namespace gapdecomp
