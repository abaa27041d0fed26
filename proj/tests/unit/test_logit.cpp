#include "gapdecomp/errors.hpp"
#include "gapdecomp/logit.hpp"
#include "gapdecomp/rng.hpp"
#include "gapdecomp/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gapdecomp;

namespace {

struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// Intercept plus k-1 standard-normal-ish columns, outcome drawn from `beta`.
Data simulate(std::uint64_t seed, Eigen::Index n, const Eigen::VectorXd& beta) {
  Rng rng(seed, 0);
  Data d{Eigen::MatrixXd(n, beta.size()), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < beta.size(); ++j) d.X(i, j) = 2.0 * rng.uniform() - 1.0 + (j % 2 ? 0.5 : 0.0);
    d.y(i) = rng.bernoulli(oracle::logistic(d.X.row(i).dot(beta))) ? 1.0 : 0.0;
  }
  return d;
}

Data two_by_two() {
  Data d{Eigen::MatrixXd(200, 2), Eigen::VectorXd::Zero(200)};
  for (Eigen::Index i = 0; i < 200; ++i) {
    const bool urban = i < 100;
    d.X(i, 0) = 1.0;
    d.X(i, 1) = urban ? 1.0 : 0.0;
    d.y(i) = urban ? (i < 30 ? 1.0 : 0.0) : (i < 120 ? 1.0 : 0.0);
  }
  return d;
}

Data intercept_only(int ones, int n) {
  Data d{Eigen::MatrixXd::Ones(n, 1), Eigen::VectorXd::Zero(n)};
  for (int i = 0; i < ones; ++i) d.y(i) = 1.0;
  return d;
}

}  // namespace

TEST_CASE("log-likelihood closed forms") {
  const auto d = intercept_only(50, 100);
  CHECK(log_likelihood(Eigen::VectorXd::Zero(1), d.X, d.y) == doctest::Approx(100.0 * std::log(0.5)).epsilon(1e-14));
  CHECK(log_likelihood(Eigen::VectorXd::Zero(1), d.X, d.y) == doctest::Approx(-69.3147).epsilon(1e-6));
  const auto q = intercept_only(25, 100);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, std::log(1.0 / 3.0));
  CHECK(log_likelihood(b, q.X, q.y) == doctest::Approx(25 * std::log(0.25) + 75 * std::log(0.75)).epsilon(1e-13));
  CHECK(log_likelihood(b, q.X, q.y) == doctest::Approx(-56.2335).epsilon(1e-6));
}

TEST_CASE("log-likelihood matches per-row summation") {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    Rng rng(s, 7);
    Eigen::VectorXd beta(4);
    for (int j = 0; j < 4; ++j) beta(j) = 2.0 * rng.uniform() - 1.0;
    const auto d = simulate(s, 50, beta);
    const double ll = log_likelihood(beta, d.X, d.y);
    CHECK(std::abs(ll - oracle::naive_log_likelihood(beta, d.X, d.y)) <= 1e-12 * std::abs(ll));
  }
  const auto d = intercept_only(3, 10);
  CHECK_THROWS_AS(log_likelihood(Eigen::VectorXd::Zero(2), d.X, d.y), ShapeError);
  CHECK_THROWS_AS(score(Eigen::VectorXd::Zero(2), d.X, d.y), ShapeError);
}

TEST_CASE("log-likelihood stays finite far in the tails") {
  Eigen::MatrixXd X(2, 1);
  X << 1.0, -1.0;
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  const double ll = log_likelihood(Eigen::VectorXd::Constant(1, 800.0), X, y);
  CHECK(std::isfinite(ll));
  CHECK(ll == doctest::Approx(0.0));
}

TEST_CASE("score matches central differences") {
  for (std::uint64_t design = 1; design <= 5; ++design) {
    Eigen::VectorXd truth = Eigen::VectorXd::LinSpaced(3, -0.5, 0.8);
    const auto d = simulate(100 + design, 120, truth);
    Rng rng(design, 3);
    for (int point = 0; point < 10; ++point) {
      Eigen::VectorXd beta(3);
      for (int j = 0; j < 3; ++j) beta(j) = 2.0 * rng.uniform() - 1.0;
      const Eigen::VectorXd g = score(beta, d.X, d.y);
      const Eigen::VectorXd fd = oracle::central_difference(
          [&](const Eigen::VectorXd& b) { return log_likelihood(b, d.X, d.y); }, beta, 1e-6);
      CHECK((g - fd).norm() / std::max(g.norm(), 1e-12) < 1e-6);
    }
  }
}

TEST_CASE("score at beta = 0 with balanced outcomes") {
  const auto d = intercept_only(50, 100);
  CHECK(score(Eigen::VectorXd::Zero(1), d.X, d.y)(0) == 0.0);
}

TEST_CASE("fit: intercept-only closed form") {
  const auto d = intercept_only(25, 100);
  const auto fit = fit_logit(d.X, d.y, {"_cons"});
  CHECK(fit.converged);
  CHECK(std::abs(fit.beta(0) - std::log(25.0 / 75.0)) < 1e-8);
  CHECK(fit.beta(0) == doctest::Approx(-1.0986).epsilon(1e-4));
  CHECK(std::abs(score(fit.beta, d.X, d.y)(0)) < 1e-8);
  const Eigen::VectorXd p = predict_probabilities(fit.beta, d.X);
  CHECK((p.array() - 0.25).abs().maxCoeff() < 1e-10);
}

TEST_CASE("fit: saturated 2x2 table") {
  const auto d = two_by_two();
  const auto fit = fit_logit(d.X, d.y, {"_cons", "urban"});
  CHECK(fit.converged);
  CHECK(std::abs(fit.beta(1) - std::log((30.0 / 70.0) / (20.0 / 80.0))) < 1e-8);
  CHECK(fit.beta(1) == doctest::Approx(0.5390).epsilon(1e-4));
  CHECK(std::abs(fit.beta(0) - std::log(20.0 / 80.0)) < 1e-8);
}

TEST_CASE("fit agrees with the pattern-search oracle") {
  Eigen::VectorXd truth(3);
  truth << -0.3, 0.9, -0.6;
  const auto d = simulate(40, 40, truth);
  const auto fit = fit_logit(d.X, d.y, {});
  REQUIRE(fit.converged);
  const Eigen::VectorXd oracle_beta = synth::brute_force_logit(d.X, d.y);
  CHECK((fit.beta - oracle_beta).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("fit: likelihood ascent and invariants") {
  Eigen::VectorXd truth(4);
  truth << 0.2, -1.0, 0.5, 1.5;
  const auto d = simulate(9, 800, truth);
  const auto fit = fit_logit(d.X, d.y, {});
  REQUIRE(fit.converged);
  CHECK(fit.max_abs_score < 1e-8);
  CHECK(score(fit.beta, d.X, d.y).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.log_lik == doctest::Approx(log_likelihood(fit.beta, d.X, d.y)).epsilon(1e-14));
  for (std::size_t i = 1; i < fit.log_lik_trace.size(); ++i)
    CHECK(fit.log_lik_trace[i] >= fit.log_lik_trace[i - 1] - 1e-12 * std::abs(fit.log_lik_trace[i - 1]));
  CHECK((fit.cov_classical - fit.cov_classical.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fit.cov_robust - fit.cov_robust.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.cov_robust.diagonal().minCoeff() >= 0.0);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(fit.cov_robust).info() == Eigen::Success);
  CHECK(std::abs(predict_probabilities(fit.beta, d.X).mean() - d.y.mean()) < 1e-10);
}

TEST_CASE("fit: unconverged when the iteration budget is too small") {
  Eigen::VectorXd truth(3);
  truth << 0.2, -1.0, 2.5;
  const auto d = simulate(2, 300, truth);
  const auto fit = fit_logit(d.X, d.y, {}, {1e-8, 1, 0.0});
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 1);
  CHECK_THROWS_AS(robust_covariance(fit, d.X, d.y), EstimationError);
}

TEST_CASE("fit: input errors") {
  const auto d = intercept_only(1, 1);
  CHECK_THROWS_AS(fit_logit(d.X, d.y, {}), ShapeError);
  auto bad = intercept_only(3, 10);
  bad.y(0) = 0.5;
  CHECK_THROWS_AS(fit_logit(bad.X, bad.y, {}), DataError);
}

TEST_CASE("fit: duplicated column is a collinearity error naming the columns") {
  auto d = two_by_two();
  Eigen::MatrixXd X(d.X.rows(), 3);
  X << d.X, d.X.col(1);
  try {
    fit_logit(X, d.y, {"_cons", "urban", "urban_copy"});
    FAIL("expected a collinearity error");
  } catch (const CollinearityError& e) {
    const auto& cols = e.columns();
    CHECK(std::find(cols.begin(), cols.end(), "urban") != cols.end());
    CHECK(std::find(cols.begin(), cols.end(), "urban_copy") != cols.end());
    CHECK(std::find(cols.begin(), cols.end(), "_cons") == cols.end());
  }
}

TEST_CASE("fit: ridge only changes the information matrix") {
  const auto d = two_by_two();
  const auto plain = fit_logit(d.X, d.y, {"_cons", "urban"});
  const auto ridged = fit_logit(d.X, d.y, {"_cons", "urban"}, {1e-8, 50, 1.0});
  CHECK(ridged.converged);
  CHECK(ridged.ridge == 1.0);
  CHECK((ridged.beta - plain.beta).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(ridged.cov_classical(1, 1) < plain.cov_classical(1, 1));
}

TEST_CASE("switching the base of a binary variable flips its sign") {
  const auto d = two_by_two();
  Eigen::MatrixXd flipped = d.X;
  flipped.col(1) = 1.0 - d.X.col(1).array();
  const auto a = fit_logit(d.X, d.y, {"_cons", "urban"});
  const auto b = fit_logit(flipped, d.y, {"_cons", "rural"});
  CHECK(a.beta(1) == doctest::Approx(-b.beta(1)).epsilon(1e-10));
  CHECK(a.beta(0) + a.beta(1) == doctest::Approx(b.beta(0)).epsilon(1e-10));
  CHECK((predict_probabilities(a.beta, d.X) - predict_probabilities(b.beta, flipped)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("robust covariance equals the explicit triple product") {
  Eigen::MatrixXd X(5, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4;
  Eigen::VectorXd y(5);
  y << 0, 1, 0, 1, 1;
  const auto fit = fit_logit(X, y, {"_cons", "x"});
  REQUIRE(fit.converged);

  double H[2][2] = {{0, 0}, {0, 0}}, M[2][2] = {{0, 0}, {0, 0}};
  for (int i = 0; i < 5; ++i) {
    const double p = oracle::logistic(X(i, 0) * fit.beta(0) + X(i, 1) * fit.beta(1));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        H[a][b] += p * (1 - p) * X(i, a) * X(i, b);
        M[a][b] += (y(i) - p) * (y(i) - p) * X(i, a) * X(i, b);
      }
  }
  const double det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
  const double Hi[2][2] = {{H[1][1] / det, -H[0][1] / det}, {-H[1][0] / det, H[0][0] / det}};
  double V[2][2] = {{0, 0}, {0, 0}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e) V[a][b] += Hi[a][c] * M[c][e] * Hi[e][b];

  const Eigen::MatrixXd robust = robust_covariance(fit, X, y);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CHECK(std::abs(robust(a, b) - V[a][b]) < 1e-12 * std::max(1.0, std::abs(V[a][b])));
      CHECK(std::abs(fit.cov_classical(a, b) - Hi[a][b]) < 1e-12 * std::max(1.0, std::abs(Hi[a][b])));
    }
}

TEST_CASE("robust and classical SE agree under correct specification") {
  Eigen::VectorXd truth(4);
  truth << -1.0, 0.7, -0.4, 0.3;
  const auto d = simulate(314, 100'000, truth);
  const auto fit = fit_logit(d.X, d.y, {});
  REQUIRE(fit.converged);
  const Eigen::VectorXd ratio = fit.robust_se().cwiseQuotient(fit.classical_se());
  CHECK(ratio.minCoeff() >= 0.9);
  CHECK(ratio.maxCoeff() <= 1.1);
}

TEST_CASE("odds ratios and delta-method SE") {
  LogitFit fit;
  fit.labels = {"_cons", "urban", "age=50-54", "none"};
  fit.beta = Eigen::Vector4d(-2.809795, 0.1244415, 2.10275, 0.0);
  fit.cov_robust = Eigen::Vector4d(0.01, 0.0004, 0.09, 0.0025).asDiagonal();
  const auto ors = odds_ratios(fit);
  CHECK(std::abs(ors[1].odds_ratio - 1.132516) / 1.132516 < 5e-6);
  CHECK(std::abs(ors[2].odds_ratio - 8.18866) / 8.18866 < 5e-6);
  CHECK(ors[3].odds_ratio == 1.0);
  CHECK(ors[1].robust_se == doctest::Approx(ors[1].odds_ratio * 0.02).epsilon(1e-14));
  CHECK(ors[2].robust_se == doctest::Approx(ors[2].odds_ratio * 0.3).epsilon(1e-14));
}

TEST_CASE("predicted probabilities") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(-700.0) > 0.0);
  CHECK(logistic(800.0) == 1.0);
  CHECK(log1p_exp(800.0) == doctest::Approx(800.0));
  CHECK(log1p_exp(-800.0) >= 0.0);

  const auto d = two_by_two();
  DesignMatrix design;
  design.columns = {{"", ""}, {"residence", "urban"}};
  design.values = d.X;
  const auto fit = fit_logit(design, d.y);
  CHECK(predict_probabilities(fit, design)(0) == doctest::Approx(0.3).epsilon(1e-10));
  DesignMatrix other = design;
  other.columns[1].category = "rural";
  CHECK_THROWS_AS(predict_probabilities(fit, other), ShapeError);
}

TEST_CASE("significance stars") {
  CHECK(significance_stars(0.001) == "***");
  CHECK(significance_stars(0.03) == "**");
  CHECK(significance_stars(0.07) == "*");
  CHECK(significance_stars(0.5).empty());
  CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
}
