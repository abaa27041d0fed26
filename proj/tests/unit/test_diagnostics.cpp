#include "gapdecomp/diagnostics.hpp"
#include "gapdecomp/errors.hpp"
#include "gapdecomp/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gapdecomp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

struct Sim {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Sim logit_sample(std::uint64_t seed, Eigen::Index n, double quad = 0.0) {
  Rng rng(seed, 0);
  Sim s{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = 2.0 * rng.uniform() - 1.0;
    const double x2 = rng.bernoulli(0.4) ? 1.0 : 0.0;
    s.X.row(i) << 1.0, x1, x2;
    const double eta = -0.5 + 1.2 * x1 + 0.8 * x2 + quad * x1 * x1;
    s.y(i) = rng.bernoulli(oracle::logistic(eta)) ? 1.0 : 0.0;
  }
  return s;
}

}  // namespace

TEST_CASE("VIF of orthogonal dummies is 1") {
  Eigen::MatrixXd X(8, 3);
  X << 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1;
  const auto r = vif(X, {"_cons", "a", "b"});
  REQUIRE(r.columns.size() == 2);
  CHECK(r.columns[0].vif == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.columns[1].vif == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(r.collinearity_warning);
}

TEST_CASE("duplicated column has infinite VIF and a warning") {
  Eigen::MatrixXd X(6, 3);
  X << 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0;
  const auto r = vif(X, {"_cons", "a", "a_copy"});
  CHECK(std::isinf(r.columns[0].vif));
  CHECK(std::isinf(r.columns[1].vif));
  CHECK(r.collinearity_warning);
}

TEST_CASE("VIF matches the normal-equations oracle and ignores column scale") {
  Rng rng(5, 0);
  const Eigen::Index n = 300;
  Eigen::MatrixXd X(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    X.row(i) << 1.0, a, 0.7 * a + 0.3 * b, 0.5 * b + 0.4 * c - 0.2 * a;
  }
  const auto r = vif(X, {"_cons", "x1", "x2", "x3"});
  for (Eigen::Index j = 1; j < 4; ++j) {
    Eigen::MatrixXd others(n, 2);
    Eigen::Index c = 0;
    for (Eigen::Index m = 1; m < 4; ++m)
      if (m != j) others.col(c++) = X.col(m);
    const double expected = 1.0 / (1.0 - oracle::r_squared(X.col(j), others));
    CHECK(std::abs(r.columns[static_cast<std::size_t>(j - 1)].vif - expected) < 1e-10 * expected);
    CHECK(r.columns[static_cast<std::size_t>(j - 1)].vif >= 1.0 - 1e-9);
  }
  Eigen::MatrixXd scaled = X;
  scaled.col(2) *= 37.5;
  const auto s = vif(scaled, {"_cons", "x1", "x2", "x3"});
  for (std::size_t j = 0; j < 3; ++j) CHECK(s.columns[j].vif == doctest::Approx(r.columns[j].vif).epsilon(1e-10));
}

TEST_CASE("ROC: perfect separation, constant scores, single class") {
  const auto y = vec({0, 0, 1, 1});
  const auto roc = roc_curve(y, vec({0.1, 0.2, 0.8, 0.9}));
  bool through_corner = false;
  for (const auto& p : roc) through_corner |= (p.fpr == 0.0 && p.tpr == 1.0);
  CHECK(through_corner);
  CHECK(auc(roc) == 1.0);

  const auto flat = roc_curve(y, vec({0.3, 0.3, 0.3, 0.3}));
  REQUIRE(flat.size() == 2);
  CHECK(flat[0].fpr == 0.0);
  CHECK(flat[0].tpr == 0.0);
  CHECK(flat[1].fpr == 1.0);
  CHECK(flat[1].tpr == 1.0);
  CHECK(auc(flat) == 0.5);

  CHECK_THROWS_AS(roc_curve(vec({1, 1, 1}), vec({0.1, 0.2, 0.3})), UndefinedRocError);
}

TEST_CASE("ROC of a six-observation example matches every threshold") {
  const auto y = vec({1, 0, 1, 1, 0, 0});
  const auto s = vec({0.9, 0.8, 0.8, 0.4, 0.3, 0.1});
  const auto roc = roc_curve(y, s);
  const auto expected = oracle::exhaustive_roc(y, s);
  REQUIRE(roc.size() == expected.size());
  for (std::size_t i = 0; i < roc.size(); ++i) {
    CHECK(roc[i].fpr == doctest::Approx(expected[i].first).epsilon(1e-15));
    CHECK(roc[i].tpr == doctest::Approx(expected[i].second).epsilon(1e-15));
  }
  CHECK(auc(roc) == doctest::Approx(oracle::pairwise_auc(y, s)).epsilon(1e-15));
}

TEST_CASE("trapezoid AUC equals concordance on random instances") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Rng rng(seed, 11);
    const auto n = static_cast<Eigen::Index>(2 + rng.below(499));
    Eigen::VectorXd y(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = rng.bernoulli(0.35) ? 1.0 : 0.0;
      s(i) = std::round((rng.uniform() + 0.3 * y(i)) * 20.0) / 20.0;  // coarse grid forces ties
    }
    y(0) = 1.0;
    y(1) = 0.0;
    const double trapezoid = auc(roc_curve(y, s));
    const double concordance = auc_concordance(y, s);
    const double pairwise = oracle::pairwise_auc(y, s);
    CHECK(std::abs(trapezoid - pairwise) < 1e-12);
    CHECK(std::abs(concordance - pairwise) < 1e-12);
    const auto roc = roc_curve(y, s);
    for (std::size_t i = 1; i < roc.size(); ++i) {
      CHECK(roc[i].fpr >= roc[i - 1].fpr);
      CHECK(roc[i].tpr >= roc[i - 1].tpr);
    }
  }
}

TEST_CASE("AUC of scores independent of the outcome") {
  Rng rng(77, 0);
  const Eigen::Index n = 10'000;
  Eigen::VectorXd y(n), s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = rng.bernoulli(0.3) ? 1.0 : 0.0;
    s(i) = rng.uniform();
  }
  CHECK(std::abs(auc(roc_curve(y, s)) - 0.5) <= 0.02);
}

TEST_CASE("link test on a constant prediction is a diagnostic error") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(40, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(40);
  y.head(10).setOnes();
  const auto fit = fit_logit(X, y, {"_cons"});
  CHECK_THROWS_AS(link_test(fit, X, y), DiagnosticError);
}

TEST_CASE("link test under correct specification at n = 100,000") {
  const auto s = logit_sample(2024, 100'000);
  const auto fit = fit_logit(s.X, s.y, {"_cons", "x1", "x2"});
  const auto lt = link_test(fit, s.X, s.y);
  CHECK(std::abs(lt.beta_hat - 1.0) < 0.05);
  CHECK(std::abs(lt.beta_hatsq) < 0.05);
  CHECK(lt.p_hat < 0.01);
}

TEST_CASE("link test flags a strong omitted quadratic") {
  const auto s = logit_sample(7, 20'000, 3.0);
  const auto fit = fit_logit(s.X, s.y, {"_cons", "x1", "x2"});
  const auto lt = link_test(fit, s.X, s.y);
  CHECK(lt.p_hatsq < 0.05);
  CHECK_FALSE(lt.well_specified);
}

TEST_CASE("diagnose bundles every check") {
  const auto s = logit_sample(3, 5'000);
  DesignMatrix X;
  X.columns = {{"", ""}, {"x", "1"}, {"z", "1"}};
  X.values = s.X;
  const auto fit = fit_logit(X, s.y);
  const auto d = diagnose(fit, X, s.y);
  CHECK(d.vif.columns.size() == 2);
  CHECK(d.auc > 0.5);
  CHECK(d.auc == doctest::Approx(auc_concordance(s.y, predict_probabilities(fit.beta, s.X))).epsilon(1e-12));
  CHECK(d.roc.front().fpr == 0.0);
  CHECK(d.roc.back().tpr == 1.0);
}
