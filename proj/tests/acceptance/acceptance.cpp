// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "gapdecomp/cli.hpp"
#include "gapdecomp/data_model.hpp"
#include "gapdecomp/decomposition.hpp"
#include "gapdecomp/diagnostics.hpp"
#include "gapdecomp/logit.hpp"
#include "gapdecomp/rng.hpp"
#include "gapdecomp/synth.hpp"

#include "oracles.hpp"
#include "regression_tables.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace gapdecomp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

Verdict verdict(bool pass, std::string detail) { return {pass, std::move(detail)}; }

// ---------------------------------------------------------------------------
// 1. Odds-ratio fixtures

Verdict odds_ratio_fixtures() {
  std::size_t checked = 0, skipped = 0, bad = 0;
  double worst = 0.0;
  for (const auto& r : fixtures::kIndia) {
    if ((r.coef > 0.0) != (r.odds_ratio > 1.0)) {
      ++skipped;
      continue;
    }
    const double rel = std::abs(std::exp(r.coef) - r.odds_ratio) / r.odds_ratio;
    worst = std::max(worst, rel);
    ++checked;
    if (!(rel < 5e-6)) {
      ++bad;
      fmt::print("  India {} ({}): relative error {:.3g}\n", r.attribute, r.group, rel);
    }
  }
  double worst_abs = 0.0;
  for (const auto& r : fixtures::kMaharashtra) {
    const double d = std::abs(std::abs(r.coef) - std::abs(std::log(r.odds_ratio)));
    worst_abs = std::max(worst_abs, d);
    ++checked;
    if (!(d < 5e-6)) {
      ++bad;
      fmt::print("  Maharashtra {} ({}): ||coef| - |ln OR|| = {:.3g}\n", r.attribute, r.group, d);
    }
  }
  // Constants: the odds ratio is printed with too few digits for a 5e-6
  // relative match, so they are held to half a unit in the last printed place.
  std::size_t constants = 0;
  auto check_constant = [&](const fixtures::OddsRow& r, const char* table) {
    const double half_unit = 0.5 * std::pow(10.0, -r.or_decimals);
    const double diff = std::abs(std::exp(r.coef) - r.odds_ratio);
    fmt::print("  {} constant ({}): |exp(coef) - OR| = {:.3g} (relative {:.3g}), printed half-unit {:.1g}\n",
               table, r.group, diff, diff / r.odds_ratio, half_unit);
    ++constants;
    if (!(diff <= half_unit)) ++bad;
  };
  for (const auto& r : fixtures::kIndiaConstants) check_constant(r, "India");
  for (const auto& r : fixtures::kMaharashtraConstants) check_constant(r, "Maharashtra");

  const bool spot = std::abs(std::exp(0.1244415) - 1.132516) / 1.132516 < 5e-6 &&
                    std::abs(std::exp(2.10275) - 8.18866) / 8.18866 < 5e-6;
  return verdict(bad == 0 && spot && skipped == 0,
                 fmt::format("{} coefficient rows (worst India relative {:.2g}, worst Maharashtra |.| {:.2g}), "
                             "{} constants at print precision, {} sign-inconsistent rows skipped",
                             checked, worst, worst_abs, constants, skipped));
}

// ---------------------------------------------------------------------------
// 2. Decomposition arithmetic

Verdict decomposition_arithmetic() {
  const double gap = 0.0659178 - 0.1235260;
  const auto pct = percentage_contributions(std::vector<double>{0.0036942, 0.0002918}, gap);
  const bool ok = std::abs(gap - (-0.0576082)) < 5e-8 && std::abs(pct[0] - (-6.4126)) < 5e-4 &&
                  std::abs(pct[1] - (-0.5065)) < 5e-4;
  return verdict(ok, fmt::format("gap {:.7f}, {:.4f}%, {:.4f}%", gap, pct[0], pct[1]));
}

// ---------------------------------------------------------------------------
// 3. Logit correctness

Verdict logit_correctness() {
  double worst_closed = 0.0;
  for (const auto& [ones, n] : std::vector<std::pair<int, int>>{{25, 100}, {1, 3}, {7, 50}, {499, 500}, {300, 1000}}) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    y.head(ones).setOnes();
    const auto fit = fit_logit(X, y, {"_cons"});
    worst_closed = std::max(worst_closed, std::abs(fit.beta(0) - std::log(double(ones) / double(n - ones))));
  }
  Eigen::MatrixXd X2(200, 2);
  Eigen::VectorXd y2(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const bool urban = i < 100;
    X2.row(i) << 1.0, urban ? 1.0 : 0.0;
    y2(i) = urban ? (i < 30 ? 1.0 : 0.0) : (i < 120 ? 1.0 : 0.0);
  }
  const auto table = fit_logit(X2, y2, {"_cons", "urban"});
  const double table_err = std::abs(table.beta(1) - std::log((30.0 / 70.0) / (20.0 / 80.0)));

  double worst_brute = 0.0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Rng rng(seed, 300);
    const auto n = static_cast<Eigen::Index>(60 + rng.below(141));
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    const double b0 = rng.uniform() - 0.5, b1 = 2.0 * rng.uniform() - 1.0, b2 = 2.0 * rng.uniform() - 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      X.row(i) << 1.0, 2.0 * rng.uniform() - 1.0, rng.bernoulli(0.5) ? 1.0 : 0.0;
      y(i) = rng.bernoulli(oracle::logistic(b0 + b1 * X(i, 1) + b2 * X(i, 2))) ? 1.0 : 0.0;
    }
    const auto fit = fit_logit(X, y, {"_cons", "x", "z"});
    const auto brute = synth::brute_force_logit(X, y);
    worst_brute = std::max(worst_brute, (fit.beta - brute).cwiseAbs().maxCoeff());
  }
  return verdict(worst_closed < 1e-8 && table_err < 1e-8 && worst_brute < 1e-4,
                 fmt::format("intercept-only {:.2g}, 2x2 {:.2g}, pattern search max |diff| {:.2g} over 25 instances",
                             worst_closed, table_err, worst_brute));
}

// ---------------------------------------------------------------------------
// 4. Gradient check

Verdict gradient_check() {
  double worst = 0.0;
  for (std::uint64_t design = 0; design < 5; ++design) {
    Rng rng(design, 400);
    const Eigen::Index n = 80 + 40 * static_cast<Eigen::Index>(design), k = 2 + static_cast<Eigen::Index>(design % 3);
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      for (Eigen::Index j = 1; j < k; ++j) X(i, j) = j % 2 ? 2.0 * rng.uniform() - 1.0 : (rng.bernoulli(0.3) ? 1.0 : 0.0);
      y(i) = rng.bernoulli(0.4) ? 1.0 : 0.0;
    }
    for (int point = 0; point < 10; ++point) {
      Eigen::VectorXd b(k);
      for (Eigen::Index j = 0; j < k; ++j) b(j) = 3.0 * rng.uniform() - 1.5;
      const Eigen::VectorXd g = score(b, X, y);
      const Eigen::VectorXd fd = oracle::central_difference(
          [&](const Eigen::VectorXd& t) { return oracle::naive_log_likelihood(t, X, y); }, b, 1e-5);
      worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
  }
  return verdict(worst < 1e-6, fmt::format("max relative error {:.2g} over 50 points", worst));
}

// ---------------------------------------------------------------------------
// 5. Mean calibration

Verdict mean_calibration() {
  double worst = 0.0;
  std::size_t fits = 0;
  auto check = [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    FitOptions o;
    const auto fit = fit_logit(X, y, {}, o);
    if (!fit.converged) return;
    ++fits;
    worst = std::max(worst, std::abs(predict_probabilities(fit.beta, X).mean() - y.mean()));
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed, 500);
    const auto n = static_cast<Eigen::Index>(100 + rng.below(20'000));
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      X.row(i) << 1.0, rng.uniform(), rng.bernoulli(0.2) ? 1.0 : 0.0, rng.bernoulli(0.6) ? 1.0 : 0.0;
      y(i) = rng.bernoulli(oracle::logistic(-1.0 + X(i, 1) - 0.5 * X(i, 2) + 0.8 * X(i, 3))) ? 1.0 : 0.0;
    }
    check(X, y);
  }
  auto dgp = synth::DataGeneratingProcess::load(fs::path(GAPDECOMP_PRESET_DIR) / "nfhs_like_dgp.json");
  const auto table = synth::generate_table(dgp, *dgp.seed);
  for (const auto& label : dgp.labels) {
    const auto sample = build_estimation_sample(table.select_group(label), dgp.base_map());
    check(sample.X.values, sample.y);
  }
  return verdict(fits == 22 && worst < 1e-10,
                 fmt::format("{} converged fits, max |mean(p) - mean(y)| {:.2g}", fits, worst));
}

// ---------------------------------------------------------------------------
// 6. Decomposition identities

synth::DgpVariable dgp_variable(std::string name, std::vector<std::string> cats, std::vector<double> p1,
                                std::vector<double> p2, std::map<std::string, double> effects) {
  synth::DgpVariable v;
  v.name = std::move(name);
  v.categories = std::move(cats);
  v.base = v.categories.front();
  v.probs = {std::move(p1), std::move(p2)};
  v.effects = {effects, effects};
  return v;
}

synth::DataGeneratingProcess identity_dgp(std::size_t n1, std::size_t n2, double scale = 1.0) {
  synth::DataGeneratingProcess d;
  d.outcome = "y";
  d.group = "g";
  d.labels = {"A", "B"};
  d.sizes = {n1, n2};
  d.intercept = {scale == 1.0 ? -1.0 : 0.0, scale == 1.0 ? -0.5 : 0.0};
  d.variables = {
      dgp_variable("u", {"u0", "u1"}, {0.8, 0.2}, {0.2, 0.8}, {{"u1", 0.6 * scale}}),
      dgp_variable("v", {"v0", "v1", "v2"}, {0.6, 0.3, 0.1}, {0.1, 0.3, 0.6},
                   {{"v1", -0.4 * scale}, {"v2", 0.9 * scale}}),
  };
  return d;
}

Verdict fairlie_identities() {
  // Telescoping with fixed ordering.
  double telescoping = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto [g1, g2] = synth::generate_microdata(identity_dgp(1500, 1500), seed);
    FairlieOptions o;
    o.replications = 5;
    o.ordering = Ordering::Fixed;
    o.seed = seed;
    const auto r = fairlie_decompose(g1, g2, o);
    double sum = 0.0;
    for (const auto& c : r.contributions) sum += c.coef;
    telescoping = std::max(telescoping, std::abs(sum - r.total_explained));
    for (std::size_t rep = 0; rep < r.replication_contributions.size(); ++rep) {
      double s = 0.0;
      for (const double c : r.replication_contributions[rep]) s += c;
      telescoping = std::max(telescoping, std::abs(s - r.matched_explained[rep]));
    }
  }
  // Identical groups.
  double identical = 0.0;
  {
    auto [g1, g2] = synth::generate_microdata(identity_dgp(800, 800), 3);
    g2 = g1;
    g2.label = "B";
    for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      FairlieOptions o;
      o.seed = seed;
      o.replications = 5;
      for (const auto& c : fairlie_decompose(g1, g2, o).contributions) identical = std::max(identical, std::abs(c.coef));
    }
  }
  // Equal-N oracle.
  double oracle_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto [g1, g2] = synth::generate_microdata(identity_dgp(20, 20), seed);
    Rng rng(seed, 600);
    Eigen::VectorXd beta(g1.X.values.cols());
    for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = 3.0 * rng.uniform() - 1.5;
    FairlieOptions o;
    o.replications = 1;
    o.ordering = Ordering::Fixed;
    const auto r = fairlie_decompose_with_beta(g1, g2, beta, o);
    const auto exact = synth::exact_fairlie_small(g1, g2, beta);
    for (std::size_t u = 0; u < exact.size(); ++u)
      oracle_gap = std::max(oracle_gap, std::abs(r.contributions[u].coef - exact[u]));
  }
  // Near-linear regime.
  double linear_rel = 0.0;
  {
    const auto [g1, g2] = synth::generate_microdata(identity_dgp(400'000, 400'000, 0.03), 5);
    FairlieOptions o;
    o.replications = 5;
    o.seed = 9;
    const auto fairlie = fairlie_decompose(g1, g2, o);
    const auto linear = oaxaca_linear(g1, g2);
    for (std::size_t u = 0; u < linear.per_variable.size(); ++u) {
      const double lin = linear.per_variable[u].explained;
      linear_rel = std::max(linear_rel, std::abs(fairlie.contributions[u].coef - lin) / std::abs(lin));
    }
  }
  return verdict(telescoping < 1e-10 && identical == 0.0 && oracle_gap < 1e-12 && linear_rel < 0.02,
                 fmt::format("telescoping {:.2g}, identical-groups max |c| {:.2g}, oracle {:.2g}, "
                             "near-linear relative {:.3g}",
                             telescoping, identical, oracle_gap, linear_rel));
}

// ---------------------------------------------------------------------------
// 7. Recovery study

Verdict recovery_study() {
  synth::DataGeneratingProcess d;
  d.outcome = "y";
  d.group = "g";
  d.labels = {"A", "B"};
  d.sizes = {50'000, 1};
  d.intercept = {-2.0, 0.0};
  d.variables = {
      dgp_variable("residence", {"Rural", "Urban"}, {0.65, 0.35}, {0.5, 0.5}, {{"Urban", 0.12}}),
      dgp_variable("age", {"15-24", "25-34", "35-44", "45-54"}, {0.3, 0.3, 0.2, 0.2}, {0.25, 0.25, 0.25, 0.25},
                   {{"25-34", 0.45}, {"35-44", 0.9}, {"45-54", 1.4}}),
      dgp_variable("wealth", {"Low", "Mid", "High"}, {0.4, 0.35, 0.25}, {1.0 / 3, 1.0 / 3, 1.0 / 3},
                   {{"Mid", 0.06}, {"High", -0.15}}),
      dgp_variable("insured", {"No", "Yes"}, {0.75, 0.25}, {0.5, 0.5}, {{"Yes", 0.09}}),
  };
  std::size_t inside = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto table = synth::generate_table(d, seed).select_group("A");
    const auto design = encode_design(table, d.base_map());
    const auto fit = fit_logit(design, outcome_vector(table));
    if (!fit.converged) return verdict(false, fmt::format("fit for seed {} did not converge", seed));
    const auto beta = d.true_beta(0, design);
    const Eigen::VectorXd se = fit.robust_se();
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      ++total;
      if (std::abs(fit.beta(j) - beta(j)) <= 1.959963984540054 * se(j)) ++inside;
    }
  }
  const double share = static_cast<double>(inside) / static_cast<double>(total);
  return verdict(share >= 0.9, fmt::format("{} of {} true coefficients covered ({:.1f}%)", inside, total, 100 * share));
}

// ---------------------------------------------------------------------------
// 8. Diagnostics

struct Sim {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Sim link_sample(std::uint64_t seed, Eigen::Index n, double quad) {
  Rng rng(seed, 800);
  Sim s{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = 2.0 * rng.uniform() - 1.0;
    const double x2 = rng.bernoulli(0.4) ? 1.0 : 0.0;
    s.X.row(i) << 1.0, x1, x2;
    s.y(i) = rng.bernoulli(oracle::logistic(-0.5 + 1.2 * x1 + 0.8 * x2 + quad * x1 * x1)) ? 1.0 : 0.0;
  }
  return s;
}

Verdict diagnostics_suite() {
  double null_dev = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed, 801);
    const Eigen::Index n = 10'000;
    Eigen::VectorXd y(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = rng.bernoulli(0.3) ? 1.0 : 0.0;
      s(i) = rng.uniform();
    }
    null_dev = std::max(null_dev, std::abs(auc(roc_curve(y, s)) - 0.5));
  }

  double auc_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    Rng rng(seed, 802);
    const auto n = static_cast<Eigen::Index>(2 + rng.below(499));
    const double grid = static_cast<double>(2 + rng.below(60));
    Eigen::VectorXd y(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = rng.bernoulli(0.4) ? 1.0 : 0.0;
      s(i) = std::round((rng.uniform() + 0.25 * y(i)) * grid) / grid;
    }
    y(0) = 1.0;
    y(1) = 0.0;
    const double a = auc(roc_curve(y, s));
    auc_gap = std::max({auc_gap, std::abs(a - auc_concordance(y, s)), std::abs(a - oracle::pairwise_auc(y, s))});
  }

  int accepted = 0, rejected = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto good = link_sample(seed, 50'000, 0.0);
    const auto fit_good = fit_logit(good.X, good.y, {"_cons", "x1", "x2"});
    accepted += link_test(fit_good, good.X, good.y).well_specified ? 1 : 0;
    const auto bad = link_sample(seed + 1000, 50'000, 3.0);
    const auto fit_bad = fit_logit(bad.X, bad.y, {"_cons", "x1", "x2"});
    rejected += link_test(fit_bad, bad.X, bad.y).well_specified ? 0 : 1;
  }
  return verdict(null_dev <= 0.02 && auc_gap < 1e-12 && accepted >= 90 && rejected >= 90,
                 fmt::format("null AUC max |AUC - 0.5| {:.3g}; trapezoid vs concordance {:.2g} on 300 instances; "
                             "link test accepts {}/100 correct, rejects {}/100 quadratic",
                             null_dev, auc_gap, accepted, rejected));
}

// ---------------------------------------------------------------------------
// 9. Perfect predictor

Verdict perfect_predictor() {
  const std::size_t kept = 5482, flagged = 15;
  Rng rng(2021, 900);
  std::vector<CategoricalVariable> vars{
      {"household_size", {"1-5", "6-10", "11-15", "16+"}, "1-5"},
      {"residence", {"Rural", "Urban"}, "Rural"},
  };
  std::vector<std::uint8_t> y;
  std::vector<std::vector<std::uint32_t>> codes(2);
  for (std::size_t i = 0; i < kept + flagged; ++i) {
    const bool large = i % 366 == 0 && i / 366 < flagged;
    const std::uint32_t hh = large ? 3u : static_cast<std::uint32_t>(rng.categorical(std::vector<double>{0.6, 0.9, 1.0}));
    const std::uint32_t res = rng.bernoulli(0.45) ? 1u : 0u;
    codes[0].push_back(hh);
    codes[1].push_back(res);
    y.push_back(large ? 0 : (rng.bernoulli(oracle::logistic(-3.0 + 0.3 * hh + 0.1 * res)) ? 1 : 0));
  }
  const MicrodataTable table("morbidity", vars, y, codes);
  const auto detected = detect_perfect_predictors(table);
  const auto sample = build_estimation_sample(table, {{"household_size", "1-5"}, {"residence", "Rural"}});
  const auto fit = fit_logit(sample.X, sample.y);
  const bool ok = detected.size() == 1 && detected[0].category == "16+" && detected[0].rows == flagged &&
                  detected[0].direction == PredictorDirection::AllZero && sample.perfect_predictors.size() == 1 &&
                  static_cast<std::size_t>(sample.X.values.rows()) == kept && fit.converged && fit.n == kept;
  std::string cats;
  for (const auto& c : sample.X.columns) cats += " " + c.label();
  return verdict(ok, fmt::format("{} of {} rows dropped ({}={}, all outcomes 0); estimation n = {}; columns:{}",
                                 detected.empty() ? 0 : detected[0].rows, kept + flagged,
                                 detected.empty() ? "?" : detected[0].variable,
                                 detected.empty() ? "?" : detected[0].category, sample.X.values.rows(), cats));
}

// ---------------------------------------------------------------------------
// 10. Determinism across thread counts

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "gapdecomp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Verdict determinism() {
  const auto dir = oracle::temp_dir("acceptance_determinism");
  const fs::path csv = dir / "nfhs_like.csv";
  const auto sim = cli_run({"simulate", "--dgp", (fs::path(GAPDECOMP_PRESET_DIR) / "nfhs_like_dgp.json").string(),
                            "--out", csv.string()});
  if (sim.code != 0) return verdict(false, "simulate failed: " + sim.err);
  auto cfg = nlohmann::json::parse(oracle::read_file(fs::path(GAPDECOMP_PRESET_DIR) / "nfhs_like_analysis.json"));
  cfg["data"] = csv.string();
  const fs::path config = dir / "analysis.json";
  oracle::write_file(config, cfg.dump());

  std::vector<std::string> outputs;
  for (const char* threads : {"1", "2", "8"}) {
    ::setenv("GAPDECOMP_THREADS", threads, 1);
    for (const char* format : {"text", "json"}) {
      const auto r = cli_run({"report", "--config", config.string(), "--format", format});
      if (r.code != 0) return verdict(false, fmt::format("report failed with {} threads: {}", threads, r.err));
      outputs.push_back(r.out);
    }
  }
  ::unsetenv("GAPDECOMP_THREADS");
  const bool same = outputs[0] == outputs[2] && outputs[2] == outputs[4] && outputs[1] == outputs[3] &&
                    outputs[3] == outputs[5];
  return verdict(same, fmt::format("report (text {} bytes, json {} bytes) on the preset with R = {} under "
                                   "GAPDECOMP_THREADS = 1, 2, 8",
                                   outputs[0].size(), outputs[1].size(), cfg["decomposition"]["replications"].dump()));
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "odds-ratio fixtures", 1.0, odds_ratio_fixtures},
      {2, "decomposition arithmetic", 1.0, decomposition_arithmetic},
      {3, "logit correctness", 30.0, logit_correctness},
      {4, "gradient check", 0.0, gradient_check},
      {5, "mean calibration", 0.0, mean_calibration},
      {6, "decomposition identities", 0.0, fairlie_identities},
      {7, "recovery study", 120.0, recovery_study},
      {8, "diagnostics", 0.0, diagnostics_suite},
      {9, "perfect-predictor handling", 0.0, perfect_predictor},
      {10, "determinism across thread counts", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = v.pass;
    std::string timing = fmt::format("{:.2f} s", seconds);
    if (c.budget_seconds > 0.0) {
      timing += fmt::format(" of {:.0f} s", c.budget_seconds);
      if (seconds >= c.budget_seconds) pass = false;
    }
    fmt::print("{} criterion {}: {} - {} [{}]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail, timing);
    std::fflush(stdout);
    failures += pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
