#include "gapdecomp/decomposition.hpp"

#include "gapdecomp/errors.hpp"
#include "gapdecomp/parallel.hpp"
#include "gapdecomp/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gapdecomp {

std::pair<GroupSample, GroupSample> make_group_samples(const MicrodataTable& table,
                                                       const std::string& label1,
                                                       const std::string& label2,
                                                       const BaseMap& base_map) {
  if (label1 == label2) throw ConfigError("the two group labels must differ");
  const MicrodataTable pooled = table.select_groups({label1, label2});
  const DesignMatrix X = encode_design(pooled, base_map);
  const auto& group = *pooled.group();
  const auto code1 = group.index_of(label1);

  std::vector<Eigen::Index> rows1, rows2;
  for (std::size_t i = 0; i < pooled.rows(); ++i)
    (pooled.group_codes()[i] == code1 ? rows1 : rows2).push_back(static_cast<Eigen::Index>(i));
  if (rows1.empty() || rows2.empty()) throw DataError("each group needs at least one row");

  auto take = [&](const std::string& label, const std::vector<Eigen::Index>& rows) {
    GroupSample g;
    g.label = label;
    g.X.columns = X.columns;
    g.X.base_map = X.base_map;
    g.X.dropped = X.dropped;
    g.X.values = X.values(rows, Eigen::all);
    g.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      g.y(static_cast<Eigen::Index>(i)) = pooled.outcome(static_cast<std::size_t>(rows[i]));
      g.X.source_rows.push_back(static_cast<std::size_t>(rows[i]));
    }
    return g;
  };
  return {take(label1, rows1), take(label2, rows2)};
}

namespace {

void check_harmonized(const GroupSample& g1, const GroupSample& g2) {
  if (g1.X.columns != g2.X.columns) throw ShapeError("group designs have different columns");
  if (g1.n() == 0 || g2.n() == 0) throw DataError("each group needs at least one row");
  if (static_cast<std::size_t>(g1.X.values.rows()) != g1.n() ||
      static_cast<std::size_t>(g2.X.values.rows()) != g2.n())
    throw ShapeError("design rows do not match outcome length");
}

std::vector<VariableBlock> units_of(const DesignMatrix& X, ContributionUnit unit) {
  return unit == ContributionUnit::Variable ? X.variable_blocks() : X.column_blocks();
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear decomposition

OaxacaResult oaxaca_linear(const GroupSample& g1, const GroupSample& g2, bool per_column) {
  check_harmonized(g1, g2);
  OaxacaResult r;
  // Columns that are identically zero in a group get coefficient 0 there.
  auto ols = [&r](const GroupSample& g) {
    const auto k = g.X.values.cols();
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& col = g.X.columns[static_cast<std::size_t>(j)];
      if (col.variable.empty() || (g.X.values.col(j).array() != 0.0).any())
        active.push_back(j);
      else
        r.omitted_columns.push_back(g.label + ": " + col.label());
    }
    const Eigen::MatrixXd A = g.X.values(Eigen::placeholders::all, active);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < A.cols()) {
      std::vector<std::string> cols;
      for (Eigen::Index j = qr.rank(); j < A.cols(); ++j) {
        const auto a = static_cast<std::size_t>(qr.colsPermutation().indices()(j));
        cols.push_back(g.X.columns[static_cast<std::size_t>(active[a])].label());
      }
      std::string msg = "linear probability model for group '" + g.label + "' is rank deficient:";
      for (const auto& c : cols) msg += " " + c;
      throw CollinearityError(msg, cols);
    }
    const Eigen::VectorXd b = qr.solve(g.y);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    for (std::size_t a = 0; a < active.size(); ++a) beta(active[a]) = b(static_cast<Eigen::Index>(a));
    return beta;
  };

  r.beta1 = ols(g1);
  r.beta2 = ols(g2);
  const Eigen::VectorXd xbar1 = g1.X.values.colwise().mean();
  const Eigen::VectorXd xbar2 = g2.X.values.colwise().mean();
  r.mean1 = g1.y.mean();
  r.mean2 = g2.y.mean();
  r.gap = r.mean1 - r.mean2;
  r.explained = (xbar1 - xbar2).dot(r.beta1);
  r.unexplained = xbar2.dot(r.beta1 - r.beta2);
  for (const auto& block : units_of(g1.X, per_column ? ContributionUnit::Column : ContributionUnit::Variable)) {
    double share = 0.0;
    for (const auto j : block.columns) {
      const auto jj = static_cast<Eigen::Index>(j);
      share += (xbar1(jj) - xbar2(jj)) * r.beta1(jj);
    }
    r.per_variable.push_back({block.variable, share});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Options

std::string to_string(CoefSource s) {
  switch (s) {
    case CoefSource::Group1: return "group1";
    case CoefSource::Group2: return "group2";
    case CoefSource::Pooled: return "pooled";
  }
  return "";
}

std::string to_string(Ordering o) { return o == Ordering::Fixed ? "fixed" : "randomized"; }

std::string to_string(ContributionUnit u) { return u == ContributionUnit::Variable ? "variable" : "column"; }

CoefSource parse_coef_source(std::string_view s) {
  if (s == "group1") return CoefSource::Group1;
  if (s == "group2") return CoefSource::Group2;
  if (s == "pooled") return CoefSource::Pooled;
  throw ConfigError("coef_source must be group1, group2 or pooled");
}

Ordering parse_ordering(std::string_view s) {
  if (s == "fixed") return Ordering::Fixed;
  if (s == "randomized") return Ordering::Randomized;
  throw ConfigError("ordering must be fixed or randomized");
}

ContributionUnit parse_unit(std::string_view s) {
  if (s == "variable") return ContributionUnit::Variable;
  if (s == "column") return ContributionUnit::Column;
  throw ConfigError("contribution unit must be variable or column");
}

// ---------------------------------------------------------------------------
// Coefficients

CoefficientFit estimate_coefficients(const GroupSample& g1, const GroupSample& g2, CoefSource source,
                                     const FitOptions& options) {
  check_harmonized(g1, g2);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  switch (source) {
    case CoefSource::Group1:
      X = g1.X.values;
      y = g1.y;
      break;
    case CoefSource::Group2:
      X = g2.X.values;
      y = g2.y;
      break;
    case CoefSource::Pooled:
      X.resize(g1.X.values.rows() + g2.X.values.rows(), g1.X.values.cols());
      X << g1.X.values, g2.X.values;
      y.resize(g1.y.size() + g2.y.size());
      y << g1.y, g2.y;
      break;
  }

  const Eigen::Index k = X.cols();
  std::vector<bool> active(static_cast<std::size_t>(k), true);
  std::vector<bool> keep(static_cast<std::size_t>(X.rows()), true);
  CoefficientFit out;

  // Omit dummies without variation and drop rows of perfect-predictor dummies
  // until the estimation rows are stable.
  for (bool changed = true; changed;) {
    changed = false;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!active[static_cast<std::size_t>(j)] || g1.X.columns[static_cast<std::size_t>(j)].is_intercept())
        continue;
      std::size_t kept = 0, on = 0, ones = 0;
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        ++kept;
        if (X(i, j) != 0.0) {
          ++on;
          ones += y(i) == 1.0;
        }
      }
      if (on == 0 || on == kept) {
        active[static_cast<std::size_t>(j)] = false;
        changed = true;
      } else if (ones == 0 || ones == on) {
        active[static_cast<std::size_t>(j)] = false;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
          if (X(i, j) != 0.0 && keep[static_cast<std::size_t>(i)]) {
            keep[static_cast<std::size_t>(i)] = false;
            ++out.omitted_rows;
          }
        changed = true;
      }
    }
  }

  std::vector<Eigen::Index> rows, cols;
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (keep[static_cast<std::size_t>(i)]) rows.push_back(i);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (active[static_cast<std::size_t>(j)]) {
      cols.push_back(j);
      labels.push_back(g1.X.columns[static_cast<std::size_t>(j)].label());
    } else {
      out.omitted_columns.push_back(g1.X.columns[static_cast<std::size_t>(j)].label());
    }
  }
  if (rows.empty()) throw EstimationError("no rows left to estimate decomposition coefficients");

  const Eigen::MatrixXd Xs = X(rows, cols);
  const Eigen::VectorXd ys = y(rows);
  out.fit = fit_logit(Xs, ys, labels, options);
  if (!out.fit.converged)
    throw EstimationError("coefficient fit (" + to_string(source) + ") did not converge");
  out.beta = Eigen::VectorXd::Zero(k);
  for (std::size_t a = 0; a < cols.size(); ++a) out.beta(cols[a]) = out.fit.beta(static_cast<Eigen::Index>(a));
  return out;
}

// ---------------------------------------------------------------------------
// Nonlinear decomposition

namespace {

struct Replication {
  std::vector<double> contributions;  // by unit index
  double matched_explained = 0.0;
};

// Row indices of `n` sorted by (probability, index).
std::vector<std::size_t> rank_order(const Eigen::VectorXd& prob) {
  std::vector<std::size_t> order(static_cast<std::size_t>(prob.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double pa = prob(static_cast<Eigen::Index>(a)), pb = prob(static_cast<Eigen::Index>(b));
    return pa < pb || (pa == pb && a < b);
  });
  return order;
}

// Rank-ordered rows of a uniform subsample of size m (all rows when m == n).
std::vector<std::size_t> matched_rows(const std::vector<std::size_t>& ranked, std::size_t m, Rng& rng) {
  const std::size_t n = ranked.size();
  if (m >= n) return ranked;
  const auto chosen = rng.sample_without_replacement(n, m);
  std::vector<bool> selected(n, false);
  for (const auto i : chosen) selected[i] = true;
  std::vector<std::size_t> out;
  out.reserve(m);
  for (const auto i : ranked)
    if (selected[i]) out.push_back(i);
  return out;
}

Replication run_replication(const GroupSample& g1, const GroupSample& g2, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& eta1, const std::vector<std::size_t>& ranked1,
                            const std::vector<std::size_t>& ranked2,
                            const std::vector<VariableBlock>& units, const FairlieOptions& options,
                            std::size_t replication) {
  Rng rng(options.seed, replication);
  const std::size_t m = std::min(g1.n(), g2.n());
  const auto rows1 = matched_rows(ranked1, m, rng);
  const auto rows2 = matched_rows(ranked2, m, rng);

  std::vector<std::size_t> order(units.size());
  if (options.ordering == Ordering::Randomized) {
    order = rng.permutation(units.size());
  } else {
    std::iota(order.begin(), order.end(), std::size_t{0});
  }

  Replication rep;
  rep.contributions.assign(units.size(), 0.0);
  std::vector<double> eta(m), prob(m);
  double start = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    eta[i] = eta1(static_cast<Eigen::Index>(rows1[i]));
    prob[i] = logistic(eta[i]);
    start += prob[i];
  }
  double current = start;
  const auto& X1 = g1.X.values;
  const auto& X2 = g2.X.values;
  for (const auto u : order) {
    double next = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto r1 = static_cast<Eigen::Index>(rows1[i]);
      const auto r2 = static_cast<Eigen::Index>(rows2[i]);
      double delta = 0.0;
      for (const auto j : units[u].columns) {
        const auto jj = static_cast<Eigen::Index>(j);
        delta += (X2(r2, jj) - X1(r1, jj)) * beta(jj);
      }
      if (delta != 0.0) {
        eta[i] += delta;
        const double p = logistic(eta[i]);
        diff += prob[i] - p;
        prob[i] = p;
      }
      next += prob[i];
    }
    rep.contributions[u] = diff / static_cast<double>(m);
    current = next;
  }
  rep.matched_explained = (start - current) / static_cast<double>(m);
  return rep;
}

}  // namespace

DecompositionResult fairlie_decompose_with_beta(const GroupSample& g1, const GroupSample& g2,
                                                const Eigen::VectorXd& beta,
                                                const FairlieOptions& options) {
  check_harmonized(g1, g2);
  if (options.replications < 1) throw ConfigError("replications must be at least 1");
  if (beta.size() != g1.X.values.cols()) throw ShapeError("coefficient length does not match design");

  DecompositionResult r;
  r.label1 = g1.label;
  r.label2 = g2.label;
  r.n1 = g1.n();
  r.n2 = g2.n();
  r.p1 = g1.y.mean();
  r.p2 = g2.y.mean();
  r.gap = r.p1 - r.p2;
  r.replications = options.replications;
  r.seed = options.seed;
  r.coef_source = options.coef_source;
  r.ordering = options.ordering;
  r.unit = options.unit;
  r.beta = beta;

  const Eigen::VectorXd eta1 = g1.X.values * beta;
  const Eigen::VectorXd eta2 = g2.X.values * beta;
  const Eigen::VectorXd prob1 = eta1.unaryExpr([](double t) { return logistic(t); });
  const Eigen::VectorXd prob2 = eta2.unaryExpr([](double t) { return logistic(t); });
  r.total_explained = prob1.mean() - prob2.mean();
  if (r.gap != 0.0) r.pct_explained = 100.0 * r.total_explained / r.gap;

  const auto units = units_of(g1.X, options.unit);
  const auto ranked1 = rank_order(prob1);
  const auto ranked2 = rank_order(prob2);

  const auto R = static_cast<std::size_t>(options.replications);
  std::vector<Replication> reps(R);
  const unsigned threads = options.threads ? options.threads : thread_limit();
  parallel_for(R, threads, [&](std::size_t rep) {
    reps[rep] = run_replication(g1, g2, beta, eta1, ranked1, ranked2, units, options, rep);
  });

  r.contributions.resize(units.size());
  for (std::size_t u = 0; u < units.size(); ++u) {
    double sum = 0.0;
    for (const auto& rep : reps) sum += rep.contributions[u];
    const double mean = sum / static_cast<double>(R);
    double ss = 0.0;
    for (const auto& rep : reps) ss += (rep.contributions[u] - mean) * (rep.contributions[u] - mean);
    auto& c = r.contributions[u];
    c.variable = units[u].variable;
    c.coef = mean;
    c.se = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1)) / std::sqrt(static_cast<double>(R))
                 : std::numeric_limits<double>::quiet_NaN();
    if (r.gap != 0.0) c.pct = 100.0 * c.coef / r.gap;
  }
  for (auto& rep : reps) {
    r.replication_contributions.push_back(std::move(rep.contributions));
    r.matched_explained.push_back(rep.matched_explained);
  }
  return r;
}

DecompositionResult fairlie_decompose(const GroupSample& g1, const GroupSample& g2,
                                      const FairlieOptions& options) {
  if (options.replications < 1) throw ConfigError("replications must be at least 1");
  const auto coefs = estimate_coefficients(g1, g2, options.coef_source, options.fit);
  auto r = fairlie_decompose_with_beta(g1, g2, coefs.beta, options);
  r.omitted_columns = coefs.omitted_columns;
  r.omitted_rows = coefs.omitted_rows;
  return r;
}

std::vector<double> percentage_contributions(std::span<const double> coefs, double gap) {
  if (gap == 0.0) throw UndefinedPercentageError("percentage contribution undefined for a zero gap");
  std::vector<double> out;
  out.reserve(coefs.size());
  for (const double c : coefs) out.push_back(100.0 * c / gap);
  return out;
}

std::string decomposition_report(const DecompositionResult& r, const std::string& outcome_name) {
  std::string out;
  auto row = [&](const std::string& label, const std::string& value) {
    out += fmt::format("{:<36}{:>16}\n", label, value);
  };
  out += fmt::format("Nonlinear decomposition: {} vs {} (coefficients: {}, ordering: {}, replications: {}, seed: {})\n\n",
                     r.label1, r.label2, to_string(r.coef_source), to_string(r.ordering),
                     r.replications, r.seed);
  row("Number of observations", std::to_string(r.n1 + r.n2));
  row("No. of observations - " + r.label1, std::to_string(r.n1));
  row("No. of observations - " + r.label2, std::to_string(r.n2));
  row(fmt::format("Pr({}!=0 G={})", outcome_name, r.label1), fmt::format("{:.7f}", r.p1));
  row(fmt::format("Pr({}!=0 G={})", outcome_name, r.label2), fmt::format("{:.7f}", r.p2));
  row("Difference", fmt::format("{:.7f}", r.gap));
  row("Total explained", fmt::format("{:.7f}", r.total_explained));
  row("% explained", r.pct_explained ? fmt::format("{:.4f}", *r.pct_explained) : "n/a");

  out += fmt::format("\n{:<48}{:>14}{:>14}{:>16}\n", "Attribute", "Coef.", "SE", "% contribution");
  for (const auto& c : r.contributions) {
    const bool has_se = std::isfinite(c.se);
    const std::string stars = has_se && c.se > 0.0 ? significance_stars(normal_two_sided_p(c.coef / c.se)) : "";
    out += fmt::format("{:<48}{:>14}{:>14}{:>16}\n", c.variable,
                       fmt::format("{:.7f}{:<3}", c.coef, stars),
                       has_se ? fmt::format("{:.7f}", c.se) : std::string("—"),
                       c.pct ? fmt::format("{:.4f}", *c.pct) : std::string("n/a"));
  }
  out += "\nSE: replication standard deviation / sqrt(R) (approximate).\n";
  out += "*** p<0.01, ** p<0.05, * p<0.1\n";
  return out;
}

}  // namespace gapdecomp
