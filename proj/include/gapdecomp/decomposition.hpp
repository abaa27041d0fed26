#pragma once

#include "gapdecomp/data_model.hpp"
#include "gapdecomp/logit.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gapdecomp {

struct GroupSample {
  std::string label;
  DesignMatrix X;
  Eigen::VectorXd y;

  std::size_t n() const noexcept { return static_cast<std::size_t>(y.size()); }
};

/// Encodes the rows of both groups with one base map so the two designs share
/// their columns, then splits them by group label.
std::pair<GroupSample, GroupSample> make_group_samples(const MicrodataTable& table,
                                                       const std::string& label1,
                                                       const std::string& label2,
                                                       const BaseMap& base_map);

struct LinearShare {
  std::string variable;
  double explained;
};

struct OaxacaResult {
  double mean1 = 0.0;
  double mean2 = 0.0;
  double gap = 0.0;
  double explained = 0.0;
  double unexplained = 0.0;
  std::vector<LinearShare> per_variable;
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta2;
  /// "<group>: <column>" for columns with no nonzero entry in that group.
  std::vector<std::string> omitted_columns;
};

/// Two-fold Blinder-Oaxaca split of a linear probability model with group 1
/// coefficients: explained = (xbar1 - xbar2) b1, unexplained = xbar2 (b1 - b2).
/// A column that is all zero within one group is left out of that group's fit.
OaxacaResult oaxaca_linear(const GroupSample& g1, const GroupSample& g2, bool per_column = false);

enum class CoefSource { Group1, Group2, Pooled };
enum class Ordering { Fixed, Randomized };
enum class ContributionUnit { Variable, Column };

std::string to_string(CoefSource s);
std::string to_string(Ordering o);
std::string to_string(ContributionUnit u);
CoefSource parse_coef_source(std::string_view s);
Ordering parse_ordering(std::string_view s);
ContributionUnit parse_unit(std::string_view s);

struct FairlieOptions {
  int replications = 100;
  std::uint64_t seed = 0;
  CoefSource coef_source = CoefSource::Group1;
  Ordering ordering = Ordering::Randomized;
  ContributionUnit unit = ContributionUnit::Variable;
  FitOptions fit;
  unsigned threads = 0;  // 0: thread_limit()
};

struct Contribution {
  std::string variable;
  double coef = 0.0;
  double se = 0.0;  // NaN when replications == 1
  std::optional<double> pct;
};

struct DecompositionResult {
  std::string label1, label2;
  std::size_t n1 = 0, n2 = 0;
  double p1 = 0.0, p2 = 0.0;
  double gap = 0.0;
  double total_explained = 0.0;
  std::optional<double> pct_explained;
  std::vector<Contribution> contributions;
  int replications = 0;
  std::uint64_t seed = 0;
  CoefSource coef_source = CoefSource::Group1;
  Ordering ordering = Ordering::Randomized;
  ContributionUnit unit = ContributionUnit::Variable;

  /// Coefficients used for the counterfactuals, one per design column
  /// (zero for columns that had to be omitted from the fit).
  Eigen::VectorXd beta;
  std::vector<std::string> omitted_columns;
  /// Rows left out of the coefficient fit (the decomposition uses all rows).
  std::size_t omitted_rows = 0;
  /// Per replication: contributions in `contributions` order, and the
  /// matched-sample gap in predicted probability they telescope to.
  std::vector<std::vector<double>> replication_contributions;
  std::vector<double> matched_explained;
};

/// Coefficient vector for the decomposition. Columns without variation in the
/// estimation rows, and rows of dummy columns that predict the outcome
/// perfectly, are left out of the logit; their coefficients are zero.
struct CoefficientFit {
  Eigen::VectorXd beta;
  LogitFit fit;
  std::vector<std::string> omitted_columns;
  std::size_t omitted_rows = 0;
};

CoefficientFit estimate_coefficients(const GroupSample& g1, const GroupSample& g2, CoefSource source,
                                     const FitOptions& options = {});

/// Nonlinear decomposition of mean(y1) - mean(y2) with per-unit
/// contributions from sequential switching on rank-matched samples.
DecompositionResult fairlie_decompose(const GroupSample& g1, const GroupSample& g2,
                                      const FairlieOptions& options = {});

/// Same, with the coefficient vector supplied by the caller.
DecompositionResult fairlie_decompose_with_beta(const GroupSample& g1, const GroupSample& g2,
                                                const Eigen::VectorXd& beta,
                                                const FairlieOptions& options = {});

/// 100 * coef / gap. Throws UndefinedPercentageError when gap == 0.
std::vector<double> percentage_contributions(std::span<const double> coefs, double gap);

/// Summary block followed by the per-unit table.
std::string decomposition_report(const DecompositionResult& result,
                                 const std::string& outcome_name = "Morbidity");

}  // namespace gapdecomp
