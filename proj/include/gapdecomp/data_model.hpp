#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gapdecomp {

/// A categorical regressor. Category order is first appearance in the input.
struct CategoricalVariable {
  std::string name;
  std::vector<std::string> categories;
  std::optional<std::string> base;

  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws ConfigError for an unknown label.
  std::size_t index_of(std::string_view label) const;
};

/// Column names of a microdata file: outcome, regressors and an optional
/// grouping column (e.g. gender).
struct Schema {
  std::string outcome;
  std::vector<std::string> variables;
  std::optional<std::string> group;

  static Schema from_json(const nlohmann::json& j);
  static Schema load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

using BaseMap = std::map<std::string, std::string>;

/// Categorical rows with a binary outcome. Immutable after construction;
/// category labels are stored as per-variable integer codes.
class MicrodataTable {
 public:
  MicrodataTable(std::string outcome_name, std::vector<CategoricalVariable> variables,
                 std::vector<std::uint8_t> outcome, std::vector<std::vector<std::uint32_t>> codes,
                 std::optional<CategoricalVariable> group = std::nullopt,
                 std::vector<std::uint32_t> group_codes = {});

  std::size_t rows() const noexcept { return outcome_.size(); }
  const std::string& outcome_name() const noexcept { return outcome_name_; }
  const std::vector<CategoricalVariable>& variables() const noexcept { return variables_; }
  const CategoricalVariable& variable(std::size_t v) const { return variables_.at(v); }
  /// Throws ConfigError for an unknown name.
  std::size_t variable_index(std::string_view name) const;

  std::uint8_t outcome(std::size_t row) const { return outcome_[row]; }
  const std::vector<std::uint8_t>& outcomes() const noexcept { return outcome_; }
  std::uint32_t code(std::size_t v, std::size_t row) const { return codes_[v][row]; }
  const std::vector<std::uint32_t>& codes(std::size_t v) const { return codes_.at(v); }
  const std::string& label(std::size_t v, std::size_t row) const {
    return variables_[v].categories[codes_[v][row]];
  }

  const std::optional<CategoricalVariable>& group() const noexcept { return group_; }
  const std::vector<std::uint32_t>& group_codes() const noexcept { return group_codes_; }
  std::optional<std::string> group_name() const;

  /// Rows dropped at load time because the outcome was missing.
  std::size_t missing_outcome_rows() const noexcept { return missing_outcome_rows_; }
  void set_missing_outcome_rows(std::size_t n) noexcept { missing_outcome_rows_ = n; }

  std::vector<std::size_t> category_counts(std::size_t v) const;
  double outcome_mean() const;

  /// Subset of rows, declared categories preserved. Throws DataError when empty.
  MicrodataTable select_rows(const std::vector<std::size_t>& rows) const;
  /// Rows whose group label equals `label`. Throws ConfigError for an unknown label.
  MicrodataTable select_group(std::string_view label) const;
  /// Rows whose group label is one of `labels` (order of the table preserved).
  MicrodataTable select_groups(const std::vector<std::string>& labels) const;

 private:
  std::string outcome_name_;
  std::vector<CategoricalVariable> variables_;
  std::vector<std::uint8_t> outcome_;
  std::vector<std::vector<std::uint32_t>> codes_;
  std::optional<CategoricalVariable> group_;
  std::vector<std::uint32_t> group_codes_;
  std::size_t missing_outcome_rows_ = 0;
};

/// Streams a CSV file into a table. Rows with an empty or "NA" outcome are
/// dropped and counted; a missing category label is a hard error.
MicrodataTable load_csv(const std::filesystem::path& path, const Schema& schema);
MicrodataTable read_csv(std::istream& in, const Schema& schema);

/// Intercept column has an empty variable name.
struct DesignColumn {
  std::string variable;
  std::string category;

  bool is_intercept() const noexcept { return variable.empty(); }
  std::string label() const;
  bool operator==(const DesignColumn&) const = default;
};

struct DroppedCategory {
  std::string variable;
  std::string category;
  std::string reason;
  std::size_t rows = 0;
};

/// Columns of one categorical variable inside a design.
struct VariableBlock {
  std::string variable;
  std::vector<std::size_t> columns;
};

struct DesignMatrix {
  std::vector<DesignColumn> columns;
  Eigen::MatrixXd values;
  BaseMap base_map;
  std::vector<DroppedCategory> dropped;
  /// Table rows (of the table passed to encode_design) backing each design row.
  std::vector<std::size_t> source_rows;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return columns.size(); }
  std::vector<std::string> labels() const;
  /// Non-intercept columns grouped by variable, in declaration order.
  /// Variables that contribute no column are omitted.
  std::vector<VariableBlock> variable_blocks() const;
  /// Every non-intercept column as its own block.
  std::vector<VariableBlock> column_blocks() const;
};

/// One dummy per non-base category that has rows in `table`. Non-base
/// categories without rows are dropped (reason "no observations"); a variable
/// confined to a single category contributes no columns (reason "constant").
/// Throws ConfigError if the map misses a variable, names an unknown label,
/// or names an empty base while other categories are populated.
DesignMatrix encode_design(const MicrodataTable& table, const BaseMap& base_map);

/// Inverse of encode_design for one design row: category label per variable.
std::vector<std::string> decode_row(const DesignMatrix& design, const MicrodataTable& table,
                                    std::size_t design_row);

/// Greedy base choice minimizing the mean VIF of the full design, one
/// variable at a time in declaration order. Ties: larger category frequency,
/// then declaration order.
BaseMap select_base_categories(const MicrodataTable& table);

/// Mean VIF of the design that `base_map` induces on `table`, computed from
/// category co-occurrence counts without materializing the design.
double mean_vif_for_bases(const MicrodataTable& table, const BaseMap& base_map);

enum class PredictorDirection { AllZero, AllOne };

struct PerfectPredictor {
  std::string variable;
  std::string category;
  PredictorDirection direction;
  std::size_t rows;
};

/// Every populated category whose rows share a single outcome value.
std::vector<PerfectPredictor> detect_perfect_predictors(const MicrodataTable& table);

/// Encoded design plus aligned outcome, after perfect predictors are removed.
struct EstimationSample {
  DesignMatrix X;
  Eigen::VectorXd y;
  std::vector<PerfectPredictor> perfect_predictors;
  std::size_t dropped_rows = 0;
};

/// Repeatedly drops rows of perfect-predictor categories, then encodes.
/// Dropped categories are recorded in X.dropped with the number of rows.
EstimationSample build_estimation_sample(const MicrodataTable& table, const BaseMap& base_map);

Eigen::VectorXd outcome_vector(const MicrodataTable& table);

struct Prevalence {
  std::string category;
  std::size_t count = 0;
  std::size_t positives = 0;
  double per_100 = 0.0;
};

/// 100 x mean outcome per category of `by` (a regressor or the group column).
std::vector<Prevalence> group_prevalence(const MicrodataTable& table, std::string_view by);

}  // namespace gapdecomp
