#include "gapdecomp/data_model.hpp"

#include "gapdecomp/csv.hpp"
#include "gapdecomp/errors.hpp"
#include "vif_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

namespace gapdecomp {

std::optional<std::size_t> CategoricalVariable::find(std::string_view label) const {
  const auto it = std::find(categories.begin(), categories.end(), label);
  if (it == categories.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

std::size_t CategoricalVariable::index_of(std::string_view label) const {
  if (auto idx = find(label)) return *idx;
  throw ConfigError("variable '" + name + "' has no category '" + std::string(label) + "'");
}

// ---------------------------------------------------------------------------
// Schema

Schema Schema::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("schema must be a JSON object");
  Schema s;
  if (!j.contains("outcome") || !j["outcome"].is_string())
    throw SchemaError("schema requires a string field 'outcome'");
  s.outcome = j["outcome"].get<std::string>();
  if (!j.contains("variables") || !j["variables"].is_array())
    throw SchemaError("schema requires an array field 'variables'");
  for (const auto& v : j["variables"]) {
    if (!v.is_string()) throw SchemaError("schema 'variables' must contain strings");
    s.variables.push_back(v.get<std::string>());
  }
  if (s.variables.empty()) throw SchemaError("schema declares no variables");
  if (j.contains("group") && !j["group"].is_null()) {
    if (!j["group"].is_string()) throw SchemaError("schema 'group' must be a string");
    s.group = j["group"].get<std::string>();
  }
  std::set<std::string> seen{s.outcome};
  if (s.group) seen.insert(*s.group);
  for (const auto& v : s.variables) {
    if (!seen.insert(v).second) throw SchemaError("column '" + v + "' is declared twice");
  }
  return s;
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("malformed schema JSON: " + std::string(e.what()));
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json j = {{"outcome", outcome}, {"variables", variables}};
  j["group"] = group ? nlohmann::json(*group) : nlohmann::json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// MicrodataTable

MicrodataTable::MicrodataTable(std::string outcome_name, std::vector<CategoricalVariable> variables,
                               std::vector<std::uint8_t> outcome,
                               std::vector<std::vector<std::uint32_t>> codes,
                               std::optional<CategoricalVariable> group,
                               std::vector<std::uint32_t> group_codes)
    : outcome_name_(std::move(outcome_name)),
      variables_(std::move(variables)),
      outcome_(std::move(outcome)),
      codes_(std::move(codes)),
      group_(std::move(group)),
      group_codes_(std::move(group_codes)) {
  const std::size_t n = outcome_.size();
  if (n == 0) throw DataError("table has no rows");
  if (codes_.size() != variables_.size())
    throw ShapeError("one code column per variable is required");
  for (const auto y : outcome_)
    if (y > 1) throw DataError("outcome must be 0 or 1");

  auto check_variable = [n](const CategoricalVariable& var, const std::vector<std::uint32_t>& col) {
    std::set<std::string> unique(var.categories.begin(), var.categories.end());
    if (unique.size() != var.categories.size())
      throw DataError("variable '" + var.name + "' declares duplicate categories");
    if (var.base && !var.find(*var.base))
      throw ConfigError("base '" + *var.base + "' is not a category of '" + var.name + "'");
    if (col.size() != n) throw ShapeError("code column of '" + var.name + "' has wrong length");
    for (const auto c : col)
      if (c >= var.categories.size())
        throw ShapeError("code out of range in variable '" + var.name + "'");
  };
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (variables_[v].categories.size() < 2)
      throw DegeneracyError("variable '" + variables_[v].name + "' has fewer than 2 categories");
    check_variable(variables_[v], codes_[v]);
  }
  if (group_) check_variable(*group_, group_codes_);
}

std::size_t MicrodataTable::variable_index(std::string_view name) const {
  for (std::size_t v = 0; v < variables_.size(); ++v)
    if (variables_[v].name == name) return v;
  throw ConfigError("unknown variable '" + std::string(name) + "'");
}

std::optional<std::string> MicrodataTable::group_name() const {
  if (!group_) return std::nullopt;
  return group_->name;
}

std::vector<std::size_t> MicrodataTable::category_counts(std::size_t v) const {
  std::vector<std::size_t> counts(variables_.at(v).categories.size(), 0);
  for (const auto c : codes_[v]) ++counts[c];
  return counts;
}

double MicrodataTable::outcome_mean() const {
  const auto ones = std::accumulate(outcome_.begin(), outcome_.end(), std::size_t{0});
  return static_cast<double>(ones) / static_cast<double>(rows());
}

MicrodataTable MicrodataTable::select_rows(const std::vector<std::size_t>& rows) const {
  if (rows.empty()) throw DataError("row selection is empty");
  std::vector<std::uint8_t> y;
  y.reserve(rows.size());
  for (const auto r : rows) y.push_back(outcome_.at(r));
  std::vector<std::vector<std::uint32_t>> codes(codes_.size());
  for (std::size_t v = 0; v < codes_.size(); ++v) {
    codes[v].reserve(rows.size());
    for (const auto r : rows) codes[v].push_back(codes_[v][r]);
  }
  std::vector<std::uint32_t> g;
  if (group_) {
    g.reserve(rows.size());
    for (const auto r : rows) g.push_back(group_codes_[r]);
  }
  MicrodataTable out(outcome_name_, variables_, std::move(y), std::move(codes), group_, std::move(g));
  out.missing_outcome_rows_ = missing_outcome_rows_;
  return out;
}

MicrodataTable MicrodataTable::select_group(std::string_view label) const {
  return select_groups({std::string(label)});
}

MicrodataTable MicrodataTable::select_groups(const std::vector<std::string>& labels) const {
  if (!group_) throw ConfigError("table has no group column");
  std::vector<bool> wanted(group_->categories.size(), false);
  for (const auto& label : labels) {
    const auto idx = group_->find(label);
    if (!idx)
      throw ConfigError("group label '" + label + "' does not occur in column '" + group_->name + "'");
    wanted[*idx] = true;
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < group_codes_.size(); ++i)
    if (wanted[group_codes_[i]]) rows.push_back(i);
  return select_rows(rows);
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

class LabelIndex {
 public:
  explicit LabelIndex(std::string name) { var_.name = std::move(name); }

  std::uint32_t code(const std::string& label) {
    const auto [it, inserted] =
        index_.try_emplace(label, static_cast<std::uint32_t>(var_.categories.size()));
    if (inserted) var_.categories.push_back(label);
    return it->second;
  }

  CategoricalVariable release() { return std::move(var_); }

 private:
  CategoricalVariable var_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace

MicrodataTable read_csv(std::istream& in, const Schema& schema) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw DataError("empty file: no header row");

  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header->begin(), header->end(), name);
    if (it == header->end()) throw SchemaError("missing column '" + name + "' in header");
    return static_cast<std::size_t>(it - header->begin());
  };
  const std::size_t outcome_col = column_of(schema.outcome);
  std::vector<std::size_t> var_cols;
  for (const auto& v : schema.variables) var_cols.push_back(column_of(v));
  const std::optional<std::size_t> group_col =
      schema.group ? std::optional(column_of(*schema.group)) : std::nullopt;

  std::vector<LabelIndex> labels;
  for (const auto& v : schema.variables) labels.emplace_back(v);
  std::optional<LabelIndex> group_labels;
  if (schema.group) group_labels.emplace(*schema.group);

  std::vector<std::uint8_t> outcome;
  std::vector<std::vector<std::uint32_t>> codes(schema.variables.size());
  std::vector<std::uint32_t> group_codes;
  std::size_t missing = 0;
  std::size_t row = 0;

  while (auto record = reader.next()) {
    ++row;
    if (record->size() == 1 && (*record)[0].empty()) continue;  // blank line
    if (record->size() != header->size())
      throw ParseError("expected " + std::to_string(header->size()) + " fields, found " +
                           std::to_string(record->size()),
                       row);
    const std::string& y = (*record)[outcome_col];
    if (y.empty() || y == "NA") {
      ++missing;
      continue;
    }
    if (y != "0" && y != "1")
      throw ParseError("outcome value '" + y + "' is not one of 0, 1, NA or empty", row);

    for (std::size_t v = 0; v < var_cols.size(); ++v) {
      const std::string& label = (*record)[var_cols[v]];
      if (label.empty() || label == "NA")
        throw ParseError("missing label for variable '" + schema.variables[v] + "'", row);
      codes[v].push_back(labels[v].code(label));
    }
    if (group_col) {
      const std::string& label = (*record)[*group_col];
      if (label.empty() || label == "NA")
        throw ParseError("missing label for group column '" + *schema.group + "'", row);
      group_codes.push_back(group_labels->code(label));
    }
    outcome.push_back(y == "1" ? 1 : 0);
  }
  if (row == 0) throw DataError("file has a header but no data rows");
  if (outcome.empty()) throw DataError("every row has a missing outcome");

  std::vector<CategoricalVariable> vars;
  for (auto& l : labels) vars.push_back(l.release());
  std::optional<CategoricalVariable> group;
  if (group_labels) group = group_labels->release();

  MicrodataTable table(schema.outcome, std::move(vars), std::move(outcome), std::move(codes),
                       std::move(group), std::move(group_codes));
  table.set_missing_outcome_rows(missing);
  return table;
}

MicrodataTable load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file " + path.string());
  return read_csv(in, schema);
}

Eigen::VectorXd outcome_vector(const MicrodataTable& table) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(table.rows()));
  for (std::size_t i = 0; i < table.rows(); ++i) y(static_cast<Eigen::Index>(i)) = table.outcome(i);
  return y;
}

// ---------------------------------------------------------------------------
// Design encoding

std::string DesignColumn::label() const {
  if (is_intercept()) return "_cons";
  return variable + "=" + category;
}

std::vector<std::string> DesignMatrix::labels() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.label());
  return out;
}

std::vector<VariableBlock> DesignMatrix::variable_blocks() const {
  std::vector<VariableBlock> out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].is_intercept()) continue;
    if (out.empty() || out.back().variable != columns[j].variable)
      out.push_back({columns[j].variable, {}});
    out.back().columns.push_back(j);
  }
  return out;
}

std::vector<VariableBlock> DesignMatrix::column_blocks() const {
  std::vector<VariableBlock> out;
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (!columns[j].is_intercept()) out.push_back({columns[j].label(), {j}});
  return out;
}

DesignMatrix encode_design(const MicrodataTable& table, const BaseMap& base_map) {
  DesignMatrix d;
  d.columns.push_back({});
  const auto& vars = table.variables();
  // column index of (variable, category), -1 when the category has no column
  std::vector<std::vector<long>> column_of(vars.size());

  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto& var = vars[v];
    const auto it = base_map.find(var.name);
    if (it == base_map.end()) throw ConfigError("no base category given for '" + var.name + "'");
    const std::size_t base = var.index_of(it->second);
    d.base_map[var.name] = it->second;

    const auto counts = table.category_counts(v);
    column_of[v].assign(var.categories.size(), -1);

    std::optional<std::size_t> constant_category;
    if (counts[base] == 0) {
      std::vector<std::size_t> populated;
      for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0) populated.push_back(c);
      if (populated.size() > 1)
        throw ConfigError("base category '" + it->second + "' of '" + var.name +
                          "' has no rows; choose a populated base");
      constant_category = populated.front();
    }

    for (std::size_t c = 0; c < var.categories.size(); ++c) {
      if (c == base) continue;
      if (constant_category && c == *constant_category) {
        d.dropped.push_back({var.name, var.categories[c], "constant", counts[c]});
      } else if (counts[c] == 0) {
        d.dropped.push_back({var.name, var.categories[c], "no observations", 0});
      } else {
        column_of[v][c] = static_cast<long>(d.columns.size());
        d.columns.push_back({var.name, var.categories[c]});
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(table.rows());
  d.values = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d.columns.size()));
  d.values.col(0).setOnes();
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto& codes = table.codes(v);
    for (Eigen::Index i = 0; i < n; ++i) {
      const long col = column_of[v][codes[static_cast<std::size_t>(i)]];
      if (col >= 0) d.values(i, col) = 1.0;
    }
  }
  d.source_rows.resize(table.rows());
  std::iota(d.source_rows.begin(), d.source_rows.end(), std::size_t{0});
  return d;
}

std::vector<std::string> decode_row(const DesignMatrix& design, const MicrodataTable& table,
                                    std::size_t design_row) {
  std::vector<std::string> out;
  const auto r = static_cast<Eigen::Index>(design_row);
  for (const auto& var : table.variables()) {
    std::optional<std::string> label;
    for (std::size_t j = 0; j < design.columns.size(); ++j) {
      if (design.columns[j].variable == var.name && design.values(r, static_cast<Eigen::Index>(j)) == 1.0) {
        label = design.columns[j].category;
        break;
      }
    }
    if (!label) {
      for (const auto& dc : design.dropped)
        if (dc.variable == var.name && dc.reason == "constant") label = dc.category;
    }
    out.push_back(label ? *label : design.base_map.at(var.name));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Base selection

namespace {

// Category co-occurrence counts across all variables, enough to reproduce the
// covariance of any dummy design built from the table.
class CooccurrenceMoments {
 public:
  explicit CooccurrenceMoments(const MicrodataTable& table) : table_(table) {
    const auto& vars = table.variables();
    offsets_.resize(vars.size() + 1, 0);
    for (std::size_t v = 0; v < vars.size(); ++v)
      offsets_[v + 1] = offsets_[v] + vars[v].categories.size();
    const std::size_t k = offsets_.back();
    counts_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));

    std::vector<std::size_t> g(vars.size());
    std::vector<std::uint64_t> raw(k * k, 0);
    for (std::size_t i = 0; i < table.rows(); ++i) {
      for (std::size_t v = 0; v < vars.size(); ++v) g[v] = offsets_[v] + table.code(v, i);
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a; b < g.size(); ++b) ++raw[g[a] * k + g[b]];
    }
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b) {
        const auto val = static_cast<double>(raw[a * k + b] + (a == b ? 0 : raw[b * k + a]));
        counts_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = val;
        counts_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = val;
      }
  }

  double count(std::size_t v, std::size_t c) const {
    const auto g = static_cast<Eigen::Index>(offsets_[v] + c);
    return counts_(g, g);
  }

  // bases[v] = base category index of variable v.
  double mean_vif(const std::vector<std::size_t>& bases) const {
    std::vector<Eigen::Index> cols;
    const auto& vars = table_.variables();
    for (std::size_t v = 0; v < vars.size(); ++v)
      for (std::size_t c = 0; c < vars[v].categories.size(); ++c)
        if (c != bases[v] && count(v, c) > 0) cols.push_back(static_cast<Eigen::Index>(offsets_[v] + c));
    if (cols.empty()) return 1.0;

    const double n = static_cast<double>(table_.rows());
    const auto m = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) {
        const double pa = counts_(cols[a], cols[a]) / n;
        const double pb = counts_(cols[b], cols[b]) / n;
        cov(a, b) = counts_(cols[a], cols[b]) / n - pa * pb;
      }
    const auto vifs = detail::vif_from_covariance(cov);
    double sum = 0.0;
    for (const double x : vifs) sum += x;
    return sum / static_cast<double>(vifs.size());
  }

 private:
  const MicrodataTable& table_;
  std::vector<std::size_t> offsets_;
  Eigen::MatrixXd counts_;
};

bool nearly_equal(double a, double b) {
  if (std::isinf(a) && std::isinf(b)) return true;
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

}  // namespace

double mean_vif_for_bases(const MicrodataTable& table, const BaseMap& base_map) {
  CooccurrenceMoments moments(table);
  std::vector<std::size_t> bases;
  for (const auto& var : table.variables()) {
    const auto it = base_map.find(var.name);
    if (it == base_map.end()) throw ConfigError("no base category given for '" + var.name + "'");
    bases.push_back(var.index_of(it->second));
  }
  return moments.mean_vif(bases);
}

BaseMap select_base_categories(const MicrodataTable& table) {
  const auto& vars = table.variables();
  CooccurrenceMoments moments(table);

  std::vector<std::size_t> bases(vars.size());
  std::vector<std::vector<std::size_t>> candidates(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto counts = table.category_counts(v);
    for (std::size_t c = 0; c < counts.size(); ++c)
      if (counts[c] > 0) candidates[v].push_back(c);
    if (candidates[v].size() < 2)
      throw DegeneracyError("variable '" + vars[v].name + "' has fewer than 2 populated categories");
    // provisional base: most frequent category, earliest on ties
    bases[v] = *std::max_element(candidates[v].begin(), candidates[v].end(),
                                 [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
  }

  for (std::size_t v = 0; v < vars.size(); ++v) {
    std::size_t best = candidates[v].front();
    double best_score = std::numeric_limits<double>::infinity();
    bool first = true;
    for (const auto c : candidates[v]) {
      bases[v] = c;
      const double score = moments.mean_vif(bases);
      if (first) {
        best = c;
        best_score = score;
        first = false;
        continue;
      }
      if (nearly_equal(score, best_score)) {
        if (moments.count(v, c) > moments.count(v, best)) {
          best = c;
          best_score = score;
        }
      } else if (score < best_score) {
        best = c;
        best_score = score;
      }
    }
    bases[v] = best;
  }

  BaseMap out;
  for (std::size_t v = 0; v < vars.size(); ++v) out[vars[v].name] = vars[v].categories[bases[v]];
  return out;
}

// ---------------------------------------------------------------------------
// Perfect predictors

std::vector<PerfectPredictor> detect_perfect_predictors(const MicrodataTable& table) {
  std::vector<PerfectPredictor> out;
  for (std::size_t v = 0; v < table.variables().size(); ++v) {
    const auto& var = table.variable(v);
    std::vector<std::size_t> count(var.categories.size(), 0), ones(var.categories.size(), 0);
    const auto& codes = table.codes(v);
    for (std::size_t i = 0; i < table.rows(); ++i) {
      ++count[codes[i]];
      ones[codes[i]] += table.outcome(i);
    }
    for (std::size_t c = 0; c < count.size(); ++c) {
      if (count[c] == 0) continue;
      if (ones[c] == 0)
        out.push_back({var.name, var.categories[c], PredictorDirection::AllZero, count[c]});
      else if (ones[c] == count[c])
        out.push_back({var.name, var.categories[c], PredictorDirection::AllOne, count[c]});
    }
  }
  return out;
}

EstimationSample build_estimation_sample(const MicrodataTable& table, const BaseMap& base_map) {
  std::vector<std::size_t> kept(table.rows());
  std::iota(kept.begin(), kept.end(), std::size_t{0});
  MicrodataTable current = table;
  std::vector<PerfectPredictor> flagged_all;

  for (;;) {
    const auto flagged = detect_perfect_predictors(current);
    if (flagged.empty()) break;
    std::vector<std::vector<bool>> drop(current.variables().size());
    for (std::size_t v = 0; v < drop.size(); ++v)
      drop[v].assign(current.variable(v).categories.size(), false);
    for (const auto& p : flagged) {
      const auto v = current.variable_index(p.variable);
      drop[v][current.variable(v).index_of(p.category)] = true;
    }
    std::vector<std::size_t> keep_local;
    for (std::size_t i = 0; i < current.rows(); ++i) {
      bool keep = true;
      for (std::size_t v = 0; v < drop.size() && keep; ++v) keep = !drop[v][current.code(v, i)];
      if (keep) keep_local.push_back(i);
    }
    if (keep_local.empty())
      throw DataError("every row belongs to a perfect-predictor category; nothing left to estimate");
    std::vector<std::size_t> next_kept;
    next_kept.reserve(keep_local.size());
    for (const auto i : keep_local) next_kept.push_back(kept[i]);
    kept = std::move(next_kept);
    current = current.select_rows(keep_local);
    flagged_all.insert(flagged_all.end(), flagged.begin(), flagged.end());
  }

  EstimationSample s;
  s.X = encode_design(current, base_map);
  s.y = outcome_vector(current);
  for (auto& r : s.X.source_rows) r = kept[r];
  s.dropped_rows = table.rows() - current.rows();

  for (const auto& p : flagged_all) {
    std::erase_if(s.X.dropped, [&](const DroppedCategory& d) {
      return d.variable == p.variable && d.category == p.category;
    });
    s.X.dropped.push_back({p.variable, p.category,
                           p.direction == PredictorDirection::AllZero
                               ? "perfect predictor: all outcomes 0"
                               : "perfect predictor: all outcomes 1",
                           p.rows});
  }
  s.perfect_predictors = std::move(flagged_all);
  return s;
}

// ---------------------------------------------------------------------------
// Prevalence

std::vector<Prevalence> group_prevalence(const MicrodataTable& table, std::string_view by) {
  const CategoricalVariable* var = nullptr;
  const std::vector<std::uint32_t>* codes = nullptr;
  if (table.group() && table.group()->name == by) {
    var = &*table.group();
    codes = &table.group_codes();
  } else {
    const auto v = table.variable_index(by);
    var = &table.variable(v);
    codes = &table.codes(v);
  }
  std::vector<Prevalence> out(var->categories.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c].category = var->categories[c];
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto& p = out[(*codes)[i]];
    ++p.count;
    p.positives += table.outcome(i);
  }
  for (auto& p : out)
    p.per_100 = p.count ? 100.0 * static_cast<double>(p.positives) / static_cast<double>(p.count) : 0.0;
  return out;
}

}  // namespace gapdecomp
