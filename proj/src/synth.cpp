#include "gapdecomp/synth.hpp"

#include "gapdecomp/errors.hpp"
#include "gapdecomp/logit.hpp"
#include "gapdecomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace gapdecomp::synth {

using nlohmann::json;

namespace {

std::vector<double> number_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(what + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::map<std::string, double> effect_map(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be an object of category: number");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ConfigError(what + " must be an object of category: number");
    out[k] = v.get<double>();
  }
  return out;
}

template <class T>
std::array<T, 2> pair_or_scalar(const json& j, const std::string& what) {
  if (j.is_array()) {
    if (j.size() != 2) throw ConfigError(what + " must have one entry per group");
    return {j[0].get<T>(), j[1].get<T>()};
  }
  const T v = j.get<T>();
  return {v, v};
}

double effect_of(const DgpVariable& v, std::size_t g, std::size_t code) {
  const auto it = v.effects[g].find(v.categories[code]);
  return it == v.effects[g].end() ? 0.0 : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// DataGeneratingProcess

void DataGeneratingProcess::validate() const {
  for (std::size_t g = 0; g < 2; ++g)
    if (sizes[g] < 1) throw ConfigError("group '" + labels[g] + "' needs at least one row");
  if (labels[0] == labels[1]) throw ConfigError("group labels must differ");
  if (variables.empty()) throw ConfigError("data-generating process declares no variables");
  std::set<std::string> names{outcome, group};
  if (names.size() != 2) throw ConfigError("outcome and group columns must differ");
  for (const auto& v : variables) {
    if (!names.insert(v.name).second) throw ConfigError("column '" + v.name + "' is declared twice");
    if (v.categories.size() < 2) throw ConfigError("variable '" + v.name + "' needs at least 2 categories");
    if (std::set<std::string>(v.categories.begin(), v.categories.end()).size() != v.categories.size())
      throw ConfigError("variable '" + v.name + "' declares duplicate categories");
    if (std::find(v.categories.begin(), v.categories.end(), v.base) == v.categories.end())
      throw ConfigError("base '" + v.base + "' is not a category of '" + v.name + "'");
    for (std::size_t g = 0; g < 2; ++g) {
      const auto& p = v.probs[g];
      if (p.size() != v.categories.size())
        throw ConfigError("variable '" + v.name + "' needs one probability per category");
      double sum = 0.0;
      for (const double x : p) {
        if (!(x >= 0.0)) throw ConfigError("variable '" + v.name + "' has a negative probability");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("probabilities of '" + v.name + "' do not sum to 1");
      for (const auto& [cat, value] : v.effects[g]) {
        if (std::find(v.categories.begin(), v.categories.end(), cat) == v.categories.end())
          throw ConfigError("effect names unknown category '" + cat + "' of '" + v.name + "'");
        if (!std::isfinite(value)) throw ConfigError("effects must be finite");
      }
    }
  }
  if (target_rates)
    for (const double r : *target_rates)
      if (!(r > 0.0 && r < 1.0)) throw ConfigError("target rates must lie strictly between 0 and 1");
}

DataGeneratingProcess DataGeneratingProcess::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("data-generating process must be a JSON object");
  try {
    DataGeneratingProcess d;
    if (j.contains("outcome")) d.outcome = j.at("outcome").get<std::string>();
    const auto& grp = j.at("group");
    d.group = grp.at("name").get<std::string>();
    d.labels = pair_or_scalar<std::string>(grp.at("labels"), "group.labels");
    d.sizes = pair_or_scalar<std::size_t>(grp.at("sizes"), "group.sizes");
    if (j.contains("seed") && !j["seed"].is_null()) d.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("intercept")) d.intercept = pair_or_scalar<double>(j["intercept"], "intercept");
    if (j.contains("target_rates")) d.target_rates = pair_or_scalar<double>(j["target_rates"], "target_rates");
    for (const auto& jv : j.at("variables")) {
      DgpVariable v;
      v.name = jv.at("name").get<std::string>();
      v.categories = jv.at("categories").get<std::vector<std::string>>();
      v.base = jv.contains("base") ? jv["base"].get<std::string>() : v.categories.at(0);
      const auto& probs = jv.at("probs");
      if (!probs.empty() && probs[0].is_array()) {
        if (probs.size() != 2) throw ConfigError("probs of '" + v.name + "' must list both groups");
        v.probs = {number_list(probs[0], "probs"), number_list(probs[1], "probs")};
      } else {
        const auto p = number_list(probs, "probs");
        v.probs = {p, p};
      }
      if (jv.contains("effects")) v.effects[0] = v.effects[1] = effect_map(jv["effects"], "effects");
      if (jv.contains("effects_group2")) v.effects[1] = effect_map(jv["effects_group2"], "effects_group2");
      d.variables.push_back(std::move(v));
    }
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed data-generating process: ") + e.what());
  }
}

DataGeneratingProcess DataGeneratingProcess::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data-generating process " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed data-generating process JSON: ") + e.what());
  }
  return from_json(j);
}

json DataGeneratingProcess::to_json() const {
  json j;
  j["outcome"] = outcome;
  j["group"] = {{"name", group}, {"labels", labels}, {"sizes", sizes}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["intercept"] = intercept;
  if (target_rates) j["target_rates"] = *target_rates;
  j["variables"] = json::array();
  for (const auto& v : variables) {
    j["variables"].push_back({{"name", v.name},
                              {"categories", v.categories},
                              {"base", v.base},
                              {"probs", v.probs},
                              {"effects", v.effects[0]},
                              {"effects_group2", v.effects[1]}});
  }
  return j;
}

Schema DataGeneratingProcess::schema() const {
  Schema s;
  s.outcome = outcome;
  s.group = group;
  for (const auto& v : variables) s.variables.push_back(v.name);
  return s;
}

BaseMap DataGeneratingProcess::base_map() const {
  BaseMap m;
  for (const auto& v : variables) m[v.name] = v.base;
  return m;
}

double DataGeneratingProcess::eta(std::size_t g, std::span<const std::uint32_t> codes) const {
  double e = intercept[g];
  for (std::size_t v = 0; v < variables.size(); ++v) e += effect_of(variables[v], g, codes[v]);
  return e;
}

Eigen::VectorXd DataGeneratingProcess::true_beta(std::size_t g, const DesignMatrix& design) const {
  Eigen::VectorXd beta(static_cast<Eigen::Index>(design.cols()));
  for (std::size_t j = 0; j < design.cols(); ++j) {
    const auto& col = design.columns[j];
    double b = 0.0;
    if (col.is_intercept()) {
      b = intercept[g];
      // Effects are relative to the DGP base; shift when the design uses another base.
      for (const auto& v : variables) {
        const auto it = design.base_map.find(v.name);
        if (it == design.base_map.end()) continue;
        const auto code = static_cast<std::size_t>(
            std::find(v.categories.begin(), v.categories.end(), it->second) - v.categories.begin());
        if (code < v.categories.size()) b += effect_of(v, g, code);
      }
    } else {
      for (const auto& v : variables) {
        if (v.name != col.variable) continue;
        const auto it = design.base_map.find(v.name);
        const std::string& base = it == design.base_map.end() ? v.base : it->second;
        const auto find = [&](const std::string& c) {
          return static_cast<std::size_t>(std::find(v.categories.begin(), v.categories.end(), c) -
                                          v.categories.begin());
        };
        b = effect_of(v, g, find(col.category)) - effect_of(v, g, find(base));
      }
    }
    beta(static_cast<Eigen::Index>(j)) = b;
  }
  return beta;
}

// ---------------------------------------------------------------------------
// Population rates

namespace {

double enumerate_rate(const DataGeneratingProcess& d, std::size_t g, std::size_t v, double eta, double w) {
  if (v == d.variables.size()) return w * logistic(eta);
  const auto& var = d.variables[v];
  double sum = 0.0;
  for (std::size_t c = 0; c < var.categories.size(); ++c) {
    const double p = var.probs[g][c];
    if (p == 0.0) continue;
    sum += enumerate_rate(d, g, v + 1, eta + effect_of(var, g, c), w * p);
  }
  return sum;
}

}  // namespace

double expected_rate(const DataGeneratingProcess& dgp, std::size_t g) {
  if (g > 1) throw ConfigError("group index must be 0 or 1");
  return enumerate_rate(dgp, g, 0, dgp.intercept[g], 1.0);
}

DataGeneratingProcess calibrate_intercepts(DataGeneratingProcess dgp) {
  if (!dgp.target_rates) return dgp;
  for (std::size_t g = 0; g < 2; ++g) {
    const double target = (*dgp.target_rates)[g];
    double lo = -50.0, hi = 50.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      dgp.intercept[g] = 0.5 * (lo + hi);
      (expected_rate(dgp, g) < target ? lo : hi) = dgp.intercept[g];
    }
    dgp.intercept[g] = 0.5 * (lo + hi);
  }
  return dgp;
}

// ---------------------------------------------------------------------------
// Generation

MicrodataTable generate_table(const DataGeneratingProcess& dgp_in, std::uint64_t seed) {
  dgp_in.validate();
  const DataGeneratingProcess dgp = calibrate_intercepts(dgp_in);
  const std::size_t n = dgp.sizes[0] + dgp.sizes[1];
  const std::size_t k = dgp.variables.size();

  std::vector<std::vector<std::uint32_t>> codes(k, std::vector<std::uint32_t>(n));
  std::vector<std::uint8_t> outcome(n);
  std::vector<std::uint32_t> group_codes(n);
  std::vector<std::uint32_t> row_codes(k);

  std::size_t row = 0;
  for (std::size_t g = 0; g < 2; ++g) {
    Rng rng(seed, g + 1);
    std::vector<std::vector<double>> cumulative(k);
    for (std::size_t v = 0; v < k; ++v) {
      cumulative[v].resize(dgp.variables[v].categories.size());
      std::partial_sum(dgp.variables[v].probs[g].begin(), dgp.variables[v].probs[g].end(),
                       cumulative[v].begin());
    }
    for (std::size_t i = 0; i < dgp.sizes[g]; ++i, ++row) {
      for (std::size_t v = 0; v < k; ++v) {
        row_codes[v] = static_cast<std::uint32_t>(rng.categorical(cumulative[v]));
        codes[v][row] = row_codes[v];
      }
      outcome[row] = rng.bernoulli(logistic(dgp.eta(g, row_codes))) ? 1 : 0;
      group_codes[row] = static_cast<std::uint32_t>(g);
    }
  }

  std::vector<CategoricalVariable> vars;
  for (const auto& v : dgp.variables) vars.push_back({v.name, v.categories, v.base});
  CategoricalVariable group{dgp.group, {dgp.labels[0], dgp.labels[1]}, std::nullopt};
  return MicrodataTable(dgp.outcome, std::move(vars), std::move(outcome), std::move(codes),
                        std::move(group), std::move(group_codes));
}

std::pair<GroupSample, GroupSample> generate_microdata(const DataGeneratingProcess& dgp,
                                                       std::uint64_t seed) {
  return make_group_samples(generate_table(dgp, seed), dgp.labels[0], dgp.labels[1], dgp.base_map());
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

// Written out term by term so it shares nothing with the estimator.
double naive_log_likelihood(const Eigen::VectorXd& b, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double t = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) t += X(i, j) * b(j);
    const double p = 1.0 / (1.0 + std::exp(-t));
    ll += y(i) == 1.0 ? std::log(p) : std::log1p(-p);
  }
  return std::isnan(ll) ? -std::numeric_limits<double>::infinity() : ll;
}

}  // namespace

Eigen::VectorXd brute_force_logit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const SearchOptions& search) {
  if (X.cols() < 1 || X.cols() > 3) throw PreconditionError("pattern search handles 1 to 3 columns");
  if (X.rows() > 200) throw PreconditionError("pattern search handles at most 200 rows");
  if (y.size() != X.rows()) throw ShapeError("outcome length does not match design rows");

  std::size_t evaluations = 0;
  auto f = [&](const Eigen::VectorXd& b) {
    if (++evaluations > search.max_evaluations)
      throw OracleError("pattern search exhausted its evaluation budget");
    return naive_log_likelihood(b, X, y);
  };

  // Exploratory coordinate moves around `base` with step h.
  auto explore = [&](Eigen::VectorXd point, double value, double h) {
    for (Eigen::Index j = 0; j < point.size(); ++j) {
      for (const double dir : {1.0, -1.0}) {
        Eigen::VectorXd trial = point;
        trial(j) += dir * h;
        const double v = f(trial);
        if (v > value) {
          point = std::move(trial);
          value = v;
          break;
        }
      }
    }
    return std::pair{point, value};
  };

  Eigen::VectorXd base = Eigen::VectorXd::Zero(X.cols());
  double base_value = f(base);
  double h = search.initial_step;
  while (h >= search.resolution) {
    auto [point, value] = explore(base, base_value, h);
    if (value <= base_value) {
      h *= 0.5;
      continue;
    }
    // Pattern moves: keep extrapolating along the improving direction.
    while (value > base_value) {
      const Eigen::VectorXd pattern = 2.0 * point - base;
      base = point;
      base_value = value;
      std::tie(point, value) = explore(pattern, f(pattern), h);
    }
  }
  return base;
}

std::vector<double> exact_fairlie_small(const GroupSample& g1, const GroupSample& g2,
                                        const Eigen::VectorXd& beta, std::span<const std::size_t> order,
                                        ContributionUnit unit) {
  if (g1.n() != g2.n()) throw PreconditionError("exact decomposition needs equal group sizes");
  if (g1.n() > 20) throw PreconditionError("exact decomposition handles at most 20 rows per group");
  if (g1.X.columns != g2.X.columns) throw ShapeError("group designs have different columns");
  const auto units = unit == ContributionUnit::Variable ? g1.X.variable_blocks() : g1.X.column_blocks();

  std::vector<std::size_t> sequence(order.begin(), order.end());
  if (sequence.empty()) {
    sequence.resize(units.size());
    std::iota(sequence.begin(), sequence.end(), std::size_t{0});
  }
  if (sequence.size() != units.size()) throw PreconditionError("order must list every unit once");

  auto sorted_rows = [&](const GroupSample& g) {
    const Eigen::VectorXd p = predict_probabilities(beta, g.X.values);
    std::vector<std::size_t> rows(g.n());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return p(static_cast<Eigen::Index>(a)) < p(static_cast<Eigen::Index>(b));
    });
    return rows;
  };
  const auto rows1 = sorted_rows(g1);
  const auto rows2 = sorted_rows(g2);
  const std::size_t n = g1.n();
  const auto k = g1.X.values.cols();

  // Mean F over pairs with the first `switched` units of `sequence` taken from group 2.
  auto mean_prob = [&](std::size_t switched) {
    std::vector<bool> from2(static_cast<std::size_t>(k), false);
    for (std::size_t s = 0; s < switched; ++s)
      for (const auto j : units[sequence[s]].columns) from2[j] = true;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double t = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const auto& src = from2[static_cast<std::size_t>(j)] ? g2.X.values : g1.X.values;
        const auto r = static_cast<Eigen::Index>(from2[static_cast<std::size_t>(j)] ? rows2[i] : rows1[i]);
        t += src(r, j) * beta(j);
      }
      total += 1.0 / (1.0 + std::exp(-t));
    }
    return total / static_cast<double>(n);
  };

  std::vector<double> out(units.size(), 0.0);
  for (std::size_t s = 0; s < sequence.size(); ++s) out[sequence[s]] = mean_prob(s) - mean_prob(s + 1);
  return out;
}

}  // namespace gapdecomp::synth
