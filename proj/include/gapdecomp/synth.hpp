#pragma once

#include "gapdecomp/data_model.hpp"
#include "gapdecomp/decomposition.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace gapdecomp::synth {

struct DgpVariable {
  std::string name;
  std::vector<std::string> categories;
  std::string base;
  /// Category probabilities for group 1 and group 2.
  std::array<std::vector<double>, 2> probs;
  /// Log-odds shift relative to the base, per group; missing entries are 0.
  std::array<std::map<std::string, double>, 2> effects;
};

/// Two groups of independent categorical regressors with a logit outcome.
struct DataGeneratingProcess {
  std::string outcome = "outcome";
  std::string group = "group";
  std::array<std::string, 2> labels{"group1", "group2"};
  std::array<std::size_t, 2> sizes{0, 0};
  std::optional<std::uint64_t> seed;
  std::array<double, 2> intercept{0.0, 0.0};
  /// When set, intercepts are solved so the population rate of each group
  /// equals its target.
  std::optional<std::array<double, 2>> target_rates;
  std::vector<DgpVariable> variables;

  /// Throws ConfigError unless sizes >= 1, probabilities are non-negative and
  /// sum to 1 within 1e-12, bases and effect keys name declared categories.
  void validate() const;

  static DataGeneratingProcess from_json(const nlohmann::json& j);
  static DataGeneratingProcess load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  Schema schema() const;
  BaseMap base_map() const;
  /// Linear predictor of group g for one category code per variable.
  double eta(std::size_t g, std::span<const std::uint32_t> codes) const;
  /// True coefficient of every column of `design` for group g.
  Eigen::VectorXd true_beta(std::size_t g, const DesignMatrix& design) const;
};

/// Population mean of F(eta) in group g, by exact enumeration of the category
/// product.
double expected_rate(const DataGeneratingProcess& dgp, std::size_t g);

/// Copy of `dgp` with intercepts moved to meet target_rates (no-op without targets).
DataGeneratingProcess calibrate_intercepts(DataGeneratingProcess dgp);

/// Group 1 rows followed by group 2 rows. Group g draws from Rng(seed, g + 1).
MicrodataTable generate_table(const DataGeneratingProcess& dgp, std::uint64_t seed);

/// The generated table split into harmonized group samples.
std::pair<GroupSample, GroupSample> generate_microdata(const DataGeneratingProcess& dgp,
                                                       std::uint64_t seed);

struct SearchOptions {
  double initial_step = 1.0;
  double resolution = 1e-5;
  std::size_t max_evaluations = 2'000'000;
};

/// Hooke-Jeeves pattern search on the logit log-likelihood from beta = 0.
/// At most 3 columns and 200 rows; OracleError when the budget runs out.
Eigen::VectorXd brute_force_logit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const SearchOptions& search = {});

/// Sequential-switching contributions on equal-size groups (at most 20 rows
/// each) paired by sorted predicted probability, recomputing every mean from
/// scratch. `order` lists unit indices in switching order; empty means
/// declaration order.
std::vector<double> exact_fairlie_small(const GroupSample& g1, const GroupSample& g2,
                                        const Eigen::VectorXd& beta,
                                        std::span<const std::size_t> order = {},
                                        ContributionUnit unit = ContributionUnit::Variable);

}  // namespace gapdecomp::synth
