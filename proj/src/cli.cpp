#include "gapdecomp/cli.hpp"

#include "gapdecomp/csv.hpp"
#include "gapdecomp/diagnostics.hpp"
#include "gapdecomp/errors.hpp"
#include "gapdecomp/parallel.hpp"
#include "gapdecomp/report.hpp"
#include "gapdecomp/rng.hpp"
#include "gapdecomp/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace gapdecomp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

BaseMap base_map_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be \"auto\" or an object of variable: category");
  BaseMap m;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw ConfigError(what + " must map variable names to category labels");
    m[k] = v.get<std::string>();
  }
  return m;
}

bool is_auto(const json& j) { return j.is_string() && j.get<std::string>() == "auto"; }

fs::path resolve(const fs::path& p, const fs::path& dir) { return p.is_absolute() ? p : dir / p; }

}  // namespace

AnalysisConfig AnalysisConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  try {
    AnalysisConfig c;
    c.data = resolve(j.at("data").get<std::string>(), base_dir);
    const auto& schema = j.at("schema");
    c.schema = schema.is_string() ? Schema::load(resolve(schema.get<std::string>(), base_dir))
                                  : Schema::from_json(schema);
    if (!c.schema.group) throw ConfigError("schema must name a group column");
    const auto& groups = j.at("groups");
    if (!groups.is_array() || groups.size() != 2) throw ConfigError("groups must list exactly two labels");
    c.groups = {groups[0].get<std::string>(), groups[1].get<std::string>()};
    if (c.groups[0] == c.groups[1]) throw ConfigError("the two group labels must differ");

    if (j.contains("base") && !is_auto(j["base"])) c.base = base_map_from_json(j["base"], "base");

    if (j.contains("fit")) {
      const auto& f = j["fit"];
      c.fit.tol = f.value("tol", c.fit.tol);
      c.fit.max_iter = f.value("max_iter", c.fit.max_iter);
      c.fit.ridge = f.value("ridge", c.fit.ridge);
      if (!(c.fit.tol > 0.0) || c.fit.max_iter < 1 || !(c.fit.ridge >= 0.0))
        throw ConfigError("fit options need tol > 0, max_iter >= 1, ridge >= 0");
    }
    c.fairlie.fit = c.fit;

    if (j.contains("decomposition")) {
      const auto& d = j["decomposition"];
      c.fairlie.replications = d.value("replications", c.fairlie.replications);
      if (d.contains("seed") && !d["seed"].is_null()) c.seed = d["seed"].get<std::uint64_t>();
      if (d.contains("coef_source")) c.fairlie.coef_source = parse_coef_source(d["coef_source"].get<std::string>());
      if (d.contains("ordering")) c.fairlie.ordering = parse_ordering(d["ordering"].get<std::string>());
      if (d.contains("unit")) c.fairlie.unit = parse_unit(d["unit"].get<std::string>());
      if (d.contains("base")) {
        if (is_auto(d["base"]))
          c.decomposition_base_auto = true;
        else
          c.decomposition_base = base_map_from_json(d["base"], "decomposition.base");
      }
      c.linear = d.value("linear", false);
    }
    if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("format")) c.format = j["format"].get<std::string>();
    if (j.contains("out") && !j["out"].is_null()) c.out = resolve(j["out"].get<std::string>(), base_dir);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

AnalysisConfig AnalysisConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration JSON: ") + e.what());
  }
  return from_json(j, path.parent_path());
}

json AnalysisConfig::to_json() const {
  json j;
  j["data"] = data.filename().string();
  j["schema"] = schema.to_json();
  j["groups"] = groups;
  j["base"] = base ? json(*base) : json("auto");
  j["fit"] = {{"tol", fit.tol}, {"max_iter", fit.max_iter}, {"ridge", fit.ridge}};
  j["decomposition"] = {{"replications", fairlie.replications},
                        {"seed", seed ? json(*seed) : json(nullptr)},
                        {"coef_source", to_string(fairlie.coef_source)},
                        {"ordering", to_string(fairlie.ordering)},
                        {"unit", to_string(fairlie.unit)},
                        {"base", decomposition_base ? json(*decomposition_base)
                                                    : json(decomposition_base_auto ? "auto" : "same")},
                        {"linear", linear}};
  j["format"] = format;
  return j;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Flags {
  std::string config;
  std::string dgp;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<std::string> format;
  std::optional<std::string> out;
};

struct GroupFit {
  std::string label;
  EstimationSample sample;
  LogitFit fit;
  std::optional<DiagnosticsReport> diagnostics;
  std::optional<VifReport> vif_only;
  std::optional<std::string> failure;
};

class Emitter {
 public:
  Emitter(std::ostream& stdout_stream, std::optional<fs::path> path) : out_(stdout_stream), path_(std::move(path)) {}

  void write(const std::string& text) {
    if (!path_) {
      out_ << text;
      return;
    }
    std::ofstream f(*path_, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file " + path_->string());
    f << text;
  }

 private:
  std::ostream& out_;
  std::optional<fs::path> path_;
};

AnalysisConfig resolve_config(const Flags& flags) {
  if (flags.config.empty()) throw ConfigError("--config is required");
  AnalysisConfig c = AnalysisConfig::load(flags.config);
  if (flags.seed) c.seed = flags.seed;
  if (flags.replications) c.fairlie.replications = *flags.replications;
  if (flags.format) c.format = *flags.format;
  if (flags.out) c.out = fs::path(*flags.out);
  if (c.format != "text" && c.format != "json" && c.format != "csv")
    throw ConfigError("format must be text, json or csv");
  if (c.fairlie.replications < 1) throw ConfigError("replications must be at least 1");
  return c;
}

struct Loaded {
  MicrodataTable table;
  BaseMap base;
};

Loaded load_analysis(AnalysisConfig& c) {
  MicrodataTable all = load_csv(c.data, c.schema);
  MicrodataTable pooled = all.select_groups({c.groups[0], c.groups[1]});
  if (!c.base) c.base = select_base_categories(pooled);
  return {std::move(pooled), *c.base};
}

std::vector<GroupFit> fit_groups(const AnalysisConfig& c, const Loaded& data, bool with_diagnostics) {
  std::vector<GroupFit> fits(2);
  parallel_for(2, thread_limit(), [&](std::size_t g) {
    auto& gf = fits[g];
    gf.label = c.groups[g];
    gf.sample = build_estimation_sample(data.table.select_group(c.groups[g]), data.base);
    gf.fit = fit_logit(gf.sample.X, gf.sample.y, c.fit);
    if (!gf.fit.converged)
      throw NonConvergenceError(fmt::format("logit for group '{}' did not converge in {} iterations", gf.label,
                                            c.fit.max_iter));
    if (with_diagnostics) gf.diagnostics = diagnose(gf.fit, gf.sample.X, gf.sample.y);
  });
  return fits;
}

json sample_json(const GroupFit& gf) {
  return {{"group", gf.label},
          {"dropped_categories", report::dropped_json(gf.sample.X)},
          {"perfect_predictors", report::perfect_predictors_json(gf.sample.perfect_predictors)},
          {"dropped_rows", gf.sample.dropped_rows}};
}

std::string sample_text(const GroupFit& gf) {
  std::string out;
  for (const auto& d : gf.sample.X.dropped)
    out += fmt::format("note: {}={} omitted ({}, {} rows)\n", d.variable, d.category, d.reason, d.rows);
  if (gf.sample.dropped_rows)
    out += fmt::format("note: {} observations omitted (perfect predictors)\n", gf.sample.dropped_rows);
  return out;
}

std::string header(const std::string& command, const AnalysisConfig& c) {
  return fmt::format("# gapdecomp {}\n# config: {}\n\n", command, c.to_json().dump());
}

json envelope(const std::string& command, const AnalysisConfig& c) {
  return {{"command", command}, {"config", c.to_json()}, {"seed", c.seed ? json(*c.seed) : json(nullptr)}};
}

std::string fits_output(const AnalysisConfig& c, const std::vector<GroupFit>& fits) {
  if (c.format == "json") {
    json j = envelope("fit", c);
    j["fits"] = json::array();
    for (const auto& gf : fits) {
      json f = report::fit_json(gf.fit);
      f.update(sample_json(gf));
      j["fits"].push_back(f);
    }
    return j.dump(2) + "\n";
  }
  if (c.format == "csv") {
    std::string out;
    for (std::size_t g = 0; g < fits.size(); ++g) {
      std::istringstream rows(report::fit_csv(fits[g].fit));
      std::string line;
      bool first = true;
      while (std::getline(rows, line)) {
        if (first) {
          if (g == 0) out += "group," + line + "\n";
          first = false;
          continue;
        }
        out += csv::escape(fits[g].label) + "," + line + "\n";
      }
    }
    return out;
  }
  std::string out = header("fit", c);
  for (const auto& gf : fits) {
    out += report::fit_text(gf.fit, fmt::format("Group: {}", gf.label));
    out += sample_text(gf) + "\n";
  }
  return out;
}

int cmd_fit(const Flags& flags, std::ostream& out) {
  AnalysisConfig c = resolve_config(flags);
  const Loaded data = load_analysis(c);
  const auto fits = fit_groups(c, data, false);
  Emitter(out, c.out).write(fits_output(c, fits));
  return 0;
}

std::string diagnostics_output(const AnalysisConfig& c, const std::vector<GroupFit>& fits) {
  if (c.format == "json") {
    json j = envelope("diagnose", c);
    j["models"] = json::array();
    for (const auto& gf : fits) {
      json m = {{"group", gf.label}};
      if (gf.diagnostics) {
        m.update(report::diagnostics_json(*gf.diagnostics));
        json roc = json::array();
        for (const auto& p : gf.diagnostics->roc) roc.push_back({p.fpr, p.tpr});
        m["roc"] = roc;
      } else if (gf.vif_only) {
        m["vif"] = report::vif_json(*gf.vif_only);
        m["error"] = gf.failure.value_or("");
      }
      j["models"].push_back(m);
    }
    return j.dump(2) + "\n";
  }
  if (c.format == "csv") {
    std::string out = "group,fpr,tpr\n";
    for (const auto& gf : fits) {
      if (!gf.diagnostics) continue;
      for (const auto& p : gf.diagnostics->roc)
        out += fmt::format("{},{},{}\n", csv::escape(gf.label), p.fpr, p.tpr);
    }
    return out;
  }
  std::string out = header("diagnose", c);
  for (const auto& gf : fits) {
    if (gf.diagnostics) {
      out += report::diagnostics_text(*gf.diagnostics, fmt::format("Group: {}", gf.label)) + "\n";
    } else if (gf.vif_only) {
      std::string text = fmt::format("Group: {}\n", gf.label);
      if (gf.vif_only->collinearity_warning)
        text += "WARNING: infinite VIF, at least one column is an exact linear combination of others\n";
      for (const auto& e : gf.vif_only->columns)
        text += fmt::format("{:<40}{:>12}\n", e.label, std::isfinite(e.vif) ? fmt::format("{:.4f}", e.vif) : "inf");
      if (gf.failure) text += "fit failed: " + *gf.failure + "\n";
      out += text + "\n";
    }
  }
  return out;
}

int cmd_diagnose(const Flags& flags, std::ostream& out, std::ostream& err) {
  AnalysisConfig c = resolve_config(flags);
  const Loaded data = load_analysis(c);
  std::vector<GroupFit> fits(2);
  int status = 0;
  std::optional<json> error;
  for (std::size_t g = 0; g < 2; ++g) {
    auto& gf = fits[g];
    gf.label = c.groups[g];
    const MicrodataTable rows = data.table.select_group(c.groups[g]);
    const double rate = rows.outcome_mean();
    if (rate == 0.0 || rate == 1.0)
      throw UndefinedRocError(
          fmt::format("outcome takes a single value in group '{}'; ROC and AUC are undefined", gf.label));
    gf.sample = build_estimation_sample(rows, data.base);
    gf.vif_only = vif(gf.sample.X);
    if (gf.vif_only->collinearity_warning)
      err << fmt::format("warning: infinite VIF in model for group '{}'\n", gf.label);
    try {
      gf.fit = fit_logit(gf.sample.X, gf.sample.y, c.fit);
      if (!gf.fit.converged)
        throw NonConvergenceError(fmt::format("logit for group '{}' did not converge", gf.label));
      gf.diagnostics = diagnose(gf.fit, gf.sample.X, gf.sample.y);
    } catch (const Error& e) {
      gf.failure = fmt::format("{}: {}", e.kind(), e.what());
      if (!error) {
        status = e.exit_code();
        error = json{{"error", e.kind()}, {"message", e.what()}, {"exit_code", status}};
      }
    }
  }
  Emitter(out, c.out).write(diagnostics_output(c, fits));
  if (error) err << error->dump() << "\n";
  return status;
}

struct Decomposition {
  DecompositionResult fairlie;
  std::optional<OaxacaResult> linear;
  BaseMap base;
};

Decomposition run_decomposition(const AnalysisConfig& c, const Loaded& data) {
  if (!c.seed) throw ConfigError("decomposition needs a seed (config \"seed\" or --seed)");
  Decomposition d;
  d.base = c.decomposition_base ? *c.decomposition_base
           : c.decomposition_base_auto ? select_base_categories(data.table)
                                       : data.base;
  const auto [g1, g2] = make_group_samples(data.table, c.groups[0], c.groups[1], d.base);
  FairlieOptions options = c.fairlie;
  options.seed = *c.seed;
  d.fairlie = fairlie_decompose(g1, g2, options);
  if (c.linear) d.linear = oaxaca_linear(g1, g2, c.fairlie.unit == ContributionUnit::Column);
  return d;
}

void add_decomposition(json& j, const Decomposition& d) {
  j["decomposition"] = report::decomposition_json(d.fairlie);
  j["decomposition"]["base"] = d.base;
  if (d.linear) j["linear"] = report::oaxaca_json(*d.linear);
}

std::string decomposition_text(const Decomposition& d, const std::string& outcome) {
  std::string out = decomposition_report(d.fairlie, outcome);
  if (!d.fairlie.omitted_columns.empty()) {
    out += "note: coefficients fixed at 0 for";
    for (const auto& col : d.fairlie.omitted_columns) out += " " + col;
    out += "\n";
  }
  if (d.fairlie.omitted_rows)
    out += fmt::format("note: {} observations omitted from the coefficient fit\n", d.fairlie.omitted_rows);
  if (d.linear) out += "\n" + report::oaxaca_text(*d.linear);
  return out;
}

int cmd_decompose(const Flags& flags, std::ostream& out) {
  AnalysisConfig c = resolve_config(flags);
  const Loaded data = load_analysis(c);
  const Decomposition d = run_decomposition(c, data);
  std::string text;
  if (c.format == "json") {
    json j = envelope("decompose", c);
    add_decomposition(j, d);
    text = j.dump(2) + "\n";
  } else if (c.format == "csv") {
    text = report::decomposition_csv(d.fairlie);
  } else {
    text = header("decompose", c) + decomposition_text(d, c.schema.outcome);
  }
  Emitter(out, c.out).write(text);
  return 0;
}

int cmd_report(const Flags& flags, std::ostream& out) {
  AnalysisConfig c = resolve_config(flags);
  if (c.format == "csv") throw ConfigError("report supports text or json output");
  const Loaded data = load_analysis(c);
  const auto fits = fit_groups(c, data, true);
  const Decomposition d = run_decomposition(c, data);
  std::string text;
  if (c.format == "json") {
    json j = envelope("report", c);
    j["fits"] = json::array();
    for (const auto& gf : fits) {
      json f = report::fit_json(gf.fit);
      f.update(sample_json(gf));
      f["diagnostics"] = report::diagnostics_json(*gf.diagnostics);
      j["fits"].push_back(f);
    }
    add_decomposition(j, d);
    text = j.dump(2) + "\n";
  } else {
    text = header("report", c);
    for (const auto& gf : fits) {
      text += report::fit_text(gf.fit, fmt::format("Group: {}", gf.label));
      text += sample_text(gf) + "\n";
      text += report::diagnostics_text(*gf.diagnostics, fmt::format("Diagnostics: {}", gf.label)) + "\n";
    }
    text += decomposition_text(d, c.schema.outcome);
  }
  Emitter(out, c.out).write(text);
  return 0;
}

int cmd_simulate(const Flags& flags, std::ostream& out) {
  if (flags.dgp.empty()) throw ConfigError("--dgp is required");
  if (!flags.out) throw ConfigError("--out is required");
  std::ifstream in(flags.dgp);
  if (!in) throw ConfigError("cannot open data-generating process " + flags.dgp);
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed data-generating process JSON: ") + e.what());
  }
  const auto dgp = synth::DataGeneratingProcess::from_json(raw);
  const auto seed = flags.seed ? flags.seed : dgp.seed;
  if (!seed) throw ConfigError("simulate needs a seed (DGP \"seed\" or --seed)");

  const MicrodataTable table = synth::generate_table(dgp, *seed);
  const fs::path csv_path = *flags.out;
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + csv_path.string());
    std::vector<std::string> row{table.outcome_name(), *table.group_name()};
    for (const auto& v : table.variables()) row.push_back(v.name);
    csv::write_row(f, row);
    for (std::size_t i = 0; i < table.rows(); ++i) {
      row[0] = table.outcome(i) ? "1" : "0";
      row[1] = table.group()->categories[table.group_codes()[i]];
      for (std::size_t v = 0; v < table.variables().size(); ++v) row[v + 2] = table.label(v, i);
      csv::write_row(f, row);
    }
  }
  const auto calibrated = synth::calibrate_intercepts(dgp);
  const json manifest = {{"data", csv_path.filename().string()},
                         {"dgp", fs::path(flags.dgp).filename().string()},
                         {"dgp_hash", "fnv1a64:" + fnv1a64_hex(raw.dump())},
                         {"seed", *seed},
                         {"rng", fmt::format("mt19937_64/splitmix64 streams, version {}", Rng::kVersion)},
                         {"rows", table.rows()},
                         {"sizes", dgp.sizes},
                         {"intercepts", calibrated.intercept},
                         {"schema", dgp.schema().to_json()}};
  const fs::path manifest_path = fs::path(csv_path.string() + ".manifest.json");
  std::ofstream m(manifest_path, std::ios::binary);
  if (!m) throw ConfigError("cannot write " + manifest_path.string());
  m << manifest.dump(2) << "\n";
  out << fmt::format("wrote {} rows to {} (manifest {})\n", table.rows(), csv_path.string(),
                     manifest_path.string());
  return 0;
}

void write_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group gap decomposition for binary outcomes", "gapdecomp"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Analysis configuration (JSON)")->required();
    sub->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("--out", flags.out, "Output file (default: standard output)");
    sub->add_option("--seed", flags.seed, "Seed for stochastic steps");
    sub->add_option("--replications", flags.replications, "Decomposition replications");
  };
  auto* fit = app.add_subcommand("fit", "Separate logit fit per group");
  auto* diagnose_cmd = app.add_subcommand("diagnose", "VIF, link test, ROC and AUC per group model");
  auto* decompose = app.add_subcommand("decompose", "Nonlinear decomposition of the group gap");
  auto* report_cmd = app.add_subcommand("report", "Fits, diagnostics and decomposition in one report");
  for (auto* sub : {fit, diagnose_cmd, decompose, report_cmd}) add_common(sub);
  auto* simulate = app.add_subcommand("simulate", "Generate microdata from a data-generating process");
  simulate->add_option("--dgp", flags.dgp, "Data-generating process (JSON)")->required();
  simulate->add_option("--out", flags.out, "CSV output path")->required();
  simulate->add_option("--seed", flags.seed, "Seed (overrides the DGP file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage_error", e.what(), 2);
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(flags, out);
    if (diagnose_cmd->parsed()) return cmd_diagnose(flags, out, err);
    if (decompose->parsed()) return cmd_decompose(flags, out);
    if (report_cmd->parsed()) return cmd_report(flags, out);
    if (simulate->parsed()) return cmd_simulate(flags, out);
  } catch (const Error& e) {
    write_error(err, e.kind(), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    write_error(err, "io_error", e.what(), 2);
    return 2;
  } catch (const std::exception& e) {
    write_error(err, "internal_error", e.what(), 3);
    return 3;
  }
  return 2;
}

}  // namespace gapdecomp::cli
