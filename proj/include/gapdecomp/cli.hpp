#pragma once

#include "gapdecomp/data_model.hpp"
#include "gapdecomp/decomposition.hpp"
#include "gapdecomp/logit.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

namespace gapdecomp::cli {

/// Analysis settings read from a JSON file. Relative paths resolve against
/// the file's directory.
struct AnalysisConfig {
  std::filesystem::path data;
  Schema schema;
  std::array<std::string, 2> groups;
  /// nullopt selects base categories automatically on the two groups' rows.
  std::optional<BaseMap> base;
  /// Base map for the decomposition; nullopt reuses `base`.
  std::optional<BaseMap> decomposition_base;
  bool decomposition_base_auto = false;
  FitOptions fit;
  FairlieOptions fairlie;
  std::optional<std::uint64_t> seed;
  bool linear = false;
  std::string format = "text";
  std::optional<std::filesystem::path> out;

  static AnalysisConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static AnalysisConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// FNV-1a 64-bit digest, printed as 16 hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Runs `gapdecomp <command> [flags]`. Returns 0 on success, 2 on input
/// errors, 3 on numerical failures; errors are written to `err` as JSON.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gapdecomp::cli
