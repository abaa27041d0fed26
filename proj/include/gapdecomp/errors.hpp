#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gapdecomp {

// Exit-code contract of the CLI: input problems map to 2, numerical or
// estimation failures map to 3.
enum class ErrorCategory { Input, Numerical };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorCategory category, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)), category_(category) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return category_ == ErrorCategory::Input ? 2 : 3; }

 private:
  std::string kind_;
  ErrorCategory category_;
};

#define GAPDECOMP_DEFINE_ERROR(Name, kind, category)                          \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& message) : Error(kind, category, message) {} \
  };

GAPDECOMP_DEFINE_ERROR(SchemaError, "schema_error", ErrorCategory::Input)
GAPDECOMP_DEFINE_ERROR(DataError, "data_error", ErrorCategory::Input)
GAPDECOMP_DEFINE_ERROR(ConfigError, "configuration_error", ErrorCategory::Input)
GAPDECOMP_DEFINE_ERROR(DegeneracyError, "degeneracy_error", ErrorCategory::Input)
GAPDECOMP_DEFINE_ERROR(ShapeError, "shape_error", ErrorCategory::Input)
GAPDECOMP_DEFINE_ERROR(PreconditionError, "precondition_error", ErrorCategory::Input)
GAPDECOMP_DEFINE_ERROR(NonConvergenceError, "non_convergence_error", ErrorCategory::Numerical)
GAPDECOMP_DEFINE_ERROR(EstimationError, "estimation_error", ErrorCategory::Numerical)
GAPDECOMP_DEFINE_ERROR(DiagnosticError, "diagnostic_error", ErrorCategory::Numerical)
GAPDECOMP_DEFINE_ERROR(UndefinedRocError, "undefined_roc_error", ErrorCategory::Numerical)
GAPDECOMP_DEFINE_ERROR(UndefinedPercentageError, "undefined_percentage_error",
                       ErrorCategory::Numerical)
GAPDECOMP_DEFINE_ERROR(OracleError, "oracle_error", ErrorCategory::Numerical)

#undef GAPDECOMP_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row)
      : Error("parse_error", ErrorCategory::Input,
              message + " (row " + std::to_string(row) + ")"),
        row_(row) {}

  // 1-based data row, header excluded.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class CollinearityError : public Error {
 public:
  CollinearityError(const std::string& message, std::vector<std::string> columns)
      : Error("collinearity_error", ErrorCategory::Numerical, message),
        columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

}  // namespace gapdecomp
