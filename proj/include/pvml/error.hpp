#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pvml {

/// Every failure the library reports carries one of these codes so that
/// callers (and the CLI) can branch on the kind of failure instead of
/// parsing messages.
enum class ErrorCode {
  // core
  NonFiniteFeature,
  InvalidFeatureName,
  InvalidWeight,
  EmptyExample,
  MixedOutputTypes,
  EmptySource,
  NoFeatureOverlap,
  OutputTypeMismatch,
  EmptyScores,
  // provenance
  ParseError,
  UnknownTag,
  InvalidValue,
  // data
  UnparseableNumeric,
  MissingResponse,
  FileNotFound,
  HeaderMismatch,
  CsvParseError,
  InvalidSchema,
  // optimize
  ShapeMismatch,
  NonFiniteGradient,
  UnlabelledExample,
  InvalidConfig,
  TaskMismatch,
  // trees / ensemble
  EmptyNode,
  AllMembersRejected,
  InconsistentTask,
  // persist
  IoError,
  FormatError,
  UnknownModelClass,
  // repro
  UnknownClass,
  MissingProperty,
  ResourceChanged,
  ReproductionMismatch,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pvml
