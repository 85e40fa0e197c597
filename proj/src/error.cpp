#include "pvml/error.hpp"

namespace pvml {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::InvalidFeatureName: return "InvalidFeatureName";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::EmptyExample: return "EmptyExample";
    case ErrorCode::MixedOutputTypes: return "MixedOutputTypes";
    case ErrorCode::EmptySource: return "EmptySource";
    case ErrorCode::NoFeatureOverlap: return "NoFeatureOverlap";
    case ErrorCode::OutputTypeMismatch: return "OutputTypeMismatch";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnparseableNumeric: return "UnparseableNumeric";
    case ErrorCode::MissingResponse: return "MissingResponse";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::CsvParseError: return "CsvParseError";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::UnlabelledExample: return "UnlabelledExample";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TaskMismatch: return "TaskMismatch";
    case ErrorCode::EmptyNode: return "EmptyNode";
    case ErrorCode::AllMembersRejected: return "AllMembersRejected";
    case ErrorCode::InconsistentTask: return "InconsistentTask";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnknownModelClass: return "UnknownModelClass";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::MissingProperty: return "MissingProperty";
    case ErrorCode::ResourceChanged: return "ResourceChanged";
    case ErrorCode::ReproductionMismatch: return "ReproductionMismatch";
  }
  return "Unknown";
}

}  // namespace pvml
