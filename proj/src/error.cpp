#include "shield/error.hpp"

namespace shield {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateTerm: return "DuplicateTerm";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::InvalidVector: return "InvalidVector";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InternalError: return "InternalError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace shield
