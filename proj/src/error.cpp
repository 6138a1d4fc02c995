#include "surpdec/error.hpp"

namespace surpdec {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingVeridical: return "MissingVeridical";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::ZeroNormEmbedding: return "ZeroNormEmbedding";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MissingEntry: return "MissingEntry";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::NegativeDeep: return "NegativeDeep";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::UnknownItemId: return "UnknownItemId";
    case ErrorCode::UnpairedItem: return "UnpairedItem";
    case ErrorCode::ContextMismatch: return "ContextMismatch";
    case ErrorCode::DanglingControlRef: return "DanglingControlRef";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::JoinError: return "JoinError";
    case ErrorCode::ItemFailures: return "ItemFailures";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace surpdec
