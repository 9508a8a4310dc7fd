#include "sscl/error.hpp"

namespace sscl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::InvalidBatch: return "InvalidBatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::NoSharedFeatures: return "NoSharedFeatures";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Checkpoint: return "CheckpointError";
  }
  return "Unknown";
}

}  // namespace sscl
