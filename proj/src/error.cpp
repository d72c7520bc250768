#include "behavior_codec/error.hpp"

namespace behavior_codec {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::OffGrid: return "OffGrid";
    case ErrorKind::MissingContext: return "MissingContext";
    case ErrorKind::InvalidAction: return "InvalidAction";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::BackendRefused: return "BackendRefused";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ParseFailure: return "ParseFailure";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MalformedCode: return "MalformedCode";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::AllSamplesFailed: return "AllSamplesFailed";
    case ErrorKind::EmptySamples: return "EmptySamples";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::MissingCache: return "MissingCache";
    case ErrorKind::EmptyDistribution: return "EmptyDistribution";
    case ErrorKind::NoFeasibleSolution: return "NoFeasibleSolution";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::TooFewDocuments: return "TooFewDocuments";
    case ErrorKind::MixedBackends: return "MixedBackends";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::OffGridValue: return "OffGridValue";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> location)
    : std::runtime_error(message), kind_(kind), location_(location) {}

}  // namespace behavior_codec
