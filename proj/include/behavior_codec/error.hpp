#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace behavior_codec {

enum class ErrorKind {
  // games
  OutOfRange,
  OffGrid,
  MissingContext,
  InvalidAction,
  // model gateway
  TransportError,
  AuthError,
  RateLimited,
  BackendRefused,
  EmptyInput,
  ParseFailure,
  DimensionMismatch,
  // elicitation
  MalformedCode,
  PreconditionViolation,
  AllSamplesFailed,
  EmptySamples,
  InsufficientSamples,
  // alignment
  MissingCache,
  EmptyDistribution,
  NoFeasibleSolution,
  EmptySample,
  // numerics / analysis
  ZeroVector,
  ConstantInput,
  DimensionError,
  TooFewDocuments,
  MixedBackends,
  // workbench
  IoError,
  SchemaViolation,
  ParseError,
  OffGridValue,
  EmptyData,
  UsageError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind. `location` is a 1-based line or
/// row number for file-format errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> location = std::nullopt);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::optional<std::size_t> location() const noexcept { return location_; }
  [[nodiscard]] bool retryable() const noexcept {
    return kind_ == ErrorKind::TransportError || kind_ == ErrorKind::RateLimited;
  }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> location_;
};

}  // namespace behavior_codec
