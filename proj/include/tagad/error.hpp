#ifndef TAGAD_ERROR_HPP
#define TAGAD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace tagad {

enum class ErrorCode {
  kInvalidArgument,
  kDuplicateNodeId,
  kUnknownEndpoint,
  kUnknownNode,
  kParseError,
  kMissingLabelName,
  kIoError,
  kEmptyPool,
  kMissingEmbedding,
  kProviderUnavailable,
  kDimensionMismatch,
  kZeroVector,
  kLengthMismatch,
  kBudgetTooSmall,
  kGraphTooSmall,
  kSingleLabelGraph,
  kLlmFailure,
  kEmptyCompletion,
  kPoolExhausted,
  kTooFewCandidates,
  kEmptySource,
  kWrongCount,
  kAuthMissing,
  kPlaceholderUnresolved,
  kModeMismatch,
  kUnknownDatasetKind,
  kFrameworkMissing,
  kEmptyCorpus,
  kDetectionAborted,
  kSingleClass,
  kNoPositives,
  kMissingGroundTruth,
  kUnknownKey,
  kMissingRequired,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::kUnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingLabelName: return "MissingLabelName";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kBudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::kGraphTooSmall: return "GraphTooSmall";
    case ErrorCode::kSingleLabelGraph: return "SingleLabelGraph";
    case ErrorCode::kLlmFailure: return "LlmFailure";
    case ErrorCode::kEmptyCompletion: return "EmptyCompletion";
    case ErrorCode::kPoolExhausted: return "PoolExhausted";
    case ErrorCode::kTooFewCandidates: return "TooFewCandidates";
    case ErrorCode::kEmptySource: return "EmptySource";
    case ErrorCode::kWrongCount: return "WrongCount";
    case ErrorCode::kAuthMissing: return "AuthMissing";
    case ErrorCode::kPlaceholderUnresolved: return "PlaceholderUnresolved";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kUnknownDatasetKind: return "UnknownDatasetKind";
    case ErrorCode::kFrameworkMissing: return "FrameworkMissing";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDetectionAborted: return "DetectionAborted";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kMissingRequired: return "MissingRequired";
  }
  return "Unknown";
}

// Process exit status for an error surfaced by the command-line tool. Each
// code maps to its own status so scripts can tell failures apart.
inline int exit_status(ErrorCode code) {
  return 10 + static_cast<int>(code);
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tagad

#endif  // TAGAD_ERROR_HPP
