// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vidret {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kZeroVector,
  kNonFinite,
  kEmptyCorpus,
  kDuplicateId,
  kIo,
  kBadMagic,
  kTruncatedFile,
  kProviderUnavailable,
  kMalformedResponse,
  kUnknownPrompt,
  kIndexOutOfRange,
  kNonPositiveTemperature,
  kNoValidNegative,
  kCorpusTooSmall,
  kDivergedLoss,
  kScorerUnavailable,
  kScoreOutOfRange,
  kEmptyInput,
  kInvalidSegment,
  kMissingGroundTruth,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vidret
