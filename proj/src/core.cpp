// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/core.hpp"

#include <algorithm>
#include <cmath>

namespace vidret {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kUnknownPrompt: return "UnknownPrompt";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::kNoValidNegative: return "NoValidNegative";
    case ErrorCode::kCorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::kDivergedLoss: return "DivergedLoss";
    case ErrorCode::kScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidSegment: return "InvalidSegment";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
  }
  return "Unknown";
}

EmbeddingVector::EmbeddingVector(std::vector<double> values, bool normalized)
    : values_(std::move(values)), normalized_(normalized) {
  if (values_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding must have dim > 0");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "embedding contains NaN or Inf");
    }
  }
  if (normalized_ && std::abs(norm() - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding flagged normalized but has norm " + std::to_string(norm()));
  }
}

double EmbeddingVector::norm() const noexcept {
  return std::sqrt(dot(values_, values_));
}

std::string_view to_string(ItemKind kind) {
  switch (kind) {
    case ItemKind::kVideo: return "video";
    case ItemKind::kText: return "text";
    case ItemKind::kFrame: return "frame";
  }
  return "video";
}

ItemKind parse_item_kind(std::string_view name) {
  if (name == "video") return ItemKind::kVideo;
  if (name == "text") return ItemKind::kText;
  if (name == "frame") return ItemKind::kFrame;
  throw Error(ErrorCode::kInvalidArgument, "unknown item kind '" + std::string(name) + "'");
}

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::kText: return "text";
    case QueryKind::kVideo: return "video";
    case QueryKind::kComposed: return "composed";
  }
  return "text";
}

QueryKind parse_query_kind(std::string_view name) {
  if (name == "text") return QueryKind::kText;
  if (name == "video") return QueryKind::kVideo;
  if (name == "composed") return QueryKind::kComposed;
  throw Error(ErrorCode::kInvalidArgument, "unknown query kind '" + std::string(name) + "'");
}

QuerySpec QuerySpec::from_text(std::string text) {
  QuerySpec spec;
  spec.kind = QueryKind::kText;
  spec.text = std::move(text);
  return spec;
}

QuerySpec QuerySpec::from_video(std::vector<std::string> frame_refs) {
  QuerySpec spec;
  spec.kind = QueryKind::kVideo;
  spec.frame_refs = std::move(frame_refs);
  return spec;
}

void QuerySpec::validate() const {
  switch (kind) {
    case QueryKind::kText:
      if (!text) throw Error(ErrorCode::kInvalidArgument, "text query without text");
      break;
    case QueryKind::kVideo:
      if (!frame_refs || frame_refs->empty()) {
        throw Error(ErrorCode::kInvalidArgument, "video query without frame refs");
      }
      break;
    case QueryKind::kComposed:
      if (!frame_refs || frame_refs->empty() || !modification) {
        throw Error(ErrorCode::kInvalidArgument,
                    "composed query needs frame refs and a modification");
      }
      break;
  }
}

void sort_entries(std::vector<RankedEntry>& entries) {
  std::sort(entries.begin(), entries.end(), ranks_before);
}

MomentWindow::MomentWindow(double start, double end, double score_value)
    : start_s(start), end_s(end), score(score_value) {
  if (!(std::isfinite(start) && std::isfinite(end)) || start < 0.0 || !(end > start)) {
    throw Error(ErrorCode::kInvalidArgument, "moment window needs 0 <= start < end");
  }
  if (!std::isfinite(score)) {
    throw Error(ErrorCode::kNonFinite, "moment window score is not finite");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  const double ab = dot(a.values(), b.values());
  if (a.normalized() && b.normalized()) return ab;
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  return std::clamp(ab / (na * nb), -1.0, 1.0);
}

std::vector<double> l2_normalize(std::span<const double> values) {
  const double n = std::sqrt(dot(values, values));
  if (n == 0.0) throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v /= n;
  return out;
}

EmbeddingVector l2_normalize(const EmbeddingVector& a) {
  return EmbeddingVector(l2_normalize(a.values()), true);
}

double interval_iou(const MomentWindow& a, const MomentWindow& b) {
  const double inter = std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s);
  if (inter <= 0.0) return 0.0;
  const double uni = std::max(a.end_s, b.end_s) - std::min(a.start_s, b.start_s);
  return inter / uni;
}

}  // namespace vidret
