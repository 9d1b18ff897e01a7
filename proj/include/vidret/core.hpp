// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file core.hpp
 *  \brief Shared value types of the retrieval engine.
 *
 * Embeddings are held in 64-bit precision in memory; on-disk stores use
 * 32-bit storage (see store.hpp). All types are immutable values after
 * construction and can be shared across threads freely.
 */

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidret/error.hpp"

namespace vidret {

/// Tolerance used to validate the `normalized` flag of an embedding.
inline constexpr double kUnitNormTolerance = 1e-6;

class EmbeddingVector {
 public:
  /// Throws kInvalidArgument on empty input or when `normalized` is claimed
  /// for a vector whose norm is not 1 within kUnitNormTolerance, and
  /// kNonFinite when any component is NaN/Inf.
  explicit EmbeddingVector(std::vector<double> values, bool normalized = false);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  bool normalized() const noexcept { return normalized_; }
  double norm() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
  bool normalized_ = false;
};

enum class ItemKind { kVideo, kText, kFrame };

std::string_view to_string(ItemKind kind);
ItemKind parse_item_kind(std::string_view name);

struct CorpusItem {
  std::string id;
  ItemKind kind = ItemKind::kVideo;
  EmbeddingVector embedding;

  bool operator==(const CorpusItem&) const = default;
};

enum class QueryKind { kText, kVideo, kComposed };

std::string_view to_string(QueryKind kind);
QueryKind parse_query_kind(std::string_view name);

/// A request to embed one entity. Frame references are opaque identifiers
/// (paths, URIs) sampled by the caller; their order is semantic.
struct QuerySpec {
  QueryKind kind = QueryKind::kText;
  std::optional<std::string> text;
  std::optional<std::vector<std::string>> frame_refs;
  std::optional<std::string> modification;

  static QuerySpec from_text(std::string text);
  static QuerySpec from_video(std::vector<std::string> frame_refs);

  /// Throws kInvalidArgument when the fields required by `kind` are absent.
  void validate() const;

  bool operator==(const QuerySpec&) const = default;
};

struct RankedEntry {
  std::string item_id;
  double score = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

/// Strict ordering used by every ranked output: score descending, then
/// ascending item id.
inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item_id < b.item_id;
}

void sort_entries(std::vector<RankedEntry>& entries);

struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;

  bool operator==(const RankedList&) const = default;
};

/// Closed real interval in seconds with an attached confidence.
struct MomentWindow {
  double start_s = 0.0;
  double end_s = 0.0;
  double score = 0.0;

  MomentWindow() = default;
  /// Throws kInvalidArgument unless 0 <= start_s < end_s and score is finite.
  MomentWindow(double start, double end, double score_value = 0.0);

  double length() const noexcept { return end_s - start_s; }
  bool operator==(const MomentWindow&) const = default;
};

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data).subspan(i * cols, cols);
  }

  bool operator==(const Matrix&) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);

/// a.b / (|a||b|); exactly a.b when both vectors carry the normalized flag.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

EmbeddingVector l2_normalize(const EmbeddingVector& a);
std::vector<double> l2_normalize(std::span<const double> values);

/// |intersection| / |union| of two closed intervals; 0 when disjoint.
double interval_iou(const MomentWindow& a, const MomentWindow& b);

}  // namespace vidret
