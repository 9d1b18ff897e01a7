// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vidret/core.hpp"

namespace vidret {

/// Exact cosine index. Rows are unit-normalized at build time and stored as
/// 32-bit floats; scoring widens to 64-bit and sums in a fixed order.
class DenseIndex {
 public:
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(matrix_).subspan(i * dim_, dim_);
  }
  /// Row as a unit-norm embedding (widened to 64-bit).
  EmbeddingVector embedding(std::size_t i) const;
  /// Position of `id`, or size() when absent.
  std::size_t find(const std::string& id) const;

  /// Cosine of a unit-norm 64-bit query against row i.
  double score_row(std::span<const double> unit_query, std::size_t i) const;

 private:
  friend DenseIndex build_index(const std::vector<CorpusItem>& items);

  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> matrix_;
  std::unordered_map<std::string, std::size_t> positions_;
};

/// Throws kEmptyCorpus, kDimensionMismatch, kZeroVector, kDuplicateId.
DenseIndex build_index(const std::vector<CorpusItem>& items);

/// Top-k by cosine, min(k, size) entries, ties by ascending id.
/// Throws kInvalidArgument (k < 1), kDimensionMismatch, kZeroVector.
RankedList search(const DenseIndex& index, const EmbeddingVector& query, int k,
                  std::string query_id = {});

/// Entry (i, j) is the cosine of queries[i] and row j. Rows may be computed
/// on up to `workers` threads; output is bitwise independent of `workers`.
Matrix similarity_matrix(std::span<const EmbeddingVector> queries, const DenseIndex& index,
                         int workers = 1);

}  // namespace vidret
