// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/index.hpp"

#include <algorithm>
#include <cmath>

#include "vidret/parallel.hpp"

namespace vidret {

EmbeddingVector DenseIndex::embedding(std::size_t i) const {
  const auto r = row(i);
  std::vector<double> values(r.begin(), r.end());
  // Re-normalize in 64-bit: the float row is unit only to ~1e-7.
  return EmbeddingVector(l2_normalize(values), true);
}

std::size_t DenseIndex::find(const std::string& id) const {
  const auto it = positions_.find(id);
  return it == positions_.end() ? size() : it->second;
}

double DenseIndex::score_row(std::span<const double> unit_query, std::size_t i) const {
  const auto r = row(i);
  double sum = 0.0;
  for (std::size_t d = 0; d < dim_; ++d) sum += unit_query[d] * static_cast<double>(r[d]);
  return sum;
}

DenseIndex build_index(const std::vector<CorpusItem>& items) {
  if (items.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot index an empty corpus");
  DenseIndex index;
  index.dim_ = items.front().embedding.dim();
  index.ids_.reserve(items.size());
  index.matrix_.reserve(items.size() * index.dim_);
  for (const auto& item : items) {
    if (item.embedding.dim() != index.dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "item '" + item.id + "' has dim " +
                                                     std::to_string(item.embedding.dim()));
    }
    if (!index.positions_.emplace(item.id, index.ids_.size()).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id '" + item.id + "'");
    }
    const auto unit = l2_normalize(item.embedding.values());
    for (double v : unit) index.matrix_.push_back(static_cast<float>(v));
    index.ids_.push_back(item.id);
  }
  return index;
}

namespace {

std::vector<double> unit_query(const DenseIndex& index, const EmbeddingVector& query) {
  if (query.dim() != index.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                                   " vs index dim " + std::to_string(index.dim()));
  }
  return l2_normalize(query.values());
}

}  // namespace

RankedList search(const DenseIndex& index, const EmbeddingVector& query, int k,
                  std::string query_id) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto q = unit_query(index, query);
  std::vector<RankedEntry> all;
  all.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    all.push_back({index.ids()[i], index.score_row(q, i)});
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep - 1), all.end(),
                   ranks_before);
  all.resize(keep);
  sort_entries(all);
  return RankedList{std::move(query_id), std::move(all)};
}

Matrix similarity_matrix(std::span<const EmbeddingVector> queries, const DenseIndex& index,
                         int workers) {
  std::vector<std::vector<double>> units;
  units.reserve(queries.size());
  for (const auto& q : queries) units.push_back(unit_query(index, q));
  Matrix out(queries.size(), index.size());
  parallel_for(queries.size(), workers, [&](std::size_t i) {
    for (std::size_t j = 0; j < index.size(); ++j) out(i, j) = index.score_row(units[i], j);
  });
  return out;
}

}  // namespace vidret
