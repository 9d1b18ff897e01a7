// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file pipeline.hpp
 *  \brief Retrieve-then-rerank over a dense index.
 *
 * Stage one is exact top-K cosine search. For a batch of queries the top-K
 * candidates may be re-ordered by a dual-softmax prior: with logits
 * Z = ds_temperature * S over the (queries x candidate union) similarity
 * matrix S,
 *
 *   D_ij = softmax_j(Z_i,:) * softmax_i(Z_:,j)
 *
 * Stage two replaces each candidate's score by a pointwise scorer in [0, 1].
 */

#include <string>
#include <utility>
#include <vector>

#include "vidret/core.hpp"
#include "vidret/http.hpp"
#include "vidret/index.hpp"
#include "vidret/provider.hpp"

namespace vidret {

enum class ScorerKind { kNone, kToy, kRemote };

std::string_view to_string(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view name);

struct PipelineConfig {
  int k_candidates = 50;
  bool use_dual_softmax = true;
  double ds_temperature = 100.0;
  ScorerKind scorer = ScorerKind::kNone;

  void validate() const;
};

/// Pointwise (query, item) matcher emitting confidences in [0, 1].
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<double> score(const QuerySpec& query,
                                    const std::vector<std::string>& item_ids) const = 0;
};

/// Client for POST /v1/score {"pairs":[{"query_text","item_id"}]} -> {"scores":[...]}.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(RemoteOptions options);
  std::vector<double> score(const QuerySpec& query,
                            const std::vector<std::string>& item_ids) const override;

 private:
  RemoteOptions options_;
};

Matrix dual_softmax(const Matrix& similarities, double temperature);

/// Reorders `candidates` by scorer confidence; input scores are discarded.
/// Throws kEmptyInput, kScoreOutOfRange.
RankedList rerank(const RankedList& candidates, const QuerySpec& query, const Scorer& scorer);

/// Embeds queries, grouping by kind so each provider call uses one prompt.
std::vector<EmbeddingVector> embed_queries(const EmbeddingProvider& provider,
                                           const std::vector<QuerySpec>& specs);

/// Single ad-hoc query: search, then optional rerank. Dual-softmax needs a
/// batch and is not applied here.
RankedList retrieve(const DenseIndex& index, const QuerySpec& query,
                    const EmbeddingProvider& provider, const PipelineConfig& cfg,
                    const Scorer* scorer = nullptr, std::string query_id = {});

struct NamedQuery {
  std::string id;
  QuerySpec spec;
};

/// Batch flow. With use_dual_softmax and more than one query, each query's
/// top-K list is re-scored by its row of D before optional reranking.
std::vector<RankedList> retrieve_batch(const DenseIndex& index,
                                       const std::vector<NamedQuery>& queries,
                                       const EmbeddingProvider& provider,
                                       const PipelineConfig& cfg, const Scorer* scorer = nullptr);

/// Same, from precomputed query embeddings.
std::vector<RankedList> retrieve_batch(const DenseIndex& index,
                                       const std::vector<NamedQuery>& queries,
                                       const std::vector<EmbeddingVector>& query_embeddings,
                                       const PipelineConfig& cfg, const Scorer* scorer = nullptr);

}  // namespace vidret
