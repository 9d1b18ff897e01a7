// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "vidret/parallel.hpp"
#include "vidret/prompts.hpp"

namespace vidret {

std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kNone: return "none";
    case ScorerKind::kToy: return "toy";
    case ScorerKind::kRemote: return "remote";
  }
  return "none";
}

ScorerKind parse_scorer_kind(std::string_view name) {
  if (name == "none") return ScorerKind::kNone;
  if (name == "toy") return ScorerKind::kToy;
  if (name == "remote") return ScorerKind::kRemote;
  throw Error(ErrorCode::kInvalidArgument, "unknown scorer '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  if (k_candidates < 1) throw Error(ErrorCode::kInvalidArgument, "k_candidates must be >= 1");
  if (!(ds_temperature > 0.0)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "ds_temperature must be > 0");
  }
}

RemoteScorer::RemoteScorer(RemoteOptions options) : options_(std::move(options)) {}

std::vector<double> RemoteScorer::score(const QuerySpec& query,
                                        const std::vector<std::string>& item_ids) const {
  const std::string query_text = query.text.value_or(item_key(query));
  const std::size_t batch = static_cast<std::size_t>(std::max(1, options_.batch_size));
  const std::size_t batches = (item_ids.size() + batch - 1) / batch;
  std::vector<double> scores(item_ids.size());
  parallel_for(batches, options_.max_in_flight, [&](std::size_t b) {
    const std::size_t begin = b * batch;
    const std::size_t end = std::min(item_ids.size(), begin + batch);
    nlohmann::ordered_json body;
    body["pairs"] = nlohmann::ordered_json::array();
    for (std::size_t i = begin; i < end; ++i) {
      body["pairs"].push_back({{"query_text", query_text}, {"item_id", item_ids[i]}});
    }
    const auto reply = post_json(options_, "/v1/score", body.dump());
    try {
      const auto& arr = reply.at("scores");
      if (!arr.is_array() || arr.size() != end - begin) {
        throw Error(ErrorCode::kMalformedResponse, "score count differs from pair count");
      }
      for (std::size_t i = begin; i < end; ++i) scores[i] = arr[i - begin].get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedResponse, e.what());
    }
  });
  return scores;
}

Matrix dual_softmax(const Matrix& s, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  Matrix row_p(s.rows, s.cols);
  Matrix col_p(s.rows, s.cols);
  for (std::size_t i = 0; i < s.rows; ++i) {
    double m = -INFINITY;
    for (std::size_t j = 0; j < s.cols; ++j) m = std::max(m, temperature * s(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < s.cols; ++j) z += row_p(i, j) = std::exp(temperature * s(i, j) - m);
    for (std::size_t j = 0; j < s.cols; ++j) row_p(i, j) /= z;
  }
  for (std::size_t j = 0; j < s.cols; ++j) {
    double m = -INFINITY;
    for (std::size_t i = 0; i < s.rows; ++i) m = std::max(m, temperature * s(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < s.rows; ++i) z += col_p(i, j) = std::exp(temperature * s(i, j) - m);
    for (std::size_t i = 0; i < s.rows; ++i) col_p(i, j) /= z;
  }
  Matrix out(s.rows, s.cols);
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = row_p.data[k] * col_p.data[k];
  return out;
}

RankedList rerank(const RankedList& candidates, const QuerySpec& query, const Scorer& scorer) {
  if (candidates.entries.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to rerank");
  std::vector<std::string> ids;
  ids.reserve(candidates.entries.size());
  for (const auto& e : candidates.entries) ids.push_back(e.item_id);
  const auto scores = scorer.score(query, ids);
  if (scores.size() != ids.size()) {
    throw Error(ErrorCode::kScorerUnavailable, "scorer returned wrong number of scores");
  }
  RankedList out{candidates.query_id, {}};
  out.entries.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double s = scores[i];
    if (!(s >= -1e-9 && s <= 1.0 + 1e-9)) {
      throw Error(ErrorCode::kScoreOutOfRange, "scorer emitted " + std::to_string(s) + " for '" +
                                                   ids[i] + "'");
    }
    out.entries.push_back({ids[i], s});
  }
  sort_entries(out.entries);
  return out;
}

std::vector<EmbeddingVector> embed_queries(const EmbeddingProvider& provider,
                                           const std::vector<QuerySpec>& specs) {
  std::map<QueryKind, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < specs.size(); ++i) groups[specs[i].kind].push_back(i);
  std::vector<std::optional<EmbeddingVector>> slots(specs.size());
  for (const auto& [kind, positions] : groups) {
    EmbedRequest request{{}, std::string(default_prompt_id(kind))};
    for (auto p : positions) request.items.push_back(specs[p]);
    auto vectors = provider.embed(request);
    if (vectors.size() != positions.size()) {
      throw Error(ErrorCode::kMalformedResponse, "provider returned wrong number of vectors");
    }
    for (std::size_t k = 0; k < positions.size(); ++k) slots[positions[k]] = std::move(vectors[k]);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(specs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

const Scorer& require_scorer(const PipelineConfig& cfg, const Scorer* scorer) {
  if (scorer == nullptr) {
    throw Error(ErrorCode::kScorerUnavailable,
                "config asks for a " + std::string(to_string(cfg.scorer)) + " scorer but none given");
  }
  return *scorer;
}

}  // namespace

RankedList retrieve(const DenseIndex& index, const QuerySpec& query,
                    const EmbeddingProvider& provider, const PipelineConfig& cfg,
                    const Scorer* scorer, std::string query_id) {
  cfg.validate();
  const auto embedding = embed_one(provider, query);
  auto ranked = search(index, embedding, cfg.k_candidates, std::move(query_id));
  if (cfg.scorer == ScorerKind::kNone) return ranked;
  return rerank(ranked, query, require_scorer(cfg, scorer));
}

std::vector<RankedList> retrieve_batch(const DenseIndex& index,
                                       const std::vector<NamedQuery>& queries,
                                       const EmbeddingProvider& provider,
                                       const PipelineConfig& cfg, const Scorer* scorer) {
  std::vector<QuerySpec> specs;
  specs.reserve(queries.size());
  for (const auto& q : queries) specs.push_back(q.spec);
  return retrieve_batch(index, queries, embed_queries(provider, specs), cfg, scorer);
}

std::vector<RankedList> retrieve_batch(const DenseIndex& index,
                                       const std::vector<NamedQuery>& queries,
                                       const std::vector<EmbeddingVector>& query_embeddings,
                                       const PipelineConfig& cfg, const Scorer* scorer) {
  cfg.validate();
  if (query_embeddings.size() != queries.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one embedding per query required");
  }
  std::vector<RankedList> lists;
  lists.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    lists.push_back(search(index, query_embeddings[i], cfg.k_candidates, queries[i].id));
  }

  if (cfg.use_dual_softmax && queries.size() > 1) {
    // Candidate union in index order keeps the matrix layout deterministic.
    std::vector<bool> in_union(index.size(), false);
    for (const auto& list : lists) {
      for (const auto& e : list.entries) in_union[index.find(e.item_id)] = true;
    }
    std::vector<std::size_t> union_rows;
    std::vector<std::size_t> column_of(index.size(), 0);
    for (std::size_t r = 0; r < index.size(); ++r) {
      if (in_union[r]) {
        column_of[r] = union_rows.size();
        union_rows.push_back(r);
      }
    }
    Matrix sim(queries.size(), union_rows.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto unit = l2_normalize(query_embeddings[i].values());
      for (std::size_t c = 0; c < union_rows.size(); ++c) sim(i, c) = index.score_row(unit, union_rows[c]);
    }
    const Matrix prior = dual_softmax(sim, cfg.ds_temperature);
    for (std::size_t i = 0; i < lists.size(); ++i) {
      for (auto& e : lists[i].entries) e.score = prior(i, column_of[index.find(e.item_id)]);
      sort_entries(lists[i].entries);
    }
  }

  if (cfg.scorer != ScorerKind::kNone) {
    const Scorer& s = require_scorer(cfg, scorer);
    for (std::size_t i = 0; i < lists.size(); ++i) lists[i] = rerank(lists[i], queries[i].spec, s);
  }
  return lists;
}

}  // namespace vidret
