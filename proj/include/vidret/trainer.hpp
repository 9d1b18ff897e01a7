// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file trainer.hpp
 *  \brief Desk-scale training loops over a synthetic world.
 *
 * A shared linear adapter e = W^T x + b is trained with the contrastive loss
 * on (query, candidate) views; a logistic scorer over
 * phi(q, c) = [q * c ; |q - c|] (unit q, c) is then trained with the joint
 * re-ranking objective on mined negatives. Both loops are plain mini-batch
 * gradient descent with a fixed step and are bitwise deterministic.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vidret/core.hpp"
#include "vidret/index.hpp"
#include "vidret/objectives.hpp"
#include "vidret/pipeline.hpp"
#include "vidret/provider.hpp"

namespace vidret {

struct LinearAdapter {
  Matrix weight;  // raw_dim x emb_dim
  std::vector<double> bias;

  std::size_t raw_dim() const noexcept { return weight.rows; }
  std::size_t emb_dim() const noexcept { return weight.cols; }

  EmbeddingVector apply(const EmbeddingVector& raw) const;
  void validate() const;
  bool operator==(const LinearAdapter&) const = default;
};

/// Seeded uniform(-0.05, 0.05) weights, zero bias.
LinearAdapter init_adapter(int raw_dim, int emb_dim, std::uint64_t seed);

struct ToyScorer {
  std::vector<double> w;  // 2 * emb_dim
  double b = 0.0;

  /// Zero weights: every score is exactly 0.5.
  static ToyScorer zeros(std::size_t emb_dim);

  static std::vector<double> features(std::span<const double> unit_q, std::span<const double> unit_c);
  double logit(std::span<const double> unit_q, std::span<const double> unit_c) const;
  double score(std::span<const double> unit_q, std::span<const double> unit_c) const;
  bool operator==(const ToyScorer&) const = default;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double step_size = 0.01;
  std::uint64_t seed = 0;
  std::optional<SyntheticWorld> stage2_world;
  int emb_dim = 16;
  double temperature = kDefaultTemperature;
  /// Concepts [0, round(train_fraction * n)) train; the rest are held out.
  double train_fraction = 0.75;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  std::optional<double> r_at_1;
};

/// Concept split of a world under a config.
struct ConceptSplit {
  int train_begin = 0;
  int train_end = 0;
  int held_begin = 0;
  int held_end = 0;
};

ConceptSplit split_concepts(const SyntheticWorld& world, const TrainConfig& cfg);

/// Mean contrastive loss of `adapter` over the training split, batched in
/// index order (the evaluation used for history and stage comparisons).
double evaluate_contrastive_loss(const LinearAdapter& adapter, const SyntheticWorld& world,
                                 const TrainConfig& cfg);

/// Held-out text-to-candidate R@1: each held-out query searched against the
/// candidates of every concept in the world.
double evaluate_heldout_recall(const LinearAdapter& adapter, const SyntheticWorld& world,
                               const TrainConfig& cfg, int k = 1);

struct EmbedderTraining {
  LinearAdapter adapter;
  /// Epoch 0 is the evaluation before any step; stage-2 epochs continue
  /// the numbering.
  std::vector<EpochRecord> history;
};

/// Contrastive loss of one batch of raw pairs under `adapter`, with the
/// gradient w.r.t. weight and bias written to `gradient_out` when given.
double embedder_batch_loss(const LinearAdapter& adapter, std::span<const SyntheticPair> batch,
                           double temperature, LinearAdapter* gradient_out = nullptr);

/// One gradient step on a single batch; returns the loss before the step.
double embedder_step(LinearAdapter& adapter, std::span<const SyntheticPair> batch,
                     double temperature, double step_size);

/// Throws kDivergedLoss on a non-finite loss.
EmbedderTraining train_embedder(const SyntheticWorld& world, const TrainConfig& cfg);
EmbedderTraining train_embedder(const SyntheticWorld& world, const TrainConfig& cfg,
                                LinearAdapter start);

/// Adapter embeddings of the training queries and their ground-truth ids.
struct RerankExamples {
  std::vector<EmbeddingVector> queries;
  std::vector<std::string> gt_ids;
};

struct RerankerTraining {
  ToyScorer scorer;
  std::vector<EpochRecord> history;
};

/// Negatives per example follow `miner`: n_rand random ids, n_hard_bce and
/// n_hard_pb ids mined from the query's top-k_top list. Each BCE term is the
/// mean over the positive and its negatives.
RerankerTraining train_reranker(const RerankExamples& examples, const DenseIndex& index,
                                const MinerConfig& miner, const JointLossWeights& weights,
                                const TrainConfig& cfg);

/// Joint loss and its gradient w.r.t. (w, b) for one example.
struct RerankLoss {
  double total = 0.0;
  double bce_rand = 0.0;
  double bce_hard = 0.0;
  double preference = 0.0;
};
RerankLoss rerank_example_loss(const ToyScorer& scorer, const JointLossWeights& weights,
                               std::span<const double> unit_q, std::span<const double> unit_gt,
                               const std::vector<std::vector<double>>& rand_negs,
                               const std::vector<std::vector<double>>& hard_bce_negs,
                               const std::vector<std::vector<double>>& hard_pb_negs,
                               ToyScorer* gradient_out = nullptr);

/// Applies an adapter on top of another provider's raw vectors.
class AdaptedProvider : public EmbeddingProvider {
 public:
  AdaptedProvider(const EmbeddingProvider& base, LinearAdapter adapter)
      : base_(base), adapter_(std::move(adapter)) {}
  std::vector<EmbeddingVector> embed(const EmbedRequest& request) const override;

 private:
  const EmbeddingProvider& base_;
  LinearAdapter adapter_;
};

/// Scorer backed by a ToyScorer: queries embedded by `provider`, items read
/// from `items`.
class ToyScorerAdapter : public Scorer {
 public:
  ToyScorerAdapter(ToyScorer scorer, const DenseIndex& items, const EmbeddingProvider& provider)
      : scorer_(std::move(scorer)), items_(items), provider_(provider) {}
  std::vector<double> score(const QuerySpec& query,
                            const std::vector<std::string>& item_ids) const override;

 private:
  ToyScorer scorer_;
  const DenseIndex& items_;
  const EmbeddingProvider& provider_;
};

nlohmann::json to_json(const LinearAdapter& adapter);
LinearAdapter adapter_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ToyScorer& scorer);
ToyScorer scorer_from_json(const nlohmann::json& j);

}  // namespace vidret
