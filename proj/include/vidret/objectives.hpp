// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file objectives.hpp
 *  \brief Training losses with analytic gradients, and negative sampling.
 *
 * Contrastive loss over a batch of N (query, candidate) pairs, paired by
 * position, with in-batch negatives:
 *
 *   L = 1/N sum_i -log( exp(s_ii / t) / sum_j exp(s_ij / t) ),  s = cosine
 *
 * Re-ranking losses operate on scorer outputs s in (0, 1):
 *
 *   bce(s, y)          = -[y log s + (1 - y) log(1 - s)]   (s clamped to [eps, 1-eps])
 *   preference(sg, sn) = -log sigmoid(sg - sn)
 *   joint              = w_rand * bce_rand + w_hard * bce_hard + w_pref * preference
 */

#include <cstdint>
#include <string>
#include <vector>

#include "vidret/core.hpp"
#include "vidret/rng.hpp"

namespace vidret {

inline constexpr double kDefaultTemperature = 0.05;
inline constexpr double kBceEpsilon = 1e-7;

struct InfoNceBatch {
  std::vector<EmbeddingVector> queries;
  std::vector<EmbeddingVector> candidates;
  double temperature = kDefaultTemperature;

  /// Throws kInvalidArgument (size), kNonPositiveTemperature, kDimensionMismatch.
  void validate() const;
};

struct InfoNceResult {
  double loss = 0.0;
  /// dL/ds_ij, N x N.
  Matrix d_similarity;
  /// dL/dq_i and dL/dc_j in the raw (unnormalized) vector space.
  std::vector<std::vector<double>> d_queries;
  std::vector<std::vector<double>> d_candidates;
};

double infonce_loss(const InfoNceBatch& batch);

/// Loss plus analytic gradients. Throws as infonce_loss, plus kZeroVector.
InfoNceResult infonce_grad(const InfoNceBatch& batch);

/// Row-wise log-sum-exp with max subtraction.
double log_sum_exp(std::span<const double> logits);

double sigmoid(double x);

double bce_loss(double score, int label);
/// d bce / d score; zero where the clamp is active.
double bce_grad(double score, int label);

double preference_loss(double score_gt, double score_neg);
/// d preference / d score_gt; d/d score_neg is the negation.
double preference_grad(double score_gt, double score_neg);

struct JointLossWeights {
  double bce_rand = 0.5;
  double bce_hard = 0.2;
  double preference = 0.3;

  /// Throws kInvalidArgument unless all >= 0 and at least one > 0.
  void validate() const;
};

double joint_loss(const JointLossWeights& weights, double bce_rand, double bce_hard,
                  double preference);

/// Hard negatives are drawn from 1-based rank positions [low_rank, high_rank]
/// of the retriever's top-k_top list.
struct MinerConfig {
  int k_top = 50;
  int low_rank = 5;
  int high_rank = 50;
  int n_rand = 1;
  int n_hard_bce = 1;
  int n_hard_pb = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Uniform draw over ranks [low_rank, min(high_rank, size)], redrawn while
/// it hits gt_id. When gt sits at rank 1 the lower bound is at least 2.
/// Throws kNoValidNegative when the range holds nothing but gt.
std::string mine_hard_negative(const RankedList& ranked, const std::string& gt_id,
                               const MinerConfig& cfg, Rng& rng);

/// 1-based rank of the id returned by mine_hard_negative for the same draw;
/// exposed for distribution tests.
int mine_hard_negative_rank(const RankedList& ranked, const std::string& gt_id,
                            const MinerConfig& cfg, Rng& rng);

/// Uniform over corpus_ids without gt_id. Throws kCorpusTooSmall.
std::string sample_random_negative(const std::vector<std::string>& corpus_ids,
                                   const std::string& gt_id, Rng& rng);

}  // namespace vidret
