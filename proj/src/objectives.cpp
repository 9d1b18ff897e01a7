// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vidret {

void InfoNceBatch::validate() const {
  if (queries.empty() || queries.size() != candidates.size()) {
    throw Error(ErrorCode::kInvalidArgument, "InfoNCE batch needs N >= 1 aligned pairs");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  }
  const auto dim = queries.front().dim();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (queries[i].dim() != dim || candidates[i].dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "InfoNCE batch has mixed dims");
    }
  }
}

double log_sum_exp(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - m);
  return m + std::log(sum);
}

namespace {

struct UnitBatch {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> c;
  std::vector<double> q_norm;
  std::vector<double> c_norm;
  Matrix sim;
};

UnitBatch unit_batch(const InfoNceBatch& batch) {
  batch.validate();
  const std::size_t n = batch.queries.size();
  UnitBatch u;
  u.sim = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    u.q_norm.push_back(batch.queries[i].norm());
    u.c_norm.push_back(batch.candidates[i].norm());
    u.q.push_back(l2_normalize(batch.queries[i].values()));
    u.c.push_back(l2_normalize(batch.candidates[i].values()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) u.sim(i, j) = dot(u.q[i], u.c[j]);
  }
  return u;
}

// Per-row loss and the softmax probabilities of that row.
double row_loss(const Matrix& sim, std::size_t i, double temperature, std::vector<double>& probs) {
  const std::size_t n = sim.cols;
  probs.resize(n);
  for (std::size_t j = 0; j < n; ++j) probs[j] = sim(i, j) / temperature;
  const double lse = log_sum_exp(probs);
  const double loss = lse - sim(i, i) / temperature;
  for (double& p : probs) p = std::exp(p - lse);
  return loss;
}

}  // namespace

double infonce_loss(const InfoNceBatch& batch) {
  const auto u = unit_batch(batch);
  const std::size_t n = batch.queries.size();
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += row_loss(u.sim, i, batch.temperature, probs);
  return std::max(0.0, total / static_cast<double>(n));
}

InfoNceResult infonce_grad(const InfoNceBatch& batch) {
  const auto u = unit_batch(batch);
  const std::size_t n = batch.queries.size();
  const std::size_t dim = batch.queries.front().dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  InfoNceResult out;
  out.d_similarity = Matrix(n, n);
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += row_loss(u.sim, i, batch.temperature, probs);
    for (std::size_t j = 0; j < n; ++j) {
      out.d_similarity(i, j) = (probs[j] - (i == j ? 1.0 : 0.0)) * inv_n / batch.temperature;
    }
  }
  out.loss = std::max(0.0, total * inv_n);

  // d cos(q, c) / d q = (c_hat - cos * q_hat) / |q|, symmetric for c.
  out.d_queries.assign(n, std::vector<double>(dim, 0.0));
  out.d_candidates.assign(n, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double g = out.d_similarity(i, j);
      if (g == 0.0) continue;
      const double s = u.sim(i, j);
      const double gq = g / u.q_norm[i];
      const double gc = g / u.c_norm[j];
      for (std::size_t d = 0; d < dim; ++d) {
        out.d_queries[i][d] += gq * (u.c[j][d] - s * u.q[i][d]);
        out.d_candidates[j][d] += gc * (u.q[i][d] - s * u.c[j][d]);
      }
    }
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_label(int label) {
  if (label != 0 && label != 1) {
    throw Error(ErrorCode::kInvalidArgument, "label must be 0 or 1, got " + std::to_string(label));
  }
}

}  // namespace

double bce_loss(double score, int label) {
  check_label(label);
  const double s = std::clamp(score, kBceEpsilon, 1.0 - kBceEpsilon);
  return label == 1 ? -std::log(s) : -std::log1p(-s);
}

double bce_grad(double score, int label) {
  check_label(label);
  if (score < kBceEpsilon || score > 1.0 - kBceEpsilon) return 0.0;
  return label == 1 ? -1.0 / score : 1.0 / (1.0 - score);
}

namespace {

// -log sigmoid(x) = softplus(-x), evaluated without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

double preference_loss(double score_gt, double score_neg) {
  return softplus(-(score_gt - score_neg));
}

double preference_grad(double score_gt, double score_neg) {
  return -(1.0 - sigmoid(score_gt - score_neg));
}

void JointLossWeights::validate() const {
  if (!(bce_rand >= 0.0 && bce_hard >= 0.0 && preference >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "loss weights must be >= 0");
  }
  if (bce_rand + bce_hard + preference <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "at least one loss weight must be > 0");
  }
}

double joint_loss(const JointLossWeights& weights, double bce_rand, double bce_hard,
                  double preference) {
  return weights.bce_rand * bce_rand + weights.bce_hard * bce_hard +
         weights.preference * preference;
}

void MinerConfig::validate() const {
  if (!(1 <= low_rank && low_rank <= high_rank && high_rank <= k_top)) {
    throw Error(ErrorCode::kInvalidArgument, "miner needs 1 <= low_rank <= high_rank <= k_top");
  }
  if (n_rand < 0 || n_hard_bce < 0 || n_hard_pb < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative counts must be >= 0");
  }
}

int mine_hard_negative_rank(const RankedList& ranked, const std::string& gt_id,
                            const MinerConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto& entries = ranked.entries;
  int low = cfg.low_rank;
  const int high = std::min<int>(cfg.high_rank, static_cast<int>(entries.size()));
  if (!entries.empty() && entries.front().item_id == gt_id) low = std::max(low, 2);

  int valid = 0;
  for (int r = low; r <= high; ++r) valid += entries[r - 1].item_id != gt_id;
  if (valid == 0) {
    throw Error(ErrorCode::kNoValidNegative, "no candidate other than ground truth in ranks [" +
                                                 std::to_string(low) + ", " +
                                                 std::to_string(high) + "]");
  }
  const auto span = static_cast<std::uint64_t>(high - low + 1);
  while (true) {
    const int r = low + static_cast<int>(rng.uniform_index(span));
    if (entries[r - 1].item_id != gt_id) return r;
  }
}

std::string mine_hard_negative(const RankedList& ranked, const std::string& gt_id,
                               const MinerConfig& cfg, Rng& rng) {
  return ranked.entries[mine_hard_negative_rank(ranked, gt_id, cfg, rng) - 1].item_id;
}

std::string sample_random_negative(const std::vector<std::string>& corpus_ids,
                                   const std::string& gt_id, Rng& rng) {
  const auto gt_pos = std::find(corpus_ids.begin(), corpus_ids.end(), gt_id);
  const std::size_t others = corpus_ids.size() - (gt_pos != corpus_ids.end() ? 1 : 0);
  if (corpus_ids.size() < 2 || others == 0) {
    throw Error(ErrorCode::kCorpusTooSmall, "need at least one non-matching id");
  }
  auto pick = static_cast<std::size_t>(rng.uniform_index(others));
  if (gt_pos != corpus_ids.end() &&
      pick >= static_cast<std::size_t>(gt_pos - corpus_ids.begin())) {
    ++pick;
  }
  return corpus_ids[pick];
}

}  // namespace vidret
