// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vidret/rng.hpp"

namespace vidret {

EmbeddingVector LinearAdapter::apply(const EmbeddingVector& raw) const {
  if (raw.dim() != raw_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "adapter expects dim " + std::to_string(raw_dim()) +
                                                   ", got " + std::to_string(raw.dim()));
  }
  std::vector<double> out(bias);
  for (std::size_t r = 0; r < raw_dim(); ++r) {
    const double x = raw[r];
    const auto row = weight.row(r);
    for (std::size_t e = 0; e < emb_dim(); ++e) out[e] += x * row[e];
  }
  return EmbeddingVector(std::move(out));
}

void LinearAdapter::validate() const {
  if (emb_dim() < 2 || raw_dim() < 1 || bias.size() != emb_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "adapter needs emb_dim >= 2 and matching bias");
  }
  for (double v : weight.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "adapter weight not finite");
  }
  for (double v : bias) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "adapter bias not finite");
  }
}

LinearAdapter init_adapter(int raw_dim, int emb_dim, std::uint64_t seed) {
  LinearAdapter a{Matrix(raw_dim, emb_dim), std::vector<double>(emb_dim, 0.0)};
  Rng rng(derive_seed(seed, "adapter-init"));
  for (double& v : a.weight.data) v = rng.uniform(-0.05, 0.05);
  a.validate();
  return a;
}

ToyScorer ToyScorer::zeros(std::size_t emb_dim) { return ToyScorer{std::vector<double>(2 * emb_dim, 0.0), 0.0}; }

std::vector<double> ToyScorer::features(std::span<const double> unit_q, std::span<const double> unit_c) {
  const std::size_t d = unit_q.size();
  std::vector<double> phi(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    phi[i] = unit_q[i] * unit_c[i];
    phi[d + i] = std::abs(unit_q[i] - unit_c[i]);
  }
  return phi;
}

double ToyScorer::logit(std::span<const double> unit_q, std::span<const double> unit_c) const {
  if (unit_q.size() != unit_c.size() || 2 * unit_q.size() != w.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "scorer feature size mismatch");
  }
  return dot(w, features(unit_q, unit_c)) + b;
}

double ToyScorer::score(std::span<const double> unit_q, std::span<const double> unit_c) const {
  return sigmoid(logit(unit_q, unit_c));
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 2) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 2");
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
    throw Error(ErrorCode::kInvalidArgument, "step_size must be finite and >= 0");
  }
  if (emb_dim < 2) throw Error(ErrorCode::kInvalidArgument, "emb_dim must be >= 2");
  if (!(temperature > 0.0)) throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must be in (0, 1]");
  }
}

ConceptSplit split_concepts(const SyntheticWorld& world, const TrainConfig& cfg) {
  const int n = world.num_concepts;
  const int train = std::clamp(static_cast<int>(std::lround(cfg.train_fraction * n)), 2, n);
  return {0, train, train, n};
}

namespace {

std::vector<SyntheticPair> make_pairs(const SyntheticGenerator& gen, int begin, int end) {
  std::vector<SyntheticPair> pairs;
  pairs.reserve(static_cast<std::size_t>(end - begin));
  for (int i = begin; i < end; ++i) pairs.push_back(gen.pair(i));
  return pairs;
}

// Batches of `batch` consecutive elements; a trailing remainder of one is
// folded into the previous batch so every batch has N >= 2.
std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t batch) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch) out.emplace_back(b, std::min(n, b + batch));
  if (out.size() > 1 && out.back().second - out.back().first < 2) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

double mean_loss(const LinearAdapter& adapter, const std::vector<SyntheticPair>& pairs,
                 const TrainConfig& cfg) {
  double total = 0.0;
  const auto bounds = batch_bounds(pairs.size(), static_cast<std::size_t>(cfg.batch_size));
  for (const auto& [b, e] : bounds) {
    total += embedder_batch_loss(adapter, std::span(pairs).subspan(b, e - b), cfg.temperature);
  }
  return total / static_cast<double>(bounds.size());
}

void check_finite(double loss, int epoch) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kDivergedLoss, "non-finite loss at epoch " + std::to_string(epoch));
  }
}

void check_finite(const LinearAdapter& adapter, int epoch) {
  const auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(adapter.weight.data.begin(), adapter.weight.data.end(), finite) ||
      !std::all_of(adapter.bias.begin(), adapter.bias.end(), finite)) {
    throw Error(ErrorCode::kDivergedLoss, "adapter left the finite range at epoch " + std::to_string(epoch));
  }
}

}  // namespace

double embedder_batch_loss(const LinearAdapter& adapter, std::span<const SyntheticPair> batch,
                           double temperature, LinearAdapter* gradient_out) {
  InfoNceBatch nce;
  nce.temperature = temperature;
  for (const auto& p : batch) {
    nce.queries.push_back(adapter.apply(p.query));
    nce.candidates.push_back(adapter.apply(p.candidate));
  }
  if (gradient_out == nullptr) return infonce_loss(nce);

  const auto g = infonce_grad(nce);
  LinearAdapter grad{Matrix(adapter.raw_dim(), adapter.emb_dim()),
                     std::vector<double>(adapter.emb_dim(), 0.0)};
  // e = W^T x + b  =>  dL/dW[r][k] = sum x[r] * dL/de[k], dL/db = sum dL/de.
  auto accumulate = [&](const EmbeddingVector& x, const std::vector<double>& de) {
    for (std::size_t r = 0; r < adapter.raw_dim(); ++r) {
      const double xr = x[r];
      for (std::size_t k = 0; k < adapter.emb_dim(); ++k) grad.weight(r, k) += xr * de[k];
    }
    for (std::size_t k = 0; k < adapter.emb_dim(); ++k) grad.bias[k] += de[k];
  };
  for (std::size_t i = 0; i < batch.size(); ++i) {
    accumulate(batch[i].query, g.d_queries[i]);
    accumulate(batch[i].candidate, g.d_candidates[i]);
  }
  *gradient_out = std::move(grad);
  return g.loss;
}

double embedder_step(LinearAdapter& adapter, std::span<const SyntheticPair> batch,
                     double temperature, double step_size) {
  LinearAdapter grad;
  const double loss = embedder_batch_loss(adapter, batch, temperature, &grad);
  if (step_size != 0.0) {
    for (std::size_t k = 0; k < adapter.weight.data.size(); ++k) {
      adapter.weight.data[k] -= step_size * grad.weight.data[k];
    }
    for (std::size_t k = 0; k < adapter.bias.size(); ++k) adapter.bias[k] -= step_size * grad.bias[k];
  }
  return loss;
}

double evaluate_contrastive_loss(const LinearAdapter& adapter, const SyntheticWorld& world,
                                 const TrainConfig& cfg) {
  const SyntheticGenerator gen(world);
  const auto split = split_concepts(world, cfg);
  return mean_loss(adapter, make_pairs(gen, split.train_begin, split.train_end), cfg);
}

namespace {

double heldout_recall(const LinearAdapter& adapter, const SyntheticGenerator& gen,
                      const ConceptSplit& split, int k) {
  if (split.held_end <= split.held_begin) return 0.0;
  std::vector<CorpusItem> corpus;
  for (int i = 0; i < gen.world().num_concepts; ++i) {
    corpus.push_back({"c" + std::to_string(i), ItemKind::kVideo,
                      adapter.apply(gen.view(i, View::kCandidate))});
  }
  const auto index = build_index(corpus);
  int hits = 0;
  for (int i = split.held_begin; i < split.held_end; ++i) {
    const auto ranked = search(index, adapter.apply(gen.view(i, View::kQuery)), k);
    const auto gt = "c" + std::to_string(i);
    hits += std::any_of(ranked.entries.begin(), ranked.entries.end(),
                        [&](const RankedEntry& e) { return e.item_id == gt; });
  }
  return static_cast<double>(hits) / (split.held_end - split.held_begin);
}

void run_stage(LinearAdapter& adapter, const SyntheticWorld& world, const TrainConfig& cfg,
               std::uint64_t stage_tag, std::vector<EpochRecord>& history) {
  const SyntheticGenerator gen(world);
  const auto split = split_concepts(world, cfg);
  const auto pairs = make_pairs(gen, split.train_begin, split.train_end);
  const auto bounds = batch_bounds(pairs.size(), static_cast<std::size_t>(cfg.batch_size));
  const int first_epoch = history.empty() ? 1 : history.back().epoch + 1;

  if (history.empty()) {
    const double loss = mean_loss(adapter, pairs, cfg);
    check_finite(loss, 0);
    history.push_back({0, loss, heldout_recall(adapter, gen, split, 1)});
  }

  std::vector<std::size_t> order(pairs.size());
  std::vector<SyntheticPair> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, "shuffle", (stage_tag << 32) | static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    for (const auto& [b, e] : bounds) {
      batch.clear();
      for (std::size_t i = b; i < e; ++i) batch.push_back(pairs[order[i]]);
      check_finite(embedder_step(adapter, batch, cfg.temperature, cfg.step_size), first_epoch + epoch);
      check_finite(adapter, first_epoch + epoch);
    }
    const double loss = mean_loss(adapter, pairs, cfg);
    check_finite(loss, first_epoch + epoch);
    history.push_back({first_epoch + epoch, loss, heldout_recall(adapter, gen, split, 1)});
  }
}

}  // namespace

double evaluate_heldout_recall(const LinearAdapter& adapter, const SyntheticWorld& world,
                               const TrainConfig& cfg, int k) {
  return heldout_recall(adapter, SyntheticGenerator(world), split_concepts(world, cfg), k);
}

EmbedderTraining train_embedder(const SyntheticWorld& world, const TrainConfig& cfg) {
  cfg.validate();
  return train_embedder(world, cfg, init_adapter(world.raw_dim, cfg.emb_dim, cfg.seed));
}

EmbedderTraining train_embedder(const SyntheticWorld& world, const TrainConfig& cfg,
                                LinearAdapter start) {
  cfg.validate();
  start.validate();
  if (start.raw_dim() != static_cast<std::size_t>(world.raw_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "adapter raw_dim differs from world raw_dim");
  }
  EmbedderTraining out{std::move(start), {}};
  run_stage(out.adapter, world, cfg, 1, out.history);
  if (cfg.stage2_world) {
    if (cfg.stage2_world->raw_dim != world.raw_dim) {
      throw Error(ErrorCode::kDimensionMismatch, "stage-2 world must share raw_dim");
    }
    run_stage(out.adapter, *cfg.stage2_world, cfg, 2, out.history);
  }
  return out;
}

// ---------------------------------------------------------------------------

RerankLoss rerank_example_loss(const ToyScorer& scorer, const JointLossWeights& weights,
                               std::span<const double> unit_q, std::span<const double> unit_gt,
                               const std::vector<std::vector<double>>& rand_negs,
                               const std::vector<std::vector<double>>& hard_bce_negs,
                               const std::vector<std::vector<double>>& hard_pb_negs,
                               ToyScorer* gradient_out) {
  if (gradient_out) *gradient_out = ToyScorer::zeros(unit_q.size());
  // Adds d(term)/d(score) of one pair, pushed through the logistic.
  auto backprop = [&](std::span<const double> unit_c, double score, double d_score) {
    if (!gradient_out || d_score == 0.0) return;
    const double d_logit = d_score * score * (1.0 - score);
    const auto phi = ToyScorer::features(unit_q, unit_c);
    for (std::size_t i = 0; i < phi.size(); ++i) gradient_out->w[i] += d_logit * phi[i];
    gradient_out->b += d_logit;
  };

  const double s_gt = scorer.score(unit_q, unit_gt);
  RerankLoss out;
  auto bce_term = [&](const std::vector<std::vector<double>>& negs, double weight) {
    const double n = 1.0 + static_cast<double>(negs.size());
    double loss = bce_loss(s_gt, 1);
    backprop(unit_gt, s_gt, weight * bce_grad(s_gt, 1) / n);
    for (const auto& c : negs) {
      const double s = scorer.score(unit_q, c);
      loss += bce_loss(s, 0);
      backprop(c, s, weight * bce_grad(s, 0) / n);
    }
    return loss / n;
  };
  out.bce_rand = bce_term(rand_negs, weights.bce_rand);
  out.bce_hard = bce_term(hard_bce_negs, weights.bce_hard);
  if (!hard_pb_negs.empty()) {
    const double n = static_cast<double>(hard_pb_negs.size());
    for (const auto& c : hard_pb_negs) {
      const double s = scorer.score(unit_q, c);
      out.preference += preference_loss(s_gt, s) / n;
      const double g = weights.preference * preference_grad(s_gt, s) / n;
      backprop(unit_gt, s_gt, g);
      backprop(c, s, -g);
    }
  }
  out.total = joint_loss(weights, out.bce_rand, out.bce_hard, out.preference);
  return out;
}

RerankerTraining train_reranker(const RerankExamples& examples, const DenseIndex& index,
                                const MinerConfig& miner, const JointLossWeights& weights,
                                const TrainConfig& cfg) {
  cfg.validate();
  miner.validate();
  weights.validate();
  if (examples.queries.empty() || examples.queries.size() != examples.gt_ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "reranker needs aligned queries and ground truth");
  }
  const std::size_t n = examples.queries.size();
  const std::size_t dim = index.dim();

  std::vector<std::vector<double>> unit_q;
  std::vector<RankedList> ranked;
  std::vector<std::size_t> gt_rows;
  for (std::size_t i = 0; i < n; ++i) {
    unit_q.push_back(l2_normalize(examples.queries[i].values()));
    ranked.push_back(search(index, examples.queries[i], miner.k_top));
    gt_rows.push_back(index.find(examples.gt_ids[i]));
    if (gt_rows.back() == index.size()) {
      throw Error(ErrorCode::kInvalidArgument, "ground truth '" + examples.gt_ids[i] + "' not indexed");
    }
  }
  auto unit_row = [&](std::size_t row) {
    auto e = index.embedding(row);
    return std::vector<double>(e.values().begin(), e.values().end());
  };

  RerankerTraining out{ToyScorer::zeros(dim), {}};
  Rng neg_rng(derive_seed(miner.seed, "reranker-negatives"));
  std::vector<std::size_t> order(n);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle(derive_seed(cfg.seed, "reranker-shuffle", static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < n; b += batch) {
      const std::size_t e = std::min(n, b + batch);
      ToyScorer grad_sum = ToyScorer::zeros(dim);
      for (std::size_t k = b; k < e; ++k) {
        const std::size_t i = order[k];
        const auto& gt = examples.gt_ids[i];
        std::vector<std::vector<double>> rand_negs, hard_bce, hard_pb;
        for (int r = 0; r < miner.n_rand; ++r) {
          rand_negs.push_back(unit_row(index.find(sample_random_negative(index.ids(), gt, neg_rng))));
        }
        for (int r = 0; r < miner.n_hard_bce; ++r) {
          hard_bce.push_back(unit_row(index.find(mine_hard_negative(ranked[i], gt, miner, neg_rng))));
        }
        for (int r = 0; r < miner.n_hard_pb; ++r) {
          hard_pb.push_back(unit_row(index.find(mine_hard_negative(ranked[i], gt, miner, neg_rng))));
        }
        ToyScorer grad;
        const auto loss = rerank_example_loss(out.scorer, weights, unit_q[i], unit_row(gt_rows[i]),
                                              rand_negs, hard_bce, hard_pb, &grad);
        check_finite(loss.total, epoch);
        epoch_loss += loss.total;
        for (std::size_t j = 0; j < grad.w.size(); ++j) grad_sum.w[j] += grad.w[j];
        grad_sum.b += grad.b;
      }
      const double scale = cfg.step_size / static_cast<double>(e - b);
      for (std::size_t j = 0; j < grad_sum.w.size(); ++j) out.scorer.w[j] -= scale * grad_sum.w[j];
      out.scorer.b -= scale * grad_sum.b;
    }
    out.history.push_back({epoch, epoch_loss / static_cast<double>(n), std::nullopt});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingVector> AdaptedProvider::embed(const EmbedRequest& request) const {
  auto raw = base_.embed(request);
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(adapter_.apply(r));
  return out;
}

std::vector<double> ToyScorerAdapter::score(const QuerySpec& query,
                                            const std::vector<std::string>& item_ids) const {
  const auto q = l2_normalize(embed_one(provider_, query).values());
  std::vector<double> scores;
  scores.reserve(item_ids.size());
  for (const auto& id : item_ids) {
    const auto row = items_.find(id);
    if (row == items_.size()) throw Error(ErrorCode::kScorerUnavailable, "no embedding for '" + id + "'");
    const auto c = items_.embedding(row);
    scores.push_back(scorer_.score(q, c.values()));
  }
  return scores;
}

nlohmann::json to_json(const LinearAdapter& adapter) {
  return {{"raw_dim", adapter.raw_dim()},
          {"emb_dim", adapter.emb_dim()},
          {"weight", adapter.weight.data},
          {"bias", adapter.bias}};
}

LinearAdapter adapter_from_json(const nlohmann::json& j) {
  try {
    LinearAdapter a;
    a.weight = Matrix(j.at("raw_dim").get<std::size_t>(), j.at("emb_dim").get<std::size_t>());
    a.weight.data = j.at("weight").get<std::vector<double>>();
    a.bias = j.at("bias").get<std::vector<double>>();
    if (a.weight.data.size() != a.weight.rows * a.weight.cols) {
      throw Error(ErrorCode::kInvalidArgument, "adapter weight size mismatch");
    }
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad adapter JSON: ") + e.what());
  }
}

nlohmann::json to_json(const ToyScorer& scorer) { return {{"w", scorer.w}, {"b", scorer.b}}; }

ToyScorer scorer_from_json(const nlohmann::json& j) {
  try {
    return ToyScorer{j.at("w").get<std::vector<double>>(), j.at("b").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad scorer JSON: ") + e.what());
  }
}

}  // namespace vidret
