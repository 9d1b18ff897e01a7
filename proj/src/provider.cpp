// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/provider.hpp"

#include <charconv>
#include <cmath>

#include "vidret/parallel.hpp"
#include "vidret/prompts.hpp"
#include "vidret/rng.hpp"

namespace vidret {

void EmbedRequest::validate() const {
  if (items.empty()) throw Error(ErrorCode::kEmptyInput, "embed request has no items");
  find_prompt(prompt_id);
  for (const auto& item : items) item.validate();
}

EmbeddingVector embed_one(const EmbeddingProvider& provider, const QuerySpec& spec) {
  EmbedRequest request{{spec}, std::string(default_prompt_id(spec.kind))};
  auto out = provider.embed(request);
  return std::move(out.front());
}

nlohmann::ordered_json item_payload(const QuerySpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(spec.kind);
  if (spec.text) j["text"] = *spec.text;
  if (spec.frame_refs) j["frame_paths"] = *spec.frame_refs;
  if (spec.modification) j["modification"] = *spec.modification;
  return j;
}

std::string item_key(const QuerySpec& spec) {
  std::string frames;
  if (spec.frame_refs) {
    for (std::size_t i = 0; i < spec.frame_refs->size(); ++i) {
      if (i > 0) frames += '|';
      frames += (*spec.frame_refs)[i];
    }
  }
  switch (spec.kind) {
    case QueryKind::kText: return spec.text.value_or("");
    case QueryKind::kVideo: return frames;
    case QueryKind::kComposed: return "composed:" + frames + "|" + spec.modification.value_or("");
  }
  return {};
}

// ---------------------------------------------------------------------------

void SyntheticWorld::validate() const {
  if (latent_dim < 1 || raw_dim < 1 || num_concepts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic world dims and concept count must be >= 1");
  }
  if (raw_dim < latent_dim) throw Error(ErrorCode::kInvalidArgument, "raw_dim must be >= latent_dim");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be finite and >= 0");
  }
  if (!(view_shift >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "view_shift must be >= 0");
  if (identity_maps && raw_dim != latent_dim) {
    throw Error(ErrorCode::kInvalidArgument, "identity maps need raw_dim == latent_dim");
  }
}

namespace {

Matrix gaussian_matrix(std::uint64_t seed, int rows, int cols) {
  Matrix m(rows, cols);
  Rng rng(seed);
  for (double& v : m.data) v = rng.normal();
  return m;
}

Matrix view_map(const SyntheticWorld& w, const Matrix& base, std::string_view tag) {
  Matrix map(w.raw_dim, w.latent_dim);
  if (w.identity_maps) {
    for (int i = 0; i < w.raw_dim; ++i) map(i, i) = 1.0;
    return map;
  }
  const Matrix specific = gaussian_matrix(derive_seed(w.seed, tag), w.raw_dim, w.latent_dim);
  const double scale = 1.0 / std::sqrt(1.0 + w.view_shift * w.view_shift);
  for (std::size_t k = 0; k < map.data.size(); ++k) {
    map.data[k] = (base.data[k] + w.view_shift * specific.data[k]) * scale;
  }
  return map;
}

bool parse_concept_label(std::string_view s, int& index, View& view) {
  constexpr std::string_view kPrefix = "concept:";
  constexpr std::string_view kViewTag = "/view:";
  if (s.substr(0, kPrefix.size()) != kPrefix) return false;
  s.remove_prefix(kPrefix.size());
  const auto slash = s.find(kViewTag);
  if (slash == std::string_view::npos || slash == 0) return false;
  const auto digits = s.substr(0, slash);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return false;
  const auto tag = s.substr(slash + kViewTag.size());
  if (tag == "q") {
    view = View::kQuery;
  } else if (tag == "c") {
    view = View::kCandidate;
  } else {
    return false;
  }
  return true;
}

}  // namespace

SyntheticGenerator::SyntheticGenerator(SyntheticWorld world) : world_(world) {
  world_.validate();
  const Matrix base = world_.identity_maps
                          ? Matrix()
                          : gaussian_matrix(derive_seed(world_.seed, "map-base"), world_.raw_dim,
                                            world_.latent_dim);
  map_q_ = view_map(world_, base, "map-q");
  map_c_ = view_map(world_, base, "map-c");
}

EmbeddingVector SyntheticGenerator::view(int concept_index, View v) const {
  if (concept_index < 0 || concept_index >= world_.num_concepts) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "concept " + std::to_string(concept_index) + " outside [0, " +
                    std::to_string(world_.num_concepts) + ")");
  }
  const std::uint64_t stream = world_.concept_offset + static_cast<std::uint64_t>(concept_index);
  const auto latent = hashed_unit_vector(world_.seed, "latent:" + std::to_string(stream),
                                         world_.latent_dim);
  const Matrix& map = v == View::kQuery ? map_q_ : map_c_;
  Rng noise(derive_seed(world_.seed, v == View::kQuery ? "noise-q" : "noise-c", stream));
  std::vector<double> out(world_.raw_dim);
  for (int r = 0; r < world_.raw_dim; ++r) {
    out[r] = dot(map.row(r), latent);
    if (world_.noise_sigma > 0.0) out[r] += world_.noise_sigma * noise.normal();
  }
  return EmbeddingVector(std::move(out));
}

SyntheticPair SyntheticGenerator::pair(int concept_index) const {
  return {view(concept_index, View::kQuery), view(concept_index, View::kCandidate)};
}

SyntheticPair synthetic_pair(const SyntheticWorld& world, int concept_index) {
  return SyntheticGenerator(world).pair(concept_index);
}

std::string concept_label(int concept_index, View v) {
  return "concept:" + std::to_string(concept_index) + (v == View::kQuery ? "/view:q" : "/view:c");
}

std::vector<double> hashed_unit_vector(std::uint64_t seed, std::string_view key, int dim) {
  Rng rng(derive_seed(seed, key));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  while (norm2 == 0.0) {
    for (double& x : v) x = rng.normal();
    norm2 = dot(v, v);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

SyntheticProvider::SyntheticProvider(SyntheticWorld world, ComposeRule rule)
    : generator_(world), rule_(rule) {}

std::vector<double> SyntheticProvider::resolve_ref(std::string_view ref) const {
  int index = 0;
  View view = View::kQuery;
  if (parse_concept_label(ref, index, view)) {
    const auto e = generator_.view(index, view);
    return {e.values().begin(), e.values().end()};
  }
  return hashed_unit_vector(generator_.world().seed, ref, generator_.world().raw_dim);
}

std::vector<double> SyntheticProvider::modification_direction(std::string_view modification) const {
  return hashed_unit_vector(generator_.world().seed, "modification:" + std::string(modification),
                            generator_.world().raw_dim);
}

EmbeddingVector SyntheticProvider::embed_spec(const QuerySpec& spec) const {
  spec.validate();
  if (spec.kind == QueryKind::kText) return EmbeddingVector(resolve_ref(*spec.text));

  const auto& frames = *spec.frame_refs;
  std::vector<double> video(generator_.world().raw_dim, 0.0);
  for (const auto& ref : frames) {
    const auto f = resolve_ref(ref);
    for (std::size_t i = 0; i < video.size(); ++i) video[i] += f[i];
  }
  for (double& x : video) x /= static_cast<double>(frames.size());
  if (spec.kind == QueryKind::kVideo || rule_ == ComposeRule::kIgnoreModification) {
    return EmbeddingVector(std::move(video));
  }

  auto composed = l2_normalize(video);
  const auto direction = modification_direction(*spec.modification);
  for (std::size_t i = 0; i < composed.size(); ++i) composed[i] += direction[i];
  return l2_normalize(EmbeddingVector(std::move(composed)));
}

std::vector<EmbeddingVector> SyntheticProvider::embed(const EmbedRequest& request) const {
  request.validate();
  std::vector<EmbeddingVector> out;
  out.reserve(request.items.size());
  for (const auto& item : request.items) out.push_back(embed_spec(item));
  return out;
}

// ---------------------------------------------------------------------------

FileProvider::FileProvider(std::vector<CorpusItem> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].embedding.dim() != items_.front().embedding.dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "file provider store has mixed dims");
    }
    if (!by_id_.emplace(items_[i].id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id '" + items_[i].id + "'");
    }
  }
}

std::vector<EmbeddingVector> FileProvider::embed(const EmbedRequest& request) const {
  request.validate();
  std::vector<EmbeddingVector> out;
  out.reserve(request.items.size());
  for (const auto& item : request.items) {
    const auto key = item_key(item);
    const auto it = by_id_.find(key);
    if (it == by_id_.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no stored embedding for '" + key + "'");
    }
    out.push_back(items_[it->second].embedding);
  }
  return out;
}

// ---------------------------------------------------------------------------

RemoteProvider::RemoteProvider(RemoteOptions options) : options_(std::move(options)) {
  if (options_.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
}

namespace {

std::vector<EmbeddingVector> parse_embed_reply(const nlohmann::json& reply, std::size_t expected) {
  try {
    if (!reply.is_object() || !reply.contains("dim") || !reply.contains("embeddings")) {
      throw Error(ErrorCode::kMalformedResponse, "reply lacks dim/embeddings");
    }
    const auto dim = reply.at("dim").get<long long>();
    const auto& rows = reply.at("embeddings");
    if (dim < 1 || !rows.is_array() || rows.size() != expected) {
      throw Error(ErrorCode::kMalformedResponse,
                  "expected " + std::to_string(expected) + " embeddings, got " +
                      std::to_string(rows.is_array() ? rows.size() : 0));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(expected);
    for (const auto& row : rows) {
      if (!row.is_array() || static_cast<long long>(row.size()) != dim) {
        throw Error(ErrorCode::kMalformedResponse, "embedding length differs from dim");
      }
      std::vector<double> values;
      values.reserve(row.size());
      for (const auto& v : row) values.push_back(v.get<double>());
      out.emplace_back(std::move(values));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonFinite) throw Error(ErrorCode::kMalformedResponse, e.what());
    throw;
  }
}

}  // namespace

std::vector<EmbeddingVector> RemoteProvider::embed(const EmbedRequest& request) const {
  request.validate();
  const std::size_t n = request.items.size();
  const std::size_t batch = static_cast<std::size_t>(options_.batch_size);
  const std::size_t batches = (n + batch - 1) / batch;
  std::vector<std::vector<EmbeddingVector>> parts(batches);

  parallel_for(batches, options_.max_in_flight, [&](std::size_t b) {
    const std::size_t begin = b * batch;
    const std::size_t end = std::min(n, begin + batch);
    nlohmann::ordered_json body;
    body["prompt_id"] = request.prompt_id;
    body["items"] = nlohmann::ordered_json::array();
    for (std::size_t i = begin; i < end; ++i) body["items"].push_back(item_payload(request.items[i]));
    const auto reply = post_json(options_, "/v1/embed", body.dump());
    parts[b] = parse_embed_reply(reply, end - begin);
  });

  std::vector<EmbeddingVector> out;
  out.reserve(n);
  for (auto& part : parts) {
    for (auto& e : part) {
      if (!out.empty() && e.dim() != out.front().dim()) {
        throw Error(ErrorCode::kMalformedResponse, "service returned vectors of mixed dim");
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace vidret
