// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file provider.hpp
 *  \brief Sources of embeddings: file store, synthetic world, remote service.
 *
 * The backbone model lives outside this process. Providers turn QuerySpecs
 * into opaque vectors and guarantee a single dim per call.
 */

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "vidret/core.hpp"
#include "vidret/http.hpp"

namespace vidret {

struct EmbedRequest {
  std::vector<QuerySpec> items;
  std::string prompt_id;

  /// Throws kEmptyInput, kInvalidArgument (bad item) or kUnknownPrompt.
  void validate() const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One vector per request item, all of the same dim.
  virtual std::vector<EmbeddingVector> embed(const EmbedRequest& request) const = 0;
};

/// Embeds a single spec with the default prompt of its kind.
EmbeddingVector embed_one(const EmbeddingProvider& provider, const QuerySpec& spec);

/// Wire form of one item: {"kind", "text"?, "frame_paths"?, "modification"?}.
/// Field order is fixed (frames before modification).
nlohmann::ordered_json item_payload(const QuerySpec& spec);

/// Canonical identity string of a spec, used for hashing and store lookup.
std::string item_key(const QuerySpec& spec);

// ---------------------------------------------------------------------------
// Synthetic world

/// Each concept i owns a latent unit vector z_i. Its two views are
///   query_i     = A_q z_i + noise,   candidate_i = A_c z_i + noise
/// with A_v = (B + view_shift * E_v) / sqrt(1 + view_shift^2), where B, E_q,
/// E_c have iid N(0,1) entries, so ||A_v z|| ~ sqrt(raw_dim) and noise_sigma
/// is a per-component noise-to-signal ratio.
struct SyntheticWorld {
  std::uint64_t seed = 0;
  int latent_dim = 16;
  int raw_dim = 32;
  double noise_sigma = 0.1;
  int num_concepts = 64;
  /// Weight of the view-specific part of each map; 0 gives A_q == A_c.
  double view_shift = 1.0;
  /// Replace both maps by the identity (requires raw_dim == latent_dim).
  bool identity_maps = false;
  /// Concept i draws its latent from stream concept_offset + i.
  std::uint64_t concept_offset = 0;

  void validate() const;
  bool operator==(const SyntheticWorld&) const = default;
};

enum class View { kQuery, kCandidate };

struct SyntheticPair {
  EmbeddingVector query;
  EmbeddingVector candidate;
};

/// Holds the realized linear maps of a world so views can be drawn cheaply.
class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(SyntheticWorld world);

  const SyntheticWorld& world() const noexcept { return world_; }

  /// Throws kIndexOutOfRange unless 0 <= concept_index < num_concepts.
  EmbeddingVector view(int concept_index, View v) const;
  SyntheticPair pair(int concept_index) const;

 private:
  SyntheticWorld world_;
  Matrix map_q_;  // raw_dim x latent_dim
  Matrix map_c_;
};

SyntheticPair synthetic_pair(const SyntheticWorld& world, int concept_index);

/// Text label resolved by the synthetic provider to a world view:
/// "concept:<i>/view:q" or "concept:<i>/view:c".
std::string concept_label(int concept_index, View v);

/// Seeded unit vector derived from an arbitrary key.
std::vector<double> hashed_unit_vector(std::uint64_t seed, std::string_view key, int dim);

enum class ComposeRule {
  kFollow,              // normalize(normalize(video) + direction(modification))
  kIgnoreModification,  // composed query embeds as its source video
};

/// Deterministic provider standing in for the backbone.
///
/// Text and frame references that parse as concept labels resolve to world
/// views; anything else maps to a unit vector hashed from (seed, key). A
/// video is the mean of its frame vectors. Composed queries follow
/// `ComposeRule`.
class SyntheticProvider : public EmbeddingProvider {
 public:
  explicit SyntheticProvider(SyntheticWorld world, ComposeRule rule = ComposeRule::kFollow);

  std::vector<EmbeddingVector> embed(const EmbedRequest& request) const override;

  EmbeddingVector embed_spec(const QuerySpec& spec) const;
  /// Unit direction a modification text adds to a composed query.
  std::vector<double> modification_direction(std::string_view modification) const;
  std::vector<double> resolve_ref(std::string_view ref) const;

  const SyntheticGenerator& generator() const noexcept { return generator_; }

 private:
  SyntheticGenerator generator_;
  ComposeRule rule_;
};

/// Looks embeddings up by item_key() in a preloaded store.
class FileProvider : public EmbeddingProvider {
 public:
  explicit FileProvider(std::vector<CorpusItem> items);

  std::vector<EmbeddingVector> embed(const EmbedRequest& request) const override;

 private:
  std::vector<CorpusItem> items_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// HTTP client for POST /v1/embed. Items are split into batches of
/// options.batch_size and at most options.max_in_flight batches are sent
/// concurrently; output order always matches request order.
class RemoteProvider : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteOptions options);

  std::vector<EmbeddingVector> embed(const EmbedRequest& request) const override;

 private:
  RemoteOptions options_;
};

}  // namespace vidret
