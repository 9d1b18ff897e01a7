// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file fixtures.hpp
 *  \brief Seeded benchmark generators with known ground truth.
 *
 * Every generator is a pure function of its arguments. The write_* helpers
 * emit the same store and JSONL formats the CLI consumes.
 */

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vidret/core.hpp"
#include "vidret/evaluation.hpp"
#include "vidret/pipeline.hpp"
#include "vidret/provider.hpp"

namespace vidret {

// ---------------------------------------------------------------------------
// Paired retrieval

struct RetrievalFixture {
  SyntheticWorld world;
  std::vector<CorpusItem> queries;     // "q<i>", kind text
  std::vector<CorpusItem> candidates;  // "v<i>", kind video
  RetrievalGroundTruth gt;             // q<i> -> {v<i>}
};

/// Both views share one map (view_shift 0), so with noise == 0 each query
/// equals its candidate.
RetrievalFixture gen_retrieval_fixture(std::uint64_t seed, int n_concepts, double noise);

/// queries.bin, candidates.bin, gt.jsonl
void write_retrieval_fixture(const std::filesystem::path& dir, const RetrievalFixture& fixture);

// ---------------------------------------------------------------------------
// Planted moments

struct SegmentSpec {
  /// Drawn lengths, inclusive, when `planted` is empty.
  int min_frames = 10;
  int max_frames = 30;
  /// Fixed half-open frame ranges [start, end) planted in every signal. The
  /// first is the ground truth; the rest are distractors at half amplitude.
  std::vector<std::pair<int, int>> planted;
};

struct MomentCase {
  std::string query_id;
  EmbeddingVector query;
  std::vector<EmbeddingVector> frames;
  /// Planted cosine between query and each frame.
  std::vector<double> similarity;
};

struct MomentFixture {
  double frame_hop_s = 1.0;
  double duration_s = 0.0;
  std::vector<MomentCase> cases;
  MomentGroundTruth gt;
};

inline constexpr int kMomentFixtureDim = 16;
inline constexpr double kMomentAmplitude = 0.8;

/// Signal s_t = A * m_t + (A / snr) * g_t clipped to [-1, 1], with m the
/// segment mask and g standard normal; frame t is s_t q + sqrt(1 - s_t^2) u_t
/// with u_t a unit vector orthogonal to q, so cos(q, f_t) == s_t.
/// snr may be +infinity. Throws kInvalidSegment on empty, overlapping or
/// out-of-range segments and kInvalidArgument on bad sizes.
MomentFixture gen_moment_fixture(std::uint64_t seed, int n_queries, int num_frames,
                                 const SegmentSpec& segments, double snr);

/// queries.bin, frames/<query_id>.bin, videos.jsonl, gt.jsonl
void write_moment_fixture(const std::filesystem::path& dir, const MomentFixture& fixture);

// ---------------------------------------------------------------------------
// Composed triplets

struct ComposedFixture {
  SyntheticWorld world;  // provider world (hashed frame references)
  /// Targets "t<i>" = normalize(normalize(source_i) + direction(mod_i)),
  /// followed by the sources "s<i>" as distractors.
  std::vector<CorpusItem> corpus;
  std::vector<NamedQuery> queries;  // "c<i>": source frames + modification
  RetrievalGroundTruth gt;          // c<i> -> {t<i>}
};

ComposedFixture gen_composed_fixture(std::uint64_t seed, int n_triplets);

/// corpus.bin, queries.jsonl (manifest), gt.jsonl
void write_composed_fixture(const std::filesystem::path& dir, const ComposedFixture& fixture);

}  // namespace vidret
