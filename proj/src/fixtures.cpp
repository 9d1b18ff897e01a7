// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "vidret/composed.hpp"
#include "vidret/formats.hpp"
#include "vidret/prompts.hpp"
#include "vidret/rng.hpp"
#include "vidret/store.hpp"

namespace vidret {
namespace {

std::string frame_id(std::size_t t) {
  std::string s = std::to_string(t);
  return "f" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir.string() + "': " + ec.message());
}

// Unit vector orthogonal to unit q drawn from `rng`.
std::vector<double> orthogonal_unit(std::span<const double> q, Rng& rng) {
  for (;;) {
    std::vector<double> u(q.size());
    for (double& x : u) x = rng.normal();
    const double proj = dot(u, q);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= proj * q[i];
    double n2 = 0.0;
    for (double x : u) n2 += x * x;
    if (n2 > 1e-12) {
      const double inv = 1.0 / std::sqrt(n2);
      for (double& x : u) x *= inv;
      return u;
    }
  }
}

void validate_segments(const SegmentSpec& spec, int num_frames) {
  if (spec.planted.empty()) {
    if (spec.min_frames < 1 || spec.max_frames < spec.min_frames || spec.max_frames > num_frames) {
      throw Error(ErrorCode::kInvalidSegment, "segment lengths must satisfy 1 <= min <= max <= T");
    }
    return;
  }
  auto sorted = spec.planted;
  for (const auto& [a, b] : sorted) {
    if (a < 0 || b <= a || b > num_frames) {
      throw Error(ErrorCode::kInvalidSegment, "segment [" + std::to_string(a) + ", " + std::to_string(b) +
                                                  ") does not fit in [0, " + std::to_string(num_frames) + ")");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].first < sorted[i - 1].second) {
      throw Error(ErrorCode::kInvalidSegment, "planted segments overlap");
    }
  }
}

}  // namespace

RetrievalFixture gen_retrieval_fixture(std::uint64_t seed, int n_concepts, double noise) {
  if (n_concepts < 2) throw Error(ErrorCode::kInvalidArgument, "n_concepts must be >= 2");
  RetrievalFixture f;
  f.world.seed = seed;
  f.world.num_concepts = n_concepts;
  f.world.noise_sigma = noise;
  f.world.view_shift = 0.0;
  f.world.validate();
  const SyntheticGenerator gen(f.world);
  for (int i = 0; i < n_concepts; ++i) {
    auto p = gen.pair(i);
    const auto n = std::to_string(i);
    f.queries.push_back({"q" + n, ItemKind::kText, std::move(p.query)});
    f.candidates.push_back({"v" + n, ItemKind::kVideo, std::move(p.candidate)});
    f.gt["q" + n] = {"v" + n};
  }
  return f;
}

void write_retrieval_fixture(const std::filesystem::path& dir, const RetrievalFixture& fixture) {
  make_dir(dir);
  write_store(dir / "queries.bin", fixture.queries);
  write_store(dir / "candidates.bin", fixture.candidates);
  write_text_file(dir / "gt.jsonl", format_retrieval_gt(fixture.gt));
}

MomentFixture gen_moment_fixture(std::uint64_t seed, int n_queries, int num_frames,
                                 const SegmentSpec& segments, double snr) {
  if (n_queries < 1 || num_frames < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need n_queries >= 1 and T >= 2");
  }
  if (!(snr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "snr must be > 0");
  validate_segments(segments, num_frames);

  MomentFixture f;
  f.duration_s = num_frames * f.frame_hop_s;
  const double noise_sd = std::isinf(snr) ? 0.0 : kMomentAmplitude / snr;
  for (int qi = 0; qi < n_queries; ++qi) {
    const auto qi64 = static_cast<std::uint64_t>(qi);
    Rng rng(derive_seed(seed, "moment", qi64));
    std::vector<EmbeddingVector> frames;
    std::vector<double> similarity;
    auto q = hashed_unit_vector(seed, "moment-query:" + std::to_string(qi), kMomentFixtureDim);

    std::vector<std::pair<int, int>> planted = segments.planted;
    if (planted.empty()) {
      const int len =
          segments.min_frames + static_cast<int>(rng.uniform_index(segments.max_frames - segments.min_frames + 1));
      const int start = static_cast<int>(rng.uniform_index(num_frames - len + 1));
      planted.emplace_back(start, start + len);
    }
    std::vector<double> mask(num_frames, 0.0);
    for (std::size_t s = 0; s < planted.size(); ++s) {
      for (int t = planted[s].first; t < planted[s].second; ++t) mask[t] = s == 0 ? 1.0 : 0.5;
    }

    Rng noise(derive_seed(seed, "moment-noise", qi64));
    Rng basis(derive_seed(seed, "moment-basis", qi64));
    for (int t = 0; t < num_frames; ++t) {
      double s = kMomentAmplitude * mask[t];
      if (noise_sd > 0.0) s += noise_sd * noise.normal();
      s = std::clamp(s, -1.0, 1.0);
      const auto u = orthogonal_unit(q, basis);
      const double r = std::sqrt(std::max(0.0, 1.0 - s * s));
      std::vector<double> frame(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) frame[i] = s * q[i] + r * u[i];
      frames.emplace_back(std::move(frame));
      similarity.push_back(s);
    }
    MomentCase c{"m" + std::to_string(qi), EmbeddingVector(std::move(q), true), std::move(frames),
                 std::move(similarity)};
    f.gt.insert_or_assign(c.query_id, MomentWindow(planted[0].first * f.frame_hop_s,
                                                   planted[0].second * f.frame_hop_s));
    f.cases.push_back(std::move(c));
  }
  return f;
}

void write_moment_fixture(const std::filesystem::path& dir, const MomentFixture& fixture) {
  make_dir(dir / "frames");
  std::vector<CorpusItem> queries;
  std::string videos;
  for (const auto& c : fixture.cases) {
    queries.push_back({c.query_id, ItemKind::kText, c.query});
    std::vector<CorpusItem> frames;
    for (std::size_t t = 0; t < c.frames.size(); ++t) {
      frames.push_back({frame_id(t), ItemKind::kFrame, c.frames[t]});
    }
    const auto rel = std::filesystem::path("frames") / (c.query_id + ".bin");
    write_store(dir / rel, frames);
    nlohmann::ordered_json j;
    j["query_id"] = c.query_id;
    j["frames"] = rel.generic_string();
    j["frame_hop_s"] = fixture.frame_hop_s;
    j["duration_s"] = fixture.duration_s;
    videos += j.dump() + "\n";
  }
  write_store(dir / "queries.bin", queries);
  write_text_file(dir / "videos.jsonl", videos);
  write_text_file(dir / "gt.jsonl", format_moment_gt(fixture.gt));
}

ComposedFixture gen_composed_fixture(std::uint64_t seed, int n_triplets) {
  if (n_triplets < 1) throw Error(ErrorCode::kInvalidArgument, "n_triplets must be >= 1");
  ComposedFixture f;
  f.world.seed = seed;
  f.world.validate();
  const SyntheticProvider provider(f.world, ComposeRule::kFollow);
  std::vector<CorpusItem> sources;
  for (int i = 0; i < n_triplets; ++i) {
    const auto n = std::to_string(i);
    std::vector<std::string> frames;
    for (int k = 0; k < 4; ++k) frames.push_back("source" + n + "/frame" + std::to_string(k));
    auto spec = build_composed_spec(frames, "edit " + n);
    f.corpus.push_back({"t" + n, ItemKind::kVideo, provider.embed_spec(spec)});
    sources.push_back({"s" + n, ItemKind::kVideo, provider.embed_spec(QuerySpec::from_video(frames))});
    f.queries.push_back({"c" + n, std::move(spec)});
    f.gt["c" + n] = {"t" + n};
  }
  for (auto& s : sources) f.corpus.push_back(std::move(s));
  return f;
}

void write_composed_fixture(const std::filesystem::path& dir, const ComposedFixture& fixture) {
  make_dir(dir);
  write_store(dir / "corpus.bin", fixture.corpus);
  std::vector<ManifestEntry> manifest;
  for (const auto& q : fixture.queries) {
    manifest.push_back({q.id, ItemKind::kVideo, q.spec, std::string(prompts::kEmbedComposed)});
  }
  write_text_file(dir / "queries.jsonl", format_manifest(manifest));
  write_text_file(dir / "gt.jsonl", format_retrieval_gt(fixture.gt));
}

}  // namespace vidret
