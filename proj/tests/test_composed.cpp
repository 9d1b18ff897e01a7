// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vidret/composed.hpp"
#include "vidret/prompts.hpp"

namespace vidret {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

TEST(ComposedSpec, Build) {
  const auto spec = build_composed_spec({"f1"}, "make it snowy");
  EXPECT_EQ(spec.kind, QueryKind::kComposed);
  EXPECT_EQ(*spec.frame_refs, std::vector<std::string>{"f1"});
  EXPECT_EQ(*spec.modification, "make it snowy");
  EXPECT_NO_THROW(spec.validate());
  EXPECT_EQ(code_of([] { build_composed_spec({"f1"}, ""); }), ErrorCode::kEmptyInput);
  EXPECT_EQ(code_of([] { build_composed_spec({}, "x"); }), ErrorCode::kEmptyInput);
}

TEST(ComposedSpec, PayloadOrderVideoTextInstruction) {
  const auto spec = build_composed_spec({"f1"}, "make it snowy");
  EXPECT_EQ(composed_payload(spec),
            R"({"prompt_id":"embed-composed","items":[{"kind":"composed","frame_paths":["f1"],)"
            R"("modification":"make it snowy"}]})");
  const auto prompt = render_composed_prompt(spec);
  const auto v = prompt.find("<frame:f1>");
  const auto t = prompt.find("make it snowy");
  const auto i = prompt.find(prompts::kComposedInstruction);
  ASSERT_NE(v, std::string::npos);
  ASSERT_NE(t, std::string::npos);
  ASSERT_NE(i, std::string::npos);
  EXPECT_LT(v, t);
  EXPECT_LT(t, i);
}

TEST(ComposedSpec, OrderingAblationChangesBytes) {
  const auto spec = build_composed_spec({"f1", "f2"}, "add a hat");
  EXPECT_NE(composed_payload(spec, ComposedOrder::kVideoFirst),
            composed_payload(spec, ComposedOrder::kTextFirst));
  EXPECT_NE(render_composed_prompt(spec, ComposedOrder::kVideoFirst),
            render_composed_prompt(spec, ComposedOrder::kTextFirst));
}

TEST(ComposedSpec, FrameOrderIsSemantic) {
  const auto a = build_composed_spec({"f1", "f2"}, "add a hat");
  const auto b = build_composed_spec({"f2", "f1"}, "add a hat");
  EXPECT_NE(composed_payload(a), composed_payload(b));
  EXPECT_NE(item_key(a), item_key(b));
}

struct Triplets {
  SyntheticWorld world;
  DenseIndex index;
  std::vector<QuerySpec> queries;
  std::vector<std::vector<std::string>> sources;
};

// Independent construction of the planted targets from provider primitives.
Triplets make_triplets(int n) {
  Triplets t;
  t.world.seed = 9;
  const SyntheticProvider p(t.world);
  std::vector<CorpusItem> items;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> frames{"src" + std::to_string(i) + "/a", "src" + std::to_string(i) + "/b"};
    const std::string mod = "mod " + std::to_string(i);
    std::vector<double> video(static_cast<std::size_t>(t.world.raw_dim), 0.0);
    for (const auto& f : frames) {
      const auto r = p.resolve_ref(f);
      for (std::size_t d = 0; d < video.size(); ++d) video[d] += r[d] / frames.size();
    }
    auto v = l2_normalize(video);
    const auto dir = p.modification_direction(mod);
    for (std::size_t d = 0; d < v.size(); ++d) v[d] += dir[d];
    items.push_back({"t" + std::to_string(i), ItemKind::kVideo, EmbeddingVector(v)});
    items.push_back({"s" + std::to_string(i), ItemKind::kVideo, EmbeddingVector(video)});
    t.queries.push_back(build_composed_spec(frames, mod));
    t.sources.push_back(frames);
  }
  t.index = build_index(items);
  return t;
}

TEST(ComposedRetrieve, RuleFollowingProviderFindsTargets) {
  const auto t = make_triplets(30);
  const SyntheticProvider p(t.world);
  for (int i = 0; i < 30; ++i) {
    const auto r = composed_retrieve(t.index, t.queries[i], p, 5);
    ASSERT_EQ(r.entries.size(), 5u);
    EXPECT_EQ(r.entries[0].item_id, "t" + std::to_string(i));
    EXPECT_NEAR(r.entries[0].score, 1.0, 1e-6);
  }
}

TEST(ComposedRetrieve, IgnoringModificationEqualsVideoRetrieval) {
  const auto t = make_triplets(20);
  const SyntheticProvider ablated(t.world, ComposeRule::kIgnoreModification);
  const SyntheticProvider plain(t.world);
  for (int i = 0; i < 20; ++i) {
    const auto composed = composed_retrieve(t.index, t.queries[i], ablated, 10);
    const auto video = search(t.index, embed_one(plain, QuerySpec::from_video(t.sources[i])), 10);
    EXPECT_EQ(composed, video);
    EXPECT_EQ(composed.entries[0].item_id, "s" + std::to_string(i));
  }
}

TEST(ComposedRetrieve, FullKIsPermutation) {
  const auto t = make_triplets(6);
  const SyntheticProvider p(t.world);
  auto ids = testing::ids_of(composed_retrieve(t.index, t.queries[0], p, 12));
  std::sort(ids.begin(), ids.end());
  auto all = t.index.ids();
  std::sort(all.begin(), all.end());
  EXPECT_EQ(ids, all);
}

TEST(ComposedRetrieve, ProviderDownPropagates) {
  const auto t = make_triplets(2);
  RemoteOptions o;
  o.endpoint = "http://127.0.0.1:1";
  o.attempts = 1;
  o.backoff_base = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(500);
  const RemoteProvider down(o);
  EXPECT_EQ(code_of([&] { composed_retrieve(t.index, t.queries[0], down, 1); }),
            ErrorCode::kProviderUnavailable);
}

TEST(ComposedRetrieve, RejectsNonComposed) {
  const auto t = make_triplets(2);
  const SyntheticProvider p(t.world);
  EXPECT_THROW(composed_retrieve(t.index, QuerySpec::from_text("x"), p, 1), Error);
}

}  // namespace
}  // namespace vidret
