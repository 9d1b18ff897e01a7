// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/composed.hpp"

#include <nlohmann/json.hpp>

#include "vidret/prompts.hpp"

namespace vidret {

QuerySpec build_composed_spec(std::vector<std::string> frame_refs, std::string modification) {
  if (frame_refs.empty()) throw Error(ErrorCode::kEmptyInput, "composed query needs frames");
  if (modification.empty()) throw Error(ErrorCode::kEmptyInput, "composed query needs a modification");
  QuerySpec spec;
  spec.kind = QueryKind::kComposed;
  spec.frame_refs = std::move(frame_refs);
  spec.modification = std::move(modification);
  return spec;
}

namespace {

std::string video_tokens(const std::vector<std::string>& frames) {
  std::string out = "<video>";
  for (const auto& f : frames) out += "<frame:" + f + ">";
  return out + "</video>";
}

}  // namespace

std::string render_composed_prompt(const QuerySpec& spec, ComposedOrder order) {
  if (spec.kind != QueryKind::kComposed) {
    throw Error(ErrorCode::kInvalidArgument, "not a composed query");
  }
  spec.validate();
  const auto video = video_tokens(*spec.frame_refs);
  const auto& text = *spec.modification;
  const auto content =
      order == ComposedOrder::kVideoFirst ? video + " " + text : text + " " + video;
  return render_prompt(find_prompt(prompts::kEmbedComposed), content);
}

std::string composed_payload(const QuerySpec& spec, ComposedOrder order) {
  spec.validate();
  nlohmann::ordered_json body;
  body["prompt_id"] = prompts::kEmbedComposed;
  nlohmann::ordered_json item;
  item["kind"] = to_string(spec.kind);
  if (order == ComposedOrder::kVideoFirst) {
    item["frame_paths"] = *spec.frame_refs;
    item["modification"] = *spec.modification;
  } else {
    item["modification"] = *spec.modification;
    item["frame_paths"] = *spec.frame_refs;
  }
  body["items"] = nlohmann::ordered_json::array({item});
  return body.dump();
}

RankedList composed_retrieve(const DenseIndex& index, const QuerySpec& spec,
                             const EmbeddingProvider& provider, int k, std::string query_id) {
  if (spec.kind != QueryKind::kComposed) {
    throw Error(ErrorCode::kInvalidArgument, "composed_retrieve needs a composed query");
  }
  EmbedRequest request{{spec}, std::string(prompts::kEmbedComposed)};
  const auto embedding = provider.embed(request).front();
  return search(index, embedding, k, std::move(query_id));
}

}  // namespace vidret
