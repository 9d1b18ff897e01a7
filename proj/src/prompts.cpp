// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/prompts.hpp"

#include <array>

namespace vidret {
namespace {

// Bodies keep the content slot ahead of the instruction: inputs first, then
// the instruction, then the service appends EOS.
constexpr std::array<PromptTemplate, 5> kRegistry{{
    {prompts::kEmbedVideo, prompts::kEmbedSystem, "{content} Summarize this video in one word:"},
    {prompts::kEmbedText, prompts::kEmbedSystem, "{content} Summarize this text in one word:"},
    {prompts::kEmbedImage, prompts::kEmbedSystem, "{content} Summarize this image in one word:"},
    {prompts::kEmbedComposed, prompts::kEmbedSystem,
     "{content} Encode the representation by considering the semantic change the source video "
     "would undergo under this modification:"},
    {prompts::kRerankMatch, prompts::kRankerSystem, "{content} Does the text match the video?"},
}};

}  // namespace

std::span<const PromptTemplate> prompt_registry() { return kRegistry; }

const PromptTemplate& find_prompt(std::string_view id) {
  for (const auto& p : kRegistry) {
    if (p.id == id) return p;
  }
  throw Error(ErrorCode::kUnknownPrompt, "no prompt with id '" + std::string(id) + "'");
}

std::string render_prompt(const PromptTemplate& prompt, std::string_view content) {
  std::string out(prompt.body);
  const auto pos = out.find(kContentPlaceholder);
  out.replace(pos, kContentPlaceholder.size(), content);
  return out;
}

std::string_view default_prompt_id(QueryKind kind) {
  switch (kind) {
    case QueryKind::kText: return prompts::kEmbedText;
    case QueryKind::kVideo: return prompts::kEmbedVideo;
    case QueryKind::kComposed: return prompts::kEmbedComposed;
  }
  return prompts::kEmbedText;
}

}  // namespace vidret
