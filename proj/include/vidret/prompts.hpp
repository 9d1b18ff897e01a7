// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "vidret/core.hpp"

namespace vidret {

/// Instruction strings sent to the backbone service. These are bit-exact and
/// must not be reformatted.
namespace prompts {

inline constexpr std::string_view kEmbedSystem = "You are a helpful assistant.";
inline constexpr std::string_view kRankerSystem = "You are a strict video text matching judge.";

inline constexpr std::string_view kVideoInstruction = "Summarize this video in one word:";
inline constexpr std::string_view kTextInstruction = "Summarize this text in one word:";
inline constexpr std::string_view kImageInstruction = "Summarize this image in one word:";
inline constexpr std::string_view kMatchInstruction = "Does the text match the video?";
inline constexpr std::string_view kComposedInstruction =
    "Encode the representation by considering the semantic change the source video would "
    "undergo under this modification:";

inline constexpr std::string_view kEmbedVideo = "embed-video";
inline constexpr std::string_view kEmbedText = "embed-text";
inline constexpr std::string_view kEmbedImage = "embed-image";
inline constexpr std::string_view kEmbedComposed = "embed-composed";
inline constexpr std::string_view kRerankMatch = "rerank-match";

}  // namespace prompts

inline constexpr std::string_view kContentPlaceholder = "{content}";

struct PromptTemplate {
  std::string_view id;
  std::string_view system;
  std::string_view body;  // contains kContentPlaceholder exactly once
};

/// Immutable registry of all templates.
std::span<const PromptTemplate> prompt_registry();

/// Throws kUnknownPrompt.
const PromptTemplate& find_prompt(std::string_view id);

/// Substitutes `content` for the placeholder in the template body.
std::string render_prompt(const PromptTemplate& prompt, std::string_view content);

/// Default embedding prompt for a query kind (text, video, composed).
std::string_view default_prompt_id(QueryKind kind);

}  // namespace vidret
