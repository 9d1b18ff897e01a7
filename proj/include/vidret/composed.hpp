// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "vidret/core.hpp"
#include "vidret/index.hpp"
#include "vidret/provider.hpp"

namespace vidret {

/// Throws kEmptyInput for no frames or an empty modification.
QuerySpec build_composed_spec(std::vector<std::string> frame_refs, std::string modification);

enum class ComposedOrder { kVideoFirst, kTextFirst };

/// Prompt text for a composed query: source video, modification text, then
/// the fixed instruction. kTextFirst exists only to reproduce the ordering
/// ablation; the engine always sends kVideoFirst.
std::string render_composed_prompt(const QuerySpec& spec,
                                   ComposedOrder order = ComposedOrder::kVideoFirst);

/// Serialized request body sent for one composed query.
std::string composed_payload(const QuerySpec& spec,
                             ComposedOrder order = ComposedOrder::kVideoFirst);

/// Embeds with the composed prompt and returns plain top-k cosine search.
RankedList composed_retrieve(const DenseIndex& index, const QuerySpec& spec,
                             const EmbeddingProvider& provider, int k, std::string query_id = {});

}  // namespace vidret
