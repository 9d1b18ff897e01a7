// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file store.hpp
 *  \brief VRTEMB01 binary embedding store.
 *
 * Layout, all integers little-endian:
 *
 *   offset size  field
 *   0      8     magic "VRTEMB01"
 *   8      4     dim   (uint32)
 *   12     8     count (uint64)
 *   20     1     normalized flag (0/1), set when every record is unit-norm
 *   21     3     zero padding
 *   24     ...   count records: id_len (uint16), id bytes (UTF-8),
 *                dim x float32 (IEEE-754)
 *
 * Item kinds are not persisted; the reader assigns one kind to all records.
 */

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vidret/core.hpp"

namespace vidret {

inline constexpr std::string_view kStoreMagic = "VRTEMB01";
inline constexpr std::size_t kStoreHeaderSize = 24;

/// Serialized size of a store holding `items`.
std::size_t store_size_bytes(const std::vector<CorpusItem>& items);

std::string encode_store(const std::vector<CorpusItem>& items);
std::vector<CorpusItem> decode_store(std::string_view bytes, ItemKind kind = ItemKind::kVideo);

void write_store(const std::filesystem::path& path, const std::vector<CorpusItem>& items);
std::vector<CorpusItem> read_store(const std::filesystem::path& path,
                                   ItemKind kind = ItemKind::kVideo);

}  // namespace vidret
