// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file formats.hpp
 *  \brief JSON/JSONL interchange files.
 *
 *  manifest     {"id":str,"kind":"text"|"video"|"frame"|"composed",
 *                "text":str?,"frame_paths":[str]?,"modification":str?}
 *  rankings     {"query_id":str,"ranking":[{"id":str,"score":float}]}
 *  moments      {"query_id":str,"windows":[{"start_s":float,"end_s":float,"score":float}]}
 *  retrieval gt {"query_id":str,"item_ids":[str]}
 *  moment gt    {"query_id":str,"start_s":float,"end_s":float}
 */

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vidret/core.hpp"
#include "vidret/evaluation.hpp"

namespace vidret {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

struct ManifestEntry {
  std::string id;
  ItemKind item_kind = ItemKind::kText;  // kind recorded in stores
  QuerySpec spec;
  std::string prompt_id;  // frames embed with the image prompt

  bool operator==(const ManifestEntry&) const = default;
};

std::vector<ManifestEntry> parse_manifest(std::string_view jsonl);
std::string format_manifest(const std::vector<ManifestEntry>& entries);

std::string format_rankings(const std::vector<RankedList>& rankings);
std::vector<RankedList> parse_rankings(std::string_view jsonl);

std::string format_moments(const std::vector<std::pair<std::string, std::vector<MomentWindow>>>& rows);
MomentPredictions parse_moments(std::string_view jsonl);

RetrievalGroundTruth parse_retrieval_gt(std::string_view jsonl);
std::string format_retrieval_gt(const RetrievalGroundTruth& gt);
MomentGroundTruth parse_moment_gt(std::string_view jsonl);
std::string format_moment_gt(const MomentGroundTruth& gt);

}  // namespace vidret
