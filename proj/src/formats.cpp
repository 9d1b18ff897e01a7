// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/formats.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vidret/prompts.hpp"
#include "vidret/provider.hpp"

namespace vidret {
namespace {

using ojson = nlohmann::ordered_json;

template <typename Fn>
void for_each_line(std::string_view jsonl, Fn&& fn) {
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  "line " + std::to_string(lineno) + ": " + std::string(e.what()));
    }
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::vector<ManifestEntry> parse_manifest(std::string_view jsonl) {
  std::vector<ManifestEntry> out;
  for_each_line(jsonl, [&](const nlohmann::json& j) {
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (j.contains("text")) e.spec.text = j.at("text").get<std::string>();
    if (j.contains("frame_paths")) e.spec.frame_refs = j.at("frame_paths").get<std::vector<std::string>>();
    if (j.contains("modification")) e.spec.modification = j.at("modification").get<std::string>();
    if (kind == "frame") {
      e.item_kind = ItemKind::kFrame;
      e.spec.kind = QueryKind::kVideo;
      e.prompt_id = prompts::kEmbedImage;
    } else {
      e.spec.kind = parse_query_kind(kind);
      e.item_kind = e.spec.kind == QueryKind::kText ? ItemKind::kText : ItemKind::kVideo;
      e.prompt_id = default_prompt_id(e.spec.kind);
    }
    e.spec.validate();
    out.push_back(std::move(e));
  });
  return out;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    ojson j;
    j["id"] = e.id;
    auto payload = item_payload(e.spec);
    if (e.item_kind == ItemKind::kFrame) payload["kind"] = "frame";
    for (auto& [key, value] : payload.items()) j[key] = value;
    out += j.dump() + "\n";
  }
  return out;
}

std::string format_rankings(const std::vector<RankedList>& rankings) {
  std::string out;
  for (const auto& r : rankings) {
    ojson j;
    j["query_id"] = r.query_id;
    j["ranking"] = ojson::array();
    for (const auto& e : r.entries) j["ranking"].push_back({{"id", e.item_id}, {"score", e.score}});
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<RankedList> parse_rankings(std::string_view jsonl) {
  std::vector<RankedList> out;
  for_each_line(jsonl, [&](const nlohmann::json& j) {
    RankedList r{j.at("query_id").get<std::string>(), {}};
    for (const auto& e : j.at("ranking")) {
      r.entries.push_back({e.at("id").get<std::string>(), e.at("score").get<double>()});
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::string format_moments(
    const std::vector<std::pair<std::string, std::vector<MomentWindow>>>& rows) {
  std::string out;
  for (const auto& [id, windows] : rows) {
    ojson j;
    j["query_id"] = id;
    j["windows"] = ojson::array();
    for (const auto& w : windows) {
      j["windows"].push_back({{"start_s", w.start_s}, {"end_s", w.end_s}, {"score", w.score}});
    }
    out += j.dump() + "\n";
  }
  return out;
}

MomentPredictions parse_moments(std::string_view jsonl) {
  MomentPredictions out;
  for_each_line(jsonl, [&](const nlohmann::json& j) {
    auto& windows = out[j.at("query_id").get<std::string>()];
    for (const auto& w : j.at("windows")) {
      windows.emplace_back(w.at("start_s").get<double>(), w.at("end_s").get<double>(),
                           w.at("score").get<double>());
    }
  });
  return out;
}

RetrievalGroundTruth parse_retrieval_gt(std::string_view jsonl) {
  RetrievalGroundTruth out;
  for_each_line(jsonl, [&](const nlohmann::json& j) {
    const auto ids = j.at("item_ids").get<std::vector<std::string>>();
    if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "ground truth with no item ids");
    auto& set = out[j.at("query_id").get<std::string>()];
    set.insert(ids.begin(), ids.end());
  });
  return out;
}

std::string format_retrieval_gt(const RetrievalGroundTruth& gt) {
  std::string out;
  for (const auto& [id, items] : gt) {
    ojson j;
    j["query_id"] = id;
    j["item_ids"] = std::vector<std::string>(items.begin(), items.end());
    out += j.dump() + "\n";
  }
  return out;
}

MomentGroundTruth parse_moment_gt(std::string_view jsonl) {
  MomentGroundTruth out;
  for_each_line(jsonl, [&](const nlohmann::json& j) {
    out.insert_or_assign(j.at("query_id").get<std::string>(),
                         MomentWindow(j.at("start_s").get<double>(), j.at("end_s").get<double>()));
  });
  return out;
}

std::string format_moment_gt(const MomentGroundTruth& gt) {
  std::string out;
  for (const auto& [id, w] : gt) {
    ojson j;
    j["query_id"] = id;
    j["start_s"] = w.start_s;
    j["end_s"] = w.end_s;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace vidret
