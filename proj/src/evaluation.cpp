// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vidret {
namespace {

void check_known(const std::string& id, bool known) {
  if (!known) throw Error(ErrorCode::kMissingGroundTruth, "no ground truth for query '" + id + "'");
}

template <typename Gt>
void check_predictions(const MomentPredictions& predictions, const Gt& gt) {
  for (const auto& [id, windows] : predictions) check_known(id, gt.contains(id));
}

}  // namespace

double recall_at_k(const std::vector<RankedList>& rankings, const RetrievalGroundTruth& gt, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (rankings.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : rankings) {
    const auto it = gt.find(r.query_id);
    check_known(r.query_id, it != gt.end());
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), r.entries.size());
    for (std::size_t i = 0; i < top; ++i) {
      if (it->second.contains(r.entries[i].item_id)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double moment_recall(const MomentPredictions& predictions, const MomentGroundTruth& gt,
                     double iou_threshold, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  check_predictions(predictions, gt);
  if (gt.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& [id, truth] : gt) {
    const auto it = predictions.find(id);
    if (it == predictions.end()) continue;
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), it->second.size());
    for (std::size_t i = 0; i < top; ++i) {
      if (interval_iou(it->second[i], truth) >= iou_threshold) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(gt.size());
}

double mean_iou(const MomentPredictions& predictions, const MomentGroundTruth& gt) {
  check_predictions(predictions, gt);
  if (gt.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [id, truth] : gt) {
    const auto it = predictions.find(id);
    if (it != predictions.end() && !it->second.empty()) total += interval_iou(it->second.front(), truth);
  }
  return total / static_cast<double>(gt.size());
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kInvalidArgument, "unknown report format '" + std::string(name) + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string emit_report(const std::vector<MetricValue>& metrics, ReportFormat format) {
  for (const auto& m : metrics) {
    if (!std::isfinite(m.value)) throw Error(ErrorCode::kNonFinite, "metric value is not finite");
  }
  if (format == ReportFormat::kCsv) {
    std::string out = "task,metric,k,threshold,value\n";
    for (const auto& m : metrics) {
      out += m.task + "," + m.metric + ",";
      if (m.k) out += std::to_string(*m.k);
      out += ",";
      if (m.threshold) out += format_double(*m.threshold);
      out += "," + format_double(m.value) + "\n";
    }
    return out;
  }
  nlohmann::ordered_json doc;
  doc["metrics"] = nlohmann::ordered_json::array();
  for (const auto& m : metrics) {
    nlohmann::ordered_json j;
    j["task"] = m.task;
    j["metric"] = m.metric;
    j["k"] = m.k ? nlohmann::ordered_json(*m.k) : nlohmann::ordered_json(nullptr);
    j["threshold"] = m.threshold ? nlohmann::ordered_json(*m.threshold) : nlohmann::ordered_json(nullptr);
    j["value"] = m.value;
    doc["metrics"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::vector<MetricValue> parse_report(std::string_view bytes, ReportFormat format) {
  std::vector<MetricValue> out;
  if (format == ReportFormat::kJson) {
    try {
      const auto doc = nlohmann::json::parse(bytes);
      for (const auto& j : doc.at("metrics")) {
        MetricValue m;
        m.task = j.at("task").get<std::string>();
        m.metric = j.at("metric").get<std::string>();
        if (!j.at("k").is_null()) m.k = j.at("k").get<int>();
        if (!j.at("threshold").is_null()) m.threshold = j.at("threshold").get<double>();
        m.value = j.at("value").get<double>();
        out.push_back(std::move(m));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bad JSON report: ") + e.what());
    }
    return out;
  }
  std::istringstream in{std::string(bytes)};
  std::string line;
  if (!std::getline(in, line) || line != "task,metric,k,threshold,value") {
    throw Error(ErrorCode::kInvalidArgument, "CSV report lacks header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw Error(ErrorCode::kInvalidArgument, "CSV row needs 5 cells: " + line);
    MetricValue m;
    m.task = cells[0];
    m.metric = cells[1];
    if (!cells[2].empty()) m.k = std::stoi(cells[2]);
    if (!cells[3].empty()) m.threshold = std::stod(cells[3]);
    m.value = std::stod(cells[4]);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace vidret
