// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vidret/core.hpp"

namespace vidret {

/// query id -> ids accepted as correct (several for multi-caption V2T).
using RetrievalGroundTruth = std::map<std::string, std::set<std::string>>;
using MomentGroundTruth = std::map<std::string, MomentWindow>;
/// query id -> windows ordered by descending score.
using MomentPredictions = std::map<std::string, std::vector<MomentWindow>>;

/// Fraction of rankings whose first k entries contain any accepted id.
/// Throws kMissingGroundTruth.
double recall_at_k(const std::vector<RankedList>& rankings, const RetrievalGroundTruth& gt, int k);

/// Fraction of ground-truth queries with a top-k window at IoU >= threshold.
/// Queries without predictions are misses.
double moment_recall(const MomentPredictions& predictions, const MomentGroundTruth& gt,
                     double iou_threshold, int k);

/// Mean top-1 IoU over ground-truth queries; no prediction scores 0.
double mean_iou(const MomentPredictions& predictions, const MomentGroundTruth& gt);

struct MetricValue {
  std::string task;    // e.g. "t2v", "v2t", "moment"
  std::string metric;  // e.g. "recall", "miou"
  std::optional<int> k;
  std::optional<double> threshold;
  double value = 0.0;

  bool operator==(const MetricValue&) const = default;
};

enum class ReportFormat { kJson, kCsv };

ReportFormat parse_report_format(std::string_view name);

/// Deterministic bytes. CSV columns: task,metric,k,threshold,value (empty
/// cells for absent k/threshold). JSON: {"metrics":[...]}.
std::string emit_report(const std::vector<MetricValue>& metrics, ReportFormat format);

std::vector<MetricValue> parse_report(std::string_view bytes, ReportFormat format);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace vidret
