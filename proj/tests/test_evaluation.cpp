// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vidret/evaluation.hpp"

namespace vidret {
namespace {

// Ranking whose gt "g" sits at 1-based `rank` among distractors.
RankedList with_gt_at(const std::string& qid, int rank, int n = 10) {
  RankedList r{qid, {}};
  for (int i = 1; i <= n; ++i) r.entries.push_back({i == rank ? "g" : "x" + std::to_string(i), 1.0 / i});
  return r;
}

TEST(Recall, Examples) {
  RetrievalGroundTruth gt{{"a", {"g"}}, {"b", {"g"}}, {"c", {"g"}}, {"d", {"g"}}};
  const std::vector<RankedList> top{with_gt_at("a", 1), with_gt_at("b", 1)};
  EXPECT_EQ(recall_at_k(top, gt, 1), 1.0);
  const std::vector<RankedList> mixed{with_gt_at("a", 1), with_gt_at("b", 3), with_gt_at("c", 7),
                                      with_gt_at("d", 2)};
  EXPECT_DOUBLE_EQ(recall_at_k(mixed, gt, 5), 0.75);
  EXPECT_DOUBLE_EQ(recall_at_k(mixed, gt, 1), 0.25);
  EXPECT_DOUBLE_EQ(recall_at_k(mixed, gt, 10), 1.0);
}

TEST(Recall, AnyOfMultiCaption) {
  RetrievalGroundTruth gt{{"v", {"a", "b"}}};
  const RankedList r{"v", {{"b", 0.9}, {"a", 0.8}}};
  EXPECT_EQ(recall_at_k({r}, gt, 1), 1.0);
}

TEST(Recall, MissingGroundTruth) {
  try {
    recall_at_k({with_gt_at("zz", 1)}, RetrievalGroundTruth{{"a", {"g"}}}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGroundTruth);
  }
}

TEST(Recall, MonotoneInKAndOrderInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    RetrievalGroundTruth gt;
    std::vector<RankedList> rs;
    const int n = 1 + static_cast<int>(rng.uniform_index(20));
    for (int q = 0; q < n; ++q) {
      const auto id = "q" + std::to_string(q);
      gt[id] = {"g"};
      rs.push_back(with_gt_at(id, 1 + static_cast<int>(rng.uniform_index(10))));
    }
    double prev = 0;
    for (int k = 1; k <= 10; ++k) {
      const double r = recall_at_k(rs, gt, k);
      EXPECT_GE(r, prev);
      prev = r;
    }
    EXPECT_EQ(prev, 1.0);
    auto shuffled = rs;
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(recall_at_k(shuffled, gt, 3), recall_at_k(rs, gt, 3));
  }
}

TEST(MomentRecall, Examples) {
  MomentGroundTruth gt{{"q", MomentWindow(5, 15)}};
  EXPECT_EQ(moment_recall({{"q", {MomentWindow(5, 15)}}}, gt, 1.0, 1), 1.0);
  const MomentPredictions p{{"q", {MomentWindow(0, 10, 0.9)}}};
  EXPECT_EQ(moment_recall(p, gt, 0.3, 1), 1.0);
  EXPECT_EQ(moment_recall(p, gt, 0.5, 1), 0.0);
  EXPECT_EQ(moment_recall({}, gt, 0.3, 1), 0.0);
  EXPECT_THROW(moment_recall({{"other", {}}}, gt, 0.3, 1), Error);
}

TEST(MeanIou, Examples) {
  MomentGroundTruth gt{{"a", MomentWindow(0, 10)}, {"b", MomentWindow(5, 15)}, {"c", MomentWindow(0, 10)}};
  const MomentPredictions exact{{"a", {MomentWindow(0, 10)}}, {"b", {MomentWindow(5, 15)}},
                                {"c", {MomentWindow(0, 10)}}};
  EXPECT_EQ(mean_iou(exact, gt), 1.0);
  MomentGroundTruth two{{"a", MomentWindow(0, 10)}, {"b", MomentWindow(5, 15)}};
  EXPECT_DOUBLE_EQ(mean_iou({{"a", {MomentWindow(0, 10)}}, {"b", {}}}, two), 0.5);
  const MomentPredictions mixed{{"a", {MomentWindow(0, 10)}}, {"b", {MomentWindow(0, 10)}},
                                {"c", {MomentWindow(20, 30)}}};
  // b: [0,10] vs [5,15] is 1/3; a still exact.
  MomentGroundTruth gt3{{"a", MomentWindow(0, 10)}, {"b", MomentWindow(5, 15)}, {"c", MomentWindow(0, 10)}};
  EXPECT_NEAR(mean_iou(mixed, gt3), (1.0 + 1.0 / 3.0 + 0.0) / 3.0, 1e-12);
  EXPECT_NEAR(mean_iou(mixed, gt3), 0.4444, 1e-4);
}

TEST(MomentMetrics, Monotonicity) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    MomentGroundTruth gt;
    MomentPredictions pred;
    for (int q = 0; q < 10; ++q) {
      const auto id = "q" + std::to_string(q);
      const double s = rng.uniform(0, 50);
      gt[id] = MomentWindow(s, s + rng.uniform(1, 20));
      const int n = static_cast<int>(rng.uniform_index(5));
      for (int i = 0; i < n; ++i) {
        const double ps = rng.uniform(0, 60);
        pred[id].emplace_back(ps, ps + rng.uniform(1, 20), 1.0 - 0.1 * i);
      }
    }
    for (int k = 1; k < 5; ++k) {
      EXPECT_LE(moment_recall(pred, gt, 0.5, k), moment_recall(pred, gt, 0.5, k + 1));
    }
    for (double t : {0.1, 0.3, 0.5, 0.7}) {
      EXPECT_GE(moment_recall(pred, gt, t, 3), moment_recall(pred, gt, t + 0.2, 3));
    }
    const double m = mean_iou(pred, gt);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
  }
}

TEST(Report, CsvShapes) {
  EXPECT_EQ(emit_report({}, ReportFormat::kCsv), "task,metric,k,threshold,value\n");
  EXPECT_EQ(emit_report({{"t2v", "recall", 1, std::nullopt, 0.5}}, ReportFormat::kCsv),
            "task,metric,k,threshold,value\nt2v,recall,1,,0.5\n");
  EXPECT_EQ(emit_report({{"moment", "miou", std::nullopt, std::nullopt, 0.1}}, ReportFormat::kCsv),
            "task,metric,k,threshold,value\nmoment,miou,,,0.1\n");
}

TEST(Report, JsonAndCsvAgree) {
  Rng rng(3);
  std::vector<MetricValue> ms;
  for (int i = 0; i < 20; ++i) {
    MetricValue m{"moment", i % 2 ? "recall" : "miou", std::nullopt, std::nullopt, rng.uniform01()};
    if (i % 3) m.k = i;
    if (i % 4) m.threshold = rng.uniform01();
    ms.push_back(m);
  }
  const auto csv = parse_report(emit_report(ms, ReportFormat::kCsv), ReportFormat::kCsv);
  const auto json = parse_report(emit_report(ms, ReportFormat::kJson), ReportFormat::kJson);
  EXPECT_EQ(csv, ms);
  EXPECT_EQ(json, ms);
  EXPECT_EQ(emit_report(ms, ReportFormat::kJson), emit_report(ms, ReportFormat::kJson));
}

TEST(Report, FormatDoubleRoundTrips) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.75), "0.75");
  EXPECT_THROW(parse_report_format("xml"), Error);
}

}  // namespace
}  // namespace vidret
