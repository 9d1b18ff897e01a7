// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file moment.hpp
 *  \brief Zero-shot temporal localization from per-frame similarities.
 *
 * Pipeline: s(t) = cos(query, frame_t) -> Gaussian smoothing -> peaks above
 * mu + beta * sd -> expansion while s >= s(t_p) - (1 - alpha)(s(t_p) - mu)
 * -> greedy temporal NMS. mu and sd are the mean and population standard
 * deviation of the smoothed signal.
 */

#include <span>
#include <utility>
#include <vector>

#include "vidret/core.hpp"

namespace vidret {

struct TemporalSignal {
  std::vector<double> values;
  double frame_hop_s = 1.0;
  double duration_s = 1.0;

  std::size_t size() const noexcept { return values.size(); }
  /// Throws kInvalidArgument when empty, non-finite, or hop/duration are
  /// inconsistent (|T * hop - duration| > hop).
  void validate() const;
};

struct MomentConfig {
  double smooth_sigma = 2.0;
  double beta = 0.5;
  double alpha = 0.6;
  double nms_iou = 0.5;
  int max_windows = 5;
  int min_window_frames = 1;

  void validate() const;
};

struct SignalStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

SignalStats signal_stats(std::span<const double> values);

TemporalSignal frame_similarities(const EmbeddingVector& query,
                                  std::span<const EmbeddingVector> frames, double frame_hop_s,
                                  double duration_s);

/// Normalized Gaussian kernel of radius ceil(3 sigma), mirror-reflected at
/// the edges. sigma == 0 returns the input unchanged.
TemporalSignal gaussian_smooth(const TemporalSignal& signal, double sigma);

/// Indices of strict local maxima (plateaus report their left-biased
/// center) whose value is >= mu + beta * sd, ascending.
std::vector<int> detect_peaks(const TemporalSignal& smoothed, double beta);

/// Inclusive frame bounds around peak t_p. Throws kIndexOutOfRange.
std::pair<int, int> expand_window(const TemporalSignal& smoothed, int t_p, double alpha);

/// Greedy suppression: score descending (ties: earlier start), keep when IoU
/// with every kept window is <= iou_threshold, stop after max_keep.
std::vector<MomentWindow> temporal_nms(std::vector<MomentWindow> windows, double iou_threshold,
                                       int max_keep);

/// Frame window [t_left, t_right] to seconds [t_left*hop, (t_right+1)*hop],
/// end clamped to duration.
MomentWindow frames_to_window(const TemporalSignal& signal, int t_left, int t_right, double score);

std::vector<MomentWindow> localize_signal(const TemporalSignal& raw, const MomentConfig& cfg);

std::vector<MomentWindow> localize(const EmbeddingVector& query,
                                   std::span<const EmbeddingVector> frames, double frame_hop_s,
                                   double duration_s, const MomentConfig& cfg);

}  // namespace vidret
