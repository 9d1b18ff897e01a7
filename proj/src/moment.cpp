// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/moment.hpp"

#include <algorithm>
#include <cmath>

namespace vidret {

void TemporalSignal::validate() const {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "temporal signal is empty");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "temporal signal has NaN/Inf");
  }
  if (!(frame_hop_s > 0.0) || !(duration_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "frame hop and duration must be > 0");
  }
  const double covered = static_cast<double>(values.size()) * frame_hop_s;
  if (std::abs(covered - duration_s) > frame_hop_s * (1.0 + 1e-9)) {
    throw Error(ErrorCode::kInvalidArgument, "frame count * hop differs from duration by > 1 hop");
  }
}

void MomentConfig::validate() const {
  if (!(smooth_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "smooth_sigma must be >= 0");
  if (!std::isfinite(beta)) throw Error(ErrorCode::kInvalidArgument, "beta must be finite");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha in (0, 1]");
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "nms_iou in (0, 1]");
  if (max_windows < 1 || min_window_frames < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_windows and min_window_frames must be >= 1");
  }
}

SignalStats signal_stats(std::span<const double> values) {
  SignalStats st;
  if (values.empty()) return st;
  const double n = static_cast<double>(values.size());
  for (double v : values) st.mean += v;
  st.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.stddev = std::sqrt(ss / n);
  return st;
}

TemporalSignal frame_similarities(const EmbeddingVector& query,
                                  std::span<const EmbeddingVector> frames, double frame_hop_s,
                                  double duration_s) {
  if (frames.empty()) throw Error(ErrorCode::kInvalidArgument, "need at least one frame");
  TemporalSignal signal;
  signal.frame_hop_s = frame_hop_s;
  signal.duration_s = duration_s;
  signal.values.reserve(frames.size());
  for (const auto& f : frames) signal.values.push_back(cosine_similarity(query, f));
  signal.validate();
  return signal;
}

namespace {

// Mirror reflection without repeating the edge sample: x[-1] = x[1].
std::size_t reflect(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * static_cast<long long>(n - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<long long>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

TemporalSignal gaussian_smooth(const TemporalSignal& signal, double sigma) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  if (sigma == 0.0) return signal;

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
    total += kernel[k + radius];
  }
  for (double& w : kernel) w /= total;

  TemporalSignal out = signal;
  const std::size_t n = signal.size();
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      acc += kernel[k + radius] * signal.values[reflect(static_cast<long long>(t) + k, n)];
    }
    out.values[t] = acc;
  }
  return out;
}

std::vector<int> detect_peaks(const TemporalSignal& smoothed, double beta) {
  const auto& s = smoothed.values;
  const int n = static_cast<int>(s.size());
  const auto st = signal_stats(s);
  const double threshold = st.mean + beta * st.stddev;

  std::vector<int> peaks;
  int a = 0;
  while (a < n) {
    int b = a;
    while (b + 1 < n && s[b + 1] == s[a]) ++b;
    // A plateau spanning the whole signal has no neighbour to dominate.
    const bool has_neighbour = a > 0 || b < n - 1;
    const bool left_ok = a == 0 || s[a - 1] < s[a];
    const bool right_ok = b == n - 1 || s[b + 1] < s[b];
    if (has_neighbour && left_ok && right_ok && s[a] >= threshold) {
      peaks.push_back((a + b) / 2);
    }
    a = b + 1;
  }
  return peaks;
}

std::pair<int, int> expand_window(const TemporalSignal& smoothed, int t_p, double alpha) {
  const auto& s = smoothed.values;
  const int n = static_cast<int>(s.size());
  if (t_p < 0 || t_p >= n) {
    throw Error(ErrorCode::kIndexOutOfRange, "peak index " + std::to_string(t_p) + " outside signal");
  }
  const double mu = signal_stats(s).mean;
  const double level = s[t_p] - (1.0 - alpha) * (s[t_p] - mu);
  int left = t_p;
  while (left > 0 && s[left - 1] >= level) --left;
  int right = t_p;
  while (right + 1 < n && s[right + 1] >= level) ++right;
  return {left, right};
}

std::vector<MomentWindow> temporal_nms(std::vector<MomentWindow> windows, double iou_threshold,
                                       int max_keep) {
  std::stable_sort(windows.begin(), windows.end(), [](const MomentWindow& a, const MomentWindow& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.start_s < b.start_s;
  });
  std::vector<MomentWindow> kept;
  for (const auto& w : windows) {
    if (static_cast<int>(kept.size()) >= max_keep) break;
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const MomentWindow& k) {
      return interval_iou(w, k) > iou_threshold;
    });
    if (!overlaps) kept.push_back(w);
  }
  return kept;
}

MomentWindow frames_to_window(const TemporalSignal& signal, int t_left, int t_right, double score) {
  const double start = t_left * signal.frame_hop_s;
  const double end = std::min((t_right + 1) * signal.frame_hop_s, signal.duration_s);
  return MomentWindow(start, end, score);
}

std::vector<MomentWindow> localize_signal(const TemporalSignal& raw, const MomentConfig& cfg) {
  cfg.validate();
  raw.validate();
  const auto smoothed = gaussian_smooth(raw, cfg.smooth_sigma);
  std::vector<MomentWindow> candidates;
  for (int t_p : detect_peaks(smoothed, cfg.beta)) {
    const auto [left, right] = expand_window(smoothed, t_p, cfg.alpha);
    if (right - left + 1 < cfg.min_window_frames) continue;
    if (left * raw.frame_hop_s >= raw.duration_s) continue;
    candidates.push_back(frames_to_window(raw, left, right, smoothed.values[t_p]));
  }
  return temporal_nms(std::move(candidates), cfg.nms_iou, cfg.max_windows);
}

std::vector<MomentWindow> localize(const EmbeddingVector& query,
                                   std::span<const EmbeddingVector> frames, double frame_hop_s,
                                   double duration_s, const MomentConfig& cfg) {
  return localize_signal(frame_similarities(query, frames, frame_hop_s, duration_s), cfg);
}

}  // namespace vidret
