// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_EVAL_HPP
#define SOAP_EVAL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soap/aggregate.hpp"
#include "soap/box.hpp"

namespace soap {

enum class MatchMode {
  iou,              // iou_3d >= threshold
  center_distance,  // BEV center distance <= threshold (m)
};

const char* to_string(MatchMode mode) noexcept;
MatchMode match_mode_from_string(const std::string& name);

/// Half-open range [min, max) of BEV distance from the ego origin.
struct RangeBucket {
  std::string name;
  double min = 0.0;
  double max = 0.0;

  bool contains(double range) const noexcept { return range >= min && range < max; }
};

struct MatchConfig {
  MatchMode mode = MatchMode::center_distance;
  std::vector<double> thresholds{0.5, 1.0, 2.0, 4.0};
  std::vector<RangeBucket> buckets{{"0-30m", 0.0, 30.0}, {"30-50m", 30.0, 50.0}};
  /// Level-1 keeps ground truth with more than this many points; Level-2
  /// keeps everything.
  std::size_t level1_min_points = 5;
  bool level2 = false;

  /// Throws Errc::invalid_argument.
  void validate() const;

  static MatchConfig center_distance_map() { return {}; }
  static MatchConfig iou_ap(double threshold = 0.7) {
    MatchConfig cfg;
    cfg.mode = MatchMode::iou;
    cfg.thresholds = {threshold};
    return cfg;
  }
};

/// Ground-truth box with its in-box point count. Ignored boxes neither count
/// as positives nor turn the predictions they absorb into false positives.
struct GroundTruthBox {
  Box box;
  std::size_t points = 0;
  bool ignore = false;
};

using EvalGroundTruth = std::vector<std::vector<GroundTruthBox>>;

/// One point per distinct score, predictions with equal scores grouped.
struct PrCurve {
  std::vector<double> precision;
  std::vector<double> recall;
};

/// Area under the 101-point interpolated curve: mean over r = 0, 0.01, ..., 1
/// of the best precision at recall >= r.
double interpolated_ap(const PrCurve& curve);

struct ThresholdResult {
  double threshold = 0.0;
  std::optional<double> ap;  // absent without positives
  PrCurve curve;
  std::size_t positives = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
};

struct MatchResult {
  std::vector<ThresholdResult> per_threshold;
  std::optional<double> mean_ap;  // absent without positives
};

/**
 * Greedy per-frame matching in descending score order. A prediction takes
 * the nearest (center mode) or highest-IoU (IoU mode) unmatched counted
 * ground truth within the threshold, else the same among ignored ground
 * truth, in which case it is dropped. Unmatched predictions are false
 * positives.
 */
MatchResult match_and_score(const FrameBoxes& predictions, const EvalGroundTruth& ground_truth,
                            MatchMode mode, std::span<const double> thresholds,
                            int threads = 1);

struct BucketMetrics {
  std::string name;
  std::optional<double> mean_ap;
  std::vector<std::optional<double>> ap;  // per threshold
  std::size_t positives = 0;
};

struct EvalReport {
  MatchMode mode = MatchMode::center_distance;
  std::vector<double> thresholds;
  std::string level;  // "level1" or "level2"
  std::vector<BucketMetrics> buckets;  // "overall" first

  const BucketMetrics* find(const std::string& name) const;
};

/**
 * Overall plus per-range metrics. For a range bucket, ground truth outside
 * the bucket is ignored and unmatched predictions outside it are dropped.
 * Level-1 additionally ignores ground truth with too few points.
 */
EvalReport bucket_report(const FrameBoxes& predictions, const EvalGroundTruth& ground_truth,
                         const MatchConfig& config, int threads = 1);

/// Aligned-column text rendering.
std::string format_table(const EvalReport& report);

double bev_range(const Box& box) noexcept;

}  // namespace soap

#endif  // SOAP_EVAL_HPP
