// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "soap/error.hpp"
#include "soap/geom.hpp"
#include "soap/parallel.hpp"

namespace soap {

namespace {

// Outcome of one prediction at one threshold.
struct Scored {
  double score;
  bool tp;
};

using PredictionFilter = std::function<bool(const Box&)>;

// Predictions surviving matching (TPs and FPs), in per-frame score order.
std::vector<Scored> match_frame(const std::vector<Box>& predictions,
                                const std::vector<GroundTruthBox>& gt, MatchMode mode,
                                double threshold, const PredictionFilter& keep_unmatched) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return predictions[l].score > predictions[r].score;
  });
  std::vector<bool> taken(gt.size(), false);
  std::vector<Scored> out;

  // Best unmatched ground truth with the given ignore flag, or gt.size().
  auto best_match = [&](const Box& p, bool ignored) {
    std::size_t best = gt.size();
    double best_value = 0.0;
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (taken[j] || gt[j].ignore != ignored) continue;
      if (mode == MatchMode::center_distance) {
        const double d = (p.center.head<2>() - gt[j].box.center.head<2>()).norm();
        if (d <= threshold && (best == gt.size() || d < best_value)) {
          best = j;
          best_value = d;
        }
      } else {
        const double iou = iou_3d(p, gt[j].box);
        if (iou >= threshold && (best == gt.size() || iou > best_value)) {
          best = j;
          best_value = iou;
        }
      }
    }
    return best;
  };

  for (std::size_t i : order) {
    const Box& p = predictions[i];
    std::size_t j = best_match(p, false);
    if (j < gt.size()) {
      taken[j] = true;
      out.push_back({p.score, true});
      continue;
    }
    j = best_match(p, true);
    if (j < gt.size()) {
      taken[j] = true;
      continue;
    }
    if (keep_unmatched(p)) out.push_back({p.score, false});
  }
  return out;
}

ThresholdResult score_threshold(std::vector<Scored> outcomes, std::size_t positives,
                                double threshold) {
  ThresholdResult r;
  r.threshold = threshold;
  r.positives = positives;
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const Scored& l, const Scored& r) { return l.score > r.score; });
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < outcomes.size();) {
    std::size_t k = i;
    for (; k < outcomes.size() && outcomes[k].score == outcomes[i].score; ++k) {
      (outcomes[k].tp ? tp : fp) += 1;
    }
    r.curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    r.curve.recall.push_back(positives == 0 ? 0.0
                                            : static_cast<double>(tp) / static_cast<double>(positives));
    i = k;
  }
  r.true_positives = tp;
  r.false_positives = fp;
  if (positives > 0) r.ap = interpolated_ap(r.curve);
  return r;
}

MatchResult match_filtered(const FrameBoxes& predictions, const EvalGroundTruth& ground_truth,
                           MatchMode mode, std::span<const double> thresholds,
                           const PredictionFilter& keep_unmatched, int threads) {
  if (predictions.size() != ground_truth.size()) {
    throw Error(Errc::frame_misalignment, "predictions and ground truth cover different frames");
  }
  std::size_t positives = 0;
  for (const auto& frame : ground_truth) {
    for (const auto& g : frame) positives += g.ignore ? 0 : 1;
  }
  MatchResult result;
  std::vector<double> aps;
  for (double threshold : thresholds) {
    std::vector<std::vector<Scored>> per_frame(predictions.size());
    parallel_for(predictions.size(), threads, [&](std::size_t f) {
      per_frame[f] = match_frame(predictions[f], ground_truth[f], mode, threshold, keep_unmatched);
    });
    std::vector<Scored> all;
    for (auto& v : per_frame) all.insert(all.end(), v.begin(), v.end());
    result.per_threshold.push_back(score_threshold(std::move(all), positives, threshold));
    if (result.per_threshold.back().ap) aps.push_back(*result.per_threshold.back().ap);
  }
  if (positives > 0 && !aps.empty()) {
    result.mean_ap = std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
  }
  return result;
}

}  // namespace

const char* to_string(MatchMode mode) noexcept {
  return mode == MatchMode::iou ? "iou" : "center-distance";
}

MatchMode match_mode_from_string(const std::string& name) {
  if (name == "iou") return MatchMode::iou;
  if (name == "center-distance") return MatchMode::center_distance;
  throw Error(Errc::invalid_argument, "unknown match mode '" + name + "'");
}

void MatchConfig::validate() const {
  if (thresholds.empty()) throw Error(Errc::invalid_argument, "match thresholds are empty");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error(Errc::invalid_argument, "match thresholds must be sorted");
  }
  for (double t : thresholds) {
    if (!(t >= 0.0) || (mode == MatchMode::iou && t > 1.0)) {
      throw Error(Errc::invalid_argument, "match threshold out of range");
    }
  }
  for (const auto& b : buckets) {
    if (!(b.min >= 0.0 && b.max > b.min)) {
      throw Error(Errc::invalid_argument, "range bucket '" + b.name + "' is empty or negative");
    }
  }
}

double interpolated_ap(const PrCurve& curve) {
  // Running maximum of precision from the high-recall end.
  std::vector<double> envelope(curve.precision);
  for (std::size_t i = envelope.size(); i-- > 1;) {
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  }
  double sum = 0.0;
  std::size_t k = 0;
  for (int step = 0; step <= 100; ++step) {
    const double r = static_cast<double>(step) / 100.0;
    while (k < curve.recall.size() && curve.recall[k] < r - 1e-12) ++k;
    if (k == curve.recall.size()) break;
    sum += envelope[k];
  }
  return sum / 101.0;
}

MatchResult match_and_score(const FrameBoxes& predictions, const EvalGroundTruth& ground_truth,
                            MatchMode mode, std::span<const double> thresholds, int threads) {
  return match_filtered(predictions, ground_truth, mode, thresholds,
                        [](const Box&) { return true; }, threads);
}

double bev_range(const Box& box) noexcept { return box.center.head<2>().norm(); }

const BucketMetrics* EvalReport::find(const std::string& name) const {
  for (const auto& b : buckets) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

EvalReport bucket_report(const FrameBoxes& predictions, const EvalGroundTruth& ground_truth,
                         const MatchConfig& config, int threads) {
  config.validate();
  EvalReport report;
  report.mode = config.mode;
  report.thresholds = config.thresholds;
  report.level = config.level2 ? "level2" : "level1";

  EvalGroundTruth leveled = ground_truth;
  if (!config.level2) {
    for (auto& frame : leveled) {
      for (auto& g : frame) g.ignore = g.ignore || g.points <= config.level1_min_points;
    }
  }

  auto run = [&](const std::string& name, const EvalGroundTruth& gt, const PredictionFilter& keep) {
    const MatchResult r = match_filtered(predictions, gt, config.mode, config.thresholds, keep, threads);
    BucketMetrics m;
    m.name = name;
    m.mean_ap = r.mean_ap;
    for (const auto& t : r.per_threshold) m.ap.push_back(t.ap);
    m.positives = r.per_threshold.empty() ? 0 : r.per_threshold.front().positives;
    report.buckets.push_back(std::move(m));
  };

  run("overall", leveled, [](const Box&) { return true; });
  for (const auto& bucket : config.buckets) {
    EvalGroundTruth gt = leveled;
    for (auto& frame : gt) {
      for (auto& g : frame) g.ignore = g.ignore || !bucket.contains(bev_range(g.box));
    }
    run(bucket.name, gt, [&](const Box& p) { return bucket.contains(bev_range(p)); });
  }
  return report;
}

std::string format_table(const EvalReport& report) {
  std::vector<std::string> header{"bucket", "gt", "mAP"};
  for (double t : report.thresholds) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "AP@%g", t);
    header.emplace_back(buf);
  }
  std::vector<std::vector<std::string>> rows{header};
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  for (const auto& b : report.buckets) {
    std::vector<std::string> row{b.name, std::to_string(b.positives), cell(b.mean_ap)};
    for (const auto& ap : b.ap) row.push_back(cell(ap));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  out << "metric: " << to_string(report.mode) << "  level: " << report.level << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace soap
