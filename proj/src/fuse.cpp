// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/fuse.hpp"

#include <algorithm>
#include <numeric>

#include "soap/error.hpp"
#include "soap/geom.hpp"
#include "soap/parallel.hpp"
#include "soap/scp.hpp"

namespace soap {

std::vector<Box> wbf_merge(std::span<const Box> a_boxes, std::span<const Box> b_boxes,
                           double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw Error(Errc::invalid_argument, "wbf iou_threshold must lie in [0, 1]");
  }
  std::vector<Box> pooled(a_boxes.begin(), a_boxes.end());
  pooled.insert(pooled.end(), b_boxes.begin(), b_boxes.end());
  std::vector<std::int64_t> source(pooled.size(), 1);
  std::fill(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(a_boxes.size()), 0);

  std::vector<Box> out;
  for (const auto& component : link_components(pooled, iou_threshold)) {
    std::vector<Box> members;
    std::vector<std::int64_t> priority;
    for (std::size_t i : component) {
      members.push_back(pooled[i]);
      priority.push_back(source[i]);
    }
    out.push_back(fuse_members(members, priority));
  }
  return out;
}

FrameBoxes soap_pseudo_labels(const FrameBoxes& detector_frames, const FrameBoxes& scp_frames,
                              const SourceCalibration& maps, double iou_threshold, int threads) {
  if (detector_frames.size() != scp_frames.size()) {
    throw Error(Errc::frame_misalignment, "detector and SCP boxes cover different frame counts");
  }
  FrameBoxes out(detector_frames.size());
  parallel_for(out.size(), threads, [&](std::size_t f) {
    const auto scp = apply_calibration(maps.scp, scp_frames[f]);
    const auto det = apply_calibration(maps.detector, detector_frames[f]);
    out[f] = wbf_merge(scp, det, iou_threshold);
  });
  return out;
}

std::vector<CalibrationSample> calibration_samples(const FrameBoxes& predictions,
                                                   const FrameBoxes& ground_truth,
                                                   double iou_threshold) {
  if (predictions.size() != ground_truth.size()) {
    throw Error(Errc::frame_misalignment, "predictions and ground truth cover different frames");
  }
  std::vector<CalibrationSample> samples;
  for (std::size_t f = 0; f < predictions.size(); ++f) {
    const auto& pred = predictions[f];
    const auto& gt = ground_truth[f];
    std::vector<std::size_t> order(pred.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return pred[l].score > pred[r].score; });
    std::vector<bool> taken(gt.size(), false);
    for (std::size_t i : order) {
      double best = -1.0;
      std::size_t best_j = gt.size();
      for (std::size_t j = 0; j < gt.size(); ++j) {
        if (taken[j]) continue;
        const double iou = bev_iou(pred[i], gt[j]);
        if (iou > best) {
          best = iou;
          best_j = j;
        }
      }
      const bool hit = best_j < gt.size() && best >= iou_threshold;
      if (hit) taken[best_j] = true;
      samples.push_back(CalibrationSample{pred[i].score, hit});
    }
  }
  return samples;
}

}  // namespace soap
