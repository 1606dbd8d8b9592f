// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_FUSE_HPP
#define SOAP_FUSE_HPP

#include <span>
#include <vector>

#include "soap/aggregate.hpp"
#include "soap/box.hpp"
#include "soap/calibration.hpp"

namespace soap {

/**
 * Pools both lists, links pairs with bev_iou > iou_threshold into connected
 * components and fuses each component like an SCP cluster. Boxes from `a`
 * win heading ties. Singletons pass through unchanged.
 */
std::vector<Box> wbf_merge(std::span<const Box> a_boxes, std::span<const Box> b_boxes,
                           double iou_threshold);

struct SourceCalibration {
  CalibrationMap detector;
  CalibrationMap scp;
};

/// Calibrates each source with its own map and merges them frame by frame.
FrameBoxes soap_pseudo_labels(const FrameBoxes& detector_frames, const FrameBoxes& scp_frames,
                              const SourceCalibration& maps, double iou_threshold,
                              int threads = 1);

/**
 * Correctness labels for calibration: per frame, predictions in descending
 * score order greedily claim the unmatched ground-truth box of highest BEV
 * IoU; a claim needs IoU >= iou_threshold.
 */
std::vector<CalibrationSample> calibration_samples(const FrameBoxes& predictions,
                                                   const FrameBoxes& ground_truth,
                                                   double iou_threshold = 0.5);

}  // namespace soap

#endif  // SOAP_FUSE_HPP
