// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_SCP_HPP
#define SOAP_SCP_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "soap/aggregate.hpp"
#include "soap/box.hpp"

namespace soap {

/// Spatial-consistency parameters: IoU link threshold `mu`, minimum cluster
/// support `eta`, and the post-fusion NMS settings.
struct ScpConfig {
  double mu = 0.5;
  std::size_t eta = 10;
  double nms_iou = 0.5;
  double wbf_iou = 0.5;
  std::size_t nms_limit = std::numeric_limits<std::size_t>::max();

  void validate() const;

  /// eta = 10 for >= 5 Hz sequences, 2 otherwise.
  static ScpConfig for_frame_rate(double hz);
};

/// A prediction moved to the global frame, tagged with its source frame.
struct GlobalBox {
  std::int64_t frame = 0;
  Box box;
};

struct Cluster {
  std::vector<GlobalBox> members;
};

std::vector<GlobalBox> gather_global(std::span<const FrameRecord> frames,
                                     const FrameBoxes& per_frame_boxes);

/// Back-projects global boxes into every frame (no pruning).
FrameBoxes scatter_local(std::span<const FrameRecord> frames, std::span<const Box> global_boxes);

/**
 * Connected components of the graph linking pairs with bev_iou > threshold.
 * Components are ordered by their smallest member index and list members
 * in ascending index order.
 */
std::vector<std::vector<std::size_t>> link_components(std::span<const Box> boxes,
                                                      double iou_threshold);

std::vector<Cluster> cluster_boxes(std::span<const GlobalBox> boxes, double mu);

/// Drops clusters with fewer than `eta` members.
std::vector<Cluster> filter_clusters(std::vector<Cluster> clusters, std::size_t eta);

/**
 * Confidence-weighted fusion: heading of the most confident member (ties to
 * the lowest `priority`, then the earliest member), score-weighted center,
 * size and velocity, arithmetic-mean score and majority label. A single
 * member is returned unchanged. Throws Errc::zero_total_score.
 */
Box fuse_members(std::span<const Box> boxes, std::span<const std::int64_t> priority);

Box fuse_cluster(const Cluster& cluster);

struct ScpResult {
  FrameBoxes per_frame;     // B_SCP^i, local frames
  std::vector<Box> global;  // B_SCP, after NMS
  std::size_t clusters_found = 0;
  std::size_t clusters_kept = 0;
};

/**
 * gather -> cluster(mu) -> filter(eta) -> fuse -> NMS -> back-project ->
 * drop boxes that contain no point of their frame's cloud.
 */
ScpResult scp_pipeline(std::span<const FrameRecord> frames, const FrameBoxes& per_frame_boxes,
                       std::span<const PointCloud> per_frame_clouds, const ScpConfig& config,
                       int threads = 1);

}  // namespace soap

#endif  // SOAP_SCP_HPP
