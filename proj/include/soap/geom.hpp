// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_GEOM_HPP
#define SOAP_GEOM_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "soap/box.hpp"
#include "soap/pose.hpp"

namespace soap {

inline Point transform_point(const Pose& pose, const Point& p) {
  return Point{pose * p.position, p.t};
}

enum class PoseMode {
  /// Rejects poses with roll or pitch (Errc::non_planar_pose).
  strict_planar,
  /// Composes yaw with the pose's z-Euler angle; logs non-planar poses.
  general,
};

/// Moves a box by `pose`: center as a point, yaw plus the pose heading,
/// velocity rotated by the planar part of the rotation.
Box transform_box(const Pose& pose, const Box& box, PoseMode mode = PoseMode::general);

/// Bird's-eye-view IoU of the two yaw-rotated footprints. Exactly symmetric.
double bev_iou(const Box& a, const Box& b);

/// Footprint intersection area in m^2.
double bev_intersection_area(const Box& a, const Box& b);

/// Volumetric IoU: footprint intersection times vertical overlap over union.
double iou_3d(const Box& a, const Box& b);

std::size_t points_in_box(std::span<const Point> cloud, const Box& box);

bool any_point_in_box(std::span<const Point> cloud, const Box& box);

/**
 * Greedy non-maximum suppression on bev_iou. A box is dropped when its IoU
 * with an already kept box exceeds `iou_threshold`. Output is sorted by
 * descending score, equal scores keeping insertion order, and truncated to
 * `limit`.
 */
std::vector<Box> nms(std::span<const Box> boxes, double iou_threshold,
                     std::size_t limit = std::numeric_limits<std::size_t>::max());

/// Same as nms() but returns indices into `boxes`.
std::vector<std::size_t> nms_indices(std::span<const Box> boxes, double iou_threshold,
                                     std::size_t limit = std::numeric_limits<std::size_t>::max());

/// Uniform BEV grid over a point cloud for fast box-count queries.
class BevGrid {
 public:
  BevGrid(std::span<const Point> cloud, double cell_size);

  std::size_t count_in_box(const Box& box) const;
  bool any_in_box(const Box& box) const;

 private:
  template <typename Visitor>
  void visit_candidates(const Box& box, Visitor&& visit) const;

  static std::uint64_t key(std::int64_t ix, std::int64_t iy) noexcept;

  std::span<const Point> cloud_;
  double cell_;
  std::vector<std::uint32_t> order_;
  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> cells_;
};

}  // namespace soap

#endif  // SOAP_GEOM_HPP
