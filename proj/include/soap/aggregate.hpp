// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_AGGREGATE_HPP
#define SOAP_AGGREGATE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soap/box.hpp"
#include "soap/pose.hpp"

namespace soap {

/// One frame of a sequence. `pose` maps the frame's local coordinates into
/// the global frame.
struct FrameRecord {
  std::int64_t index = 0;
  double timestamp = 0.0;
  Pose pose;
  std::string cloud_ref;
  std::string sequence_id;
};

/// Per-frame box lists, aligned with a frame list by position.
using FrameBoxes = std::vector<std::vector<Box>>;

/// Global-frame point cloud built from a whole sequence.
struct AggregatedCloud {
  PointCloud points;
  std::string source_sequence;
  double voxel_size = 0.0;
  std::size_t point_budget = 0;
  std::vector<std::int64_t> frame_indices;  // sorted
};

/// Resolves a frame's cloud. Throws Errc::missing_cloud when it cannot.
using CloudLoader = std::function<PointCloud(const FrameRecord&)>;

struct AggregateOptions {
  double voxel_size = 0.0325;
  std::size_t point_budget = 1'000'000;
  double z_offset = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Axis-aligned crop region, bounds inclusive.
struct CropBox {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(-75.0);
  Eigen::Vector3d max = Eigen::Vector3d::Constant(75.0);

  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/**
 * Shifts each local point by (0, 0, z_offset), maps it to the global frame,
 * concatenates every frame, voxel-downsamples, then draws a uniform
 * seeded subset when more than `point_budget` points remain.
 */
AggregatedCloud aggregate_sequence(std::span<const FrameRecord> frames, const CloudLoader& loader,
                                   const AggregateOptions& options);

/// Expresses the aggregated cloud in `frame`'s local coordinates.
PointCloud localize(const AggregatedCloud& aggregated, const FrameRecord& frame,
                    const std::optional<CropBox>& crop = std::nullopt);

/**
 * One centroid per occupied voxel floor(p / voxel_size), emitted in
 * ascending lexicographic voxel order. Centroids are clamped to the extent
 * of their voxel's points, which makes the operation idempotent.
 */
PointCloud voxel_downsample(std::span<const Point> cloud, double voxel_size);

/// Uniform sample without replacement of `budget` points, original order kept.
PointCloud subsample(std::span<const Point> cloud, std::size_t budget, std::uint64_t seed);

}  // namespace soap

#endif  // SOAP_AGGREGATE_HPP
