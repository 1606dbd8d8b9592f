// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/aggregate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "soap/error.hpp"
#include "soap/parallel.hpp"

namespace soap {

namespace {

struct VoxelEntry {
  std::array<std::int32_t, 3> key;
  std::uint32_t seq;  // insertion order, fixes the summation order per voxel
  Eigen::Vector3d position;
};

VoxelEntry make_entry(const Eigen::Vector3d& p, double voxel_size, std::uint32_t seq) {
  // Division (not multiplication by the reciprocal) so keys match floor(p / voxel) exactly.
  auto coord = [&](double v) {
    const double k = std::floor(v / voxel_size);
    if (!(k >= std::numeric_limits<std::int32_t>::min() &&
          k <= std::numeric_limits<std::int32_t>::max())) {
      throw Error(Errc::invalid_argument, "point coordinate out of voxel index range");
    }
    return static_cast<std::int32_t>(k);
  };
  return VoxelEntry{{coord(p.x()), coord(p.y()), coord(p.z())}, seq, p};
}

PointCloud reduce_entries(std::vector<VoxelEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const VoxelEntry& a, const VoxelEntry& b) {
    return std::tie(a.key, a.seq) < std::tie(b.key, b.seq);
  });
  PointCloud out;
  std::size_t begin = 0;
  while (begin < entries.size()) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d lo = entries[begin].position;
    Eigen::Vector3d hi = lo;
    std::size_t end = begin;
    for (; end < entries.size() && entries[end].key == entries[begin].key; ++end) {
      const auto& p = entries[end].position;
      sum += p;
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector3d centroid = (sum / static_cast<double>(end - begin)).cwiseMax(lo).cwiseMin(hi);
    out.push_back(Point{centroid, 0.0});
    begin = end;
  }
  return out;
}

void check_seq_capacity(std::size_t n) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::invalid_argument, "too many points for voxel downsampling");
  }
}

}  // namespace

PointCloud voxel_downsample(std::span<const Point> cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw Error(Errc::invalid_argument, "voxel_size must be positive");
  check_seq_capacity(cloud.size());
  std::vector<VoxelEntry> entries;
  entries.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    entries.push_back(make_entry(cloud[i].position, voxel_size, static_cast<std::uint32_t>(i)));
  }
  return reduce_entries(entries);
}

PointCloud subsample(std::span<const Point> cloud, std::size_t budget, std::uint64_t seed) {
  if (cloud.size() <= budget) return PointCloud(cloud.begin(), cloud.end());
  check_seq_capacity(cloud.size());
  std::vector<std::uint32_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `budget` slots end up a uniform sample.
  for (std::size_t i = 0; i < budget; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(budget);
  std::sort(idx.begin(), idx.end());
  PointCloud out;
  out.reserve(budget);
  for (std::uint32_t i : idx) out.push_back(cloud[i]);
  return out;
}

AggregatedCloud aggregate_sequence(std::span<const FrameRecord> frames, const CloudLoader& loader,
                                   const AggregateOptions& options) {
  if (frames.empty()) throw Error(Errc::empty_sequence, "aggregation needs at least one frame");
  if (!(options.voxel_size > 0.0)) {
    throw Error(Errc::invalid_argument, "voxel_size must be positive");
  }
  if (options.point_budget == 0) {
    throw Error(Errc::invalid_argument, "point_budget must be positive");
  }
  const Eigen::Vector3d offset(0.0, 0.0, options.z_offset);
  const std::size_t batch = static_cast<std::size_t>(std::max(options.threads, 1));

  std::vector<VoxelEntry> entries;
  std::uint64_t seq = 0;
  for (std::size_t first = 0; first < frames.size(); first += batch) {
    const std::size_t count = std::min(batch, frames.size() - first);
    std::vector<std::vector<Eigen::Vector3d>> global(count);
    parallel_for(count, options.threads, [&](std::size_t k) {
      const FrameRecord& frame = frames[first + k];
      const PointCloud cloud = loader(frame);
      auto& out = global[k];
      out.reserve(cloud.size());
      for (const Point& p : cloud) out.push_back(frame.pose * (p.position + offset));
    });
    for (auto& pts : global) {
      check_seq_capacity(seq + pts.size());
      // Frames are usually of similar size; sizing once avoids doubling a
      // vector of this many entries.
      if (entries.capacity() == 0) entries.reserve(pts.size() * frames.size());
      for (const auto& p : pts) {
        entries.push_back(make_entry(p, options.voxel_size, static_cast<std::uint32_t>(seq++)));
      }
      std::vector<Eigen::Vector3d>().swap(pts);
    }
  }

  AggregatedCloud out;
  out.points = reduce_entries(entries);
  std::vector<VoxelEntry>().swap(entries);
  if (out.points.size() > options.point_budget) {
    out.points = subsample(out.points, options.point_budget, options.seed);
  }
  out.source_sequence = frames.front().sequence_id;
  out.voxel_size = options.voxel_size;
  out.point_budget = options.point_budget;
  for (const auto& f : frames) out.frame_indices.push_back(f.index);
  std::sort(out.frame_indices.begin(), out.frame_indices.end());
  return out;
}

PointCloud localize(const AggregatedCloud& aggregated, const FrameRecord& frame,
                    const std::optional<CropBox>& crop) {
  if (frame.sequence_id != aggregated.source_sequence ||
      !std::binary_search(aggregated.frame_indices.begin(), aggregated.frame_indices.end(),
                          frame.index)) {
    throw Error(Errc::frame_sequence_mismatch,
                "frame " + std::to_string(frame.index) + " of sequence '" + frame.sequence_id +
                    "' is not part of aggregated sequence '" + aggregated.source_sequence + "'");
  }
  const Pose to_local = frame.pose.inverse();
  PointCloud out;
  out.reserve(aggregated.points.size());
  for (const Point& p : aggregated.points) {
    const Eigen::Vector3d q = to_local * p.position;
    if (!crop || crop->contains(q)) out.push_back(Point{q, 0.0});
  }
  return out;
}

}  // namespace soap
