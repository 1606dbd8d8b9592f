// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/scp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "soap/error.hpp"
#include "soap/geom.hpp"
#include "soap/parallel.hpp"

namespace soap {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Smaller root wins so roots are component minima.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("scp/") + stage + ": " + e.detail());
  }
}

}  // namespace

void ScpConfig::validate() const {
  auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!fraction(mu) || !fraction(nms_iou) || !fraction(wbf_iou)) {
    throw Error(Errc::invalid_argument, "mu, nms_iou and wbf_iou must lie in [0, 1]");
  }
  if (eta < 1) throw Error(Errc::invalid_argument, "eta must be at least 1");
}

ScpConfig ScpConfig::for_frame_rate(double hz) {
  ScpConfig cfg;
  cfg.eta = hz >= 5.0 ? 10 : 2;
  return cfg;
}

std::vector<GlobalBox> gather_global(std::span<const FrameRecord> frames,
                                     const FrameBoxes& per_frame_boxes) {
  if (per_frame_boxes.size() != frames.size()) {
    throw Error(Errc::frame_misalignment, "per-frame boxes must align with frames");
  }
  std::vector<GlobalBox> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const Box& b : per_frame_boxes[f]) {
      out.push_back(GlobalBox{frames[f].index, transform_box(frames[f].pose, b)});
    }
  }
  return out;
}

FrameBoxes scatter_local(std::span<const FrameRecord> frames, std::span<const Box> global_boxes) {
  FrameBoxes out(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Pose to_local = frames[f].pose.inverse();
    for (const Box& b : global_boxes) out[f].push_back(transform_box(to_local, b));
  }
  return out;
}

std::vector<std::vector<std::size_t>> link_components(std::span<const Box> boxes,
                                                      double iou_threshold) {
  const std::size_t n = boxes.size();
  if (n == 0) return {};
  // Overlapping footprints have centers closer than the largest diagonal, so
  // a hash grid with that cell size only needs the 3x3 neighbourhood.
  double cell = 0.0;
  for (const Box& b : boxes) cell = std::max(cell, b.size.head<2>().norm());
  auto cell_of = [&](const Box& b) {
    return std::make_pair(static_cast<std::int64_t>(std::floor(b.center.x() / cell)),
                          static_cast<std::int64_t>(std::floor(b.center.y() / cell)));
  };
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(boxes[i])].push_back(i);

  DisjointSet sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [cx, cy] = cell_of(boxes[i]);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({cx + dx, cy + dy});
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          if (j <= i || sets.find(i) == sets.find(j)) continue;
          if (bev_iou(boxes[i], boxes[j]) > iou_threshold) sets.unite(i, j);
        }
      }
    }
  }
  std::vector<std::vector<std::size_t>> components;
  std::unordered_map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    auto [it, inserted] = slot.emplace(root, components.size());
    if (inserted) components.emplace_back();
    components[it->second].push_back(i);
  }
  return components;
}

std::vector<Cluster> cluster_boxes(std::span<const GlobalBox> boxes, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw Error(Errc::invalid_argument, "mu must lie in [0, 1]");
  std::vector<Box> plain;
  plain.reserve(boxes.size());
  for (const auto& g : boxes) plain.push_back(g.box);
  std::vector<Cluster> clusters;
  for (const auto& component : link_components(plain, mu)) {
    Cluster c;
    for (std::size_t i : component) c.members.push_back(boxes[i]);
    clusters.push_back(std::move(c));
  }
  return clusters;
}

std::vector<Cluster> filter_clusters(std::vector<Cluster> clusters, std::size_t eta) {
  if (eta < 1) throw Error(Errc::invalid_argument, "eta must be at least 1");
  std::erase_if(clusters, [&](const Cluster& c) { return c.members.size() < eta; });
  return clusters;
}

Box fuse_members(std::span<const Box> boxes, std::span<const std::int64_t> priority) {
  if (boxes.empty()) throw Error(Errc::invalid_argument, "cannot fuse an empty cluster");
  if (priority.size() != boxes.size()) {
    throw Error(Errc::invalid_argument, "priority must align with boxes");
  }
  if (boxes.size() == 1) return boxes.front();

  double total = 0.0;
  for (const Box& b : boxes) total += b.score;
  if (!(total > 0.0)) throw Error(Errc::zero_total_score, "cluster scores sum to zero");

  std::size_t lead = 0;
  for (std::size_t i = 1; i < boxes.size(); ++i) {
    if (boxes[i].score > boxes[lead].score ||
        (boxes[i].score == boxes[lead].score && priority[i] < priority[lead])) {
      lead = i;
    }
  }

  Box fused;
  fused.center.setZero();
  fused.size.setZero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double velocity_weight = 0.0;
  std::size_t with_velocity = 0;
  std::map<std::string, std::size_t> votes;
  for (const Box& b : boxes) {
    fused.center += b.score * b.center;
    fused.size += b.score * b.size;
    if (b.velocity) {
      velocity += b.score * *b.velocity;
      velocity_weight += b.score;
      ++with_velocity;
    }
    ++votes[b.label];
  }
  fused.center /= total;
  fused.size /= total;
  if (with_velocity > 0) {
    if (velocity_weight > 0.0) {
      fused.velocity = velocity / velocity_weight;
    } else {
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (const Box& b : boxes) {
        if (b.velocity) mean += *b.velocity;
      }
      fused.velocity = mean / static_cast<double>(with_velocity);
    }
  }
  fused.yaw = boxes[lead].yaw;
  fused.score = total / static_cast<double>(boxes.size());

  std::size_t best_votes = 0;
  for (const Box& b : boxes) {
    if (votes[b.label] > best_votes) {
      best_votes = votes[b.label];
      fused.label = b.label;
    }
  }
  return fused;
}

Box fuse_cluster(const Cluster& cluster) {
  std::vector<Box> boxes;
  std::vector<std::int64_t> frames;
  for (const auto& m : cluster.members) {
    boxes.push_back(m.box);
    frames.push_back(m.frame);
  }
  return fuse_members(boxes, frames);
}

ScpResult scp_pipeline(std::span<const FrameRecord> frames, const FrameBoxes& per_frame_boxes,
                       std::span<const PointCloud> per_frame_clouds, const ScpConfig& config,
                       int threads) {
  config.validate();
  if (per_frame_clouds.size() != frames.size()) {
    throw Error(Errc::frame_misalignment, "per-frame clouds must align with frames");
  }
  const auto gathered = with_stage("gather", [&] { return gather_global(frames, per_frame_boxes); });
  auto clusters = with_stage("cluster", [&] { return cluster_boxes(gathered, config.mu); });
  ScpResult result;
  result.clusters_found = clusters.size();
  clusters = with_stage("filter", [&] { return filter_clusters(std::move(clusters), config.eta); });
  result.clusters_kept = clusters.size();
  const auto fused = with_stage("fuse", [&] {
    std::vector<Box> out;
    for (const auto& c : clusters) out.push_back(fuse_cluster(c));
    return out;
  });
  result.global = with_stage("nms", [&] { return nms(fused, config.nms_iou, config.nms_limit); });

  result.per_frame.resize(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t f) {
    const Pose to_local = frames[f].pose.inverse();
    const BevGrid grid(per_frame_clouds[f], 2.0);
    for (const Box& g : result.global) {
      Box local = transform_box(to_local, g);
      if (grid.any_in_box(local)) result.per_frame[f].push_back(std::move(local));
    }
  });
  return result;
}

}  // namespace soap
