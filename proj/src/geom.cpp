// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/geom.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <tuple>

#include "soap/error.hpp"
#include "soap/polygon.hpp"

namespace soap {

namespace {

// Degenerate clip results below this area are treated as empty.
constexpr double kMinClipArea = 1e-12;

bool canonical_less(const Box& a, const Box& b) {
  return std::tie(a.center.x(), a.center.y(), a.center.z(), a.size.x(), a.size.y(), a.size.z(),
                  a.yaw) < std::tie(b.center.x(), b.center.y(), b.center.z(), b.size.x(),
                                    b.size.y(), b.size.z(), b.yaw);
}

bool identical_footprint(const Box& a, const Box& b) {
  return a.center.x() == b.center.x() && a.center.y() == b.center.y() &&
         a.size.x() == b.size.x() && a.size.y() == b.size.y() &&
         angular_distance(a.yaw, b.yaw) == 0.0;
}

// Footprint intersection with `a` and `b` already in canonical order.
double ordered_intersection(const Box& a, const Box& b) {
  const double reach = 0.5 * (a.size.head<2>().norm() + b.size.head<2>().norm());
  if ((a.center.head<2>() - b.center.head<2>()).norm() > reach) return 0.0;

  // Work relative to a's center to keep the arithmetic well conditioned far
  // from the world origin.
  const Eigen::Vector2d origin = a.center.head<2>();
  auto local_footprint = [&](const Box& box) {
    auto corners = box.footprint();
    std::vector<Eigen::Vector2d> out(corners.begin(), corners.end());
    for (auto& c : out) c -= origin;
    return out;
  };
  const auto pa = local_footprint(a);
  const auto pb = local_footprint(b);
  const double scale = 1.0 + std::max(a.size.head<2>().maxCoeff(), b.size.head<2>().maxCoeff());
  const auto clipped = clip_convex<double>(pa, pb, 1e-12 * scale * scale);
  const double area = signed_area<double>(clipped);
  return area < kMinClipArea ? 0.0 : area;
}

}  // namespace

Box transform_box(const Pose& pose, const Box& box, PoseMode mode) {
  if (!pose.is_planar()) {
    if (mode == PoseMode::strict_planar) {
      throw Error(Errc::non_planar_pose,
                  "box transform requested in strict planar mode with a non-planar pose");
    }
    static std::once_flag warned;
    std::call_once(warned, [] {
      spdlog::warn("transforming boxes with a non-planar pose; yaw uses the z-Euler angle");
    });
  }
  const double heading = pose.yaw();
  Box out = box;
  out.center = pose * box.center;
  out.yaw = normalize_angle(box.yaw + heading);
  if (box.velocity) {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    const Eigen::Vector2d& v = *box.velocity;
    out.velocity = Eigen::Vector2d(c * v.x() - s * v.y(), s * v.x() + c * v.y());
  }
  return out;
}

double bev_intersection_area(const Box& a, const Box& b) {
  if (identical_footprint(a, b)) return a.size.x() * a.size.y();
  return canonical_less(b, a) ? ordered_intersection(b, a) : ordered_intersection(a, b);
}

double bev_iou(const Box& a, const Box& b) {
  if (identical_footprint(a, b)) return 1.0;
  const double inter = bev_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.size.x() * a.size.y() + b.size.x() * b.size.y() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box& a, const Box& b) {
  const double dz = std::min(a.top(), b.top()) - std::max(a.bottom(), b.bottom());
  if (dz <= 0.0) return 0.0;
  if (identical_footprint(a, b) && a.center.z() == b.center.z() && a.size.z() == b.size.z()) {
    return 1.0;
  }
  const double inter = bev_intersection_area(a, b) * dz;
  if (inter <= 0.0) return 0.0;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::size_t points_in_box(std::span<const Point> cloud, const Box& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Eigen::Vector3d half = 0.5 * box.size;
  std::size_t count = 0;
  for (const Point& p : cloud) {
    const Eigen::Vector3d d = p.position - box.center;
    const double x = c * d.x() + s * d.y();
    const double y = -s * d.x() + c * d.y();
    count += (std::abs(x) <= half.x()) & (std::abs(y) <= half.y()) & (std::abs(d.z()) <= half.z());
  }
  return count;
}

bool any_point_in_box(std::span<const Point> cloud, const Box& box) {
  return std::any_of(cloud.begin(), cloud.end(),
                     [&](const Point& p) { return box.contains(p.position); });
}

std::vector<std::size_t> nms_indices(std::span<const Box> boxes, double iou_threshold,
                                     std::size_t limit) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw Error(Errc::invalid_argument, "nms iou_threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return boxes[i].score > boxes[j].score; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (kept.size() >= limit) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return bev_iou(boxes[k], boxes[i]) > iou_threshold;
    });
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

std::vector<Box> nms(std::span<const Box> boxes, double iou_threshold, std::size_t limit) {
  std::vector<Box> out;
  for (std::size_t i : nms_indices(boxes, iou_threshold, limit)) out.push_back(boxes[i]);
  return out;
}

// ---------------------------------------------------------------------------
// BevGrid

std::uint64_t BevGrid::key(std::int64_t ix, std::int64_t iy) noexcept {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
         static_cast<std::uint32_t>(iy);
}

BevGrid::BevGrid(std::span<const Point> cloud, double cell_size)
    : cloud_(cloud), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw Error(Errc::invalid_argument, "grid cell size must be positive");
  std::vector<std::uint64_t> keys(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[i].position;
    keys[i] = key(static_cast<std::int64_t>(std::floor(p.x() / cell_)),
                  static_cast<std::int64_t>(std::floor(p.y() / cell_)));
  }
  order_.resize(cloud.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
  std::size_t begin = 0;
  while (begin < order_.size()) {
    std::size_t end = begin + 1;
    while (end < order_.size() && keys[order_[end]] == keys[order_[begin]]) ++end;
    cells_.emplace(keys[order_[begin]], std::make_pair(static_cast<std::uint32_t>(begin),
                                                       static_cast<std::uint32_t>(end)));
    begin = end;
  }
}

template <typename Visitor>
void BevGrid::visit_candidates(const Box& box, Visitor&& visit) const {
  const auto corners = box.footprint();
  Eigen::Vector2d lo = corners[0];
  Eigen::Vector2d hi = corners[0];
  for (const auto& c : corners) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const auto x0 = static_cast<std::int64_t>(std::floor(lo.x() / cell_));
  const auto x1 = static_cast<std::int64_t>(std::floor(hi.x() / cell_));
  const auto y0 = static_cast<std::int64_t>(std::floor(lo.y() / cell_));
  const auto y1 = static_cast<std::int64_t>(std::floor(hi.y() / cell_));
  for (std::int64_t ix = x0; ix <= x1; ++ix) {
    for (std::int64_t iy = y0; iy <= y1; ++iy) {
      const auto it = cells_.find(key(ix, iy));
      if (it == cells_.end()) continue;
      for (std::uint32_t k = it->second.first; k < it->second.second; ++k) {
        if (!visit(cloud_[order_[k]])) return;
      }
    }
  }
}

std::size_t BevGrid::count_in_box(const Box& box) const {
  std::size_t count = 0;
  visit_candidates(box, [&](const Point& p) {
    count += box.contains(p.position);
    return true;
  });
  return count;
}

bool BevGrid::any_in_box(const Box& box) const {
  bool found = false;
  visit_candidates(box, [&](const Point& p) {
    found = box.contains(p.position);
    return !found;
  });
  return found;
}

}  // namespace soap
