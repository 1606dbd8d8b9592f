// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_BOX_HPP
#define SOAP_BOX_HPP

#include <Eigen/Core>
#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace soap {

/// LiDAR return. `t` is the offset from the frame's reference time (0 for
/// aggregated clouds).
struct Point {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double t = 0.0;
};

using PointCloud = std::vector<Point>;

/**
 * 7-DOF oriented box with optional planar velocity.
 *
 * `size` holds (w, l, h): the extents along the box-frame x axis (the
 * heading direction at yaw 0), the box-frame y axis and z. A point p is
 * inside when R(-yaw) (p - center) lies in [-w/2,w/2] x [-l/2,l/2] x
 * [-h/2,h/2], boundary included.
 */
struct Box {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  double yaw = 0.0;
  std::optional<Eigen::Vector2d> velocity;
  double score = 1.0;
  std::string label = "car";
  std::optional<std::string> id;

  double volume() const noexcept { return size.prod(); }
  double bottom() const noexcept { return center.z() - 0.5 * size.z(); }
  double top() const noexcept { return center.z() + 0.5 * size.z(); }

  /// Footprint corners in counter-clockwise order.
  std::array<Eigen::Vector2d, 4> footprint() const;

  /// Expresses a world point in the box frame.
  Eigen::Vector3d to_local(const Eigen::Vector3d& p) const;

  bool contains(const Eigen::Vector3d& p) const;
};

/// Maps an angle into (-pi, pi].
double normalize_angle(double angle) noexcept;

/// Absolute angular difference modulo 2*pi, in [0, pi].
double angular_distance(double a, double b) noexcept;

/// Geometric equality: centers and sizes within `tol`, yaw within `tol`
/// modulo 2*pi. Score, label and velocity are ignored.
bool same_geometry(const Box& a, const Box& b, double tol = 1e-9) noexcept;

/// Throws Errc::invariant_violation when sizes are non-positive, the yaw is
/// outside (-pi, pi], the score is outside [0,1] or any value is non-finite.
void validate_box(const Box& box);

}  // namespace soap

#endif  // SOAP_BOX_HPP
