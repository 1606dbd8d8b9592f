// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/box.hpp"

#include <cmath>

#include "soap/error.hpp"

namespace soap {

std::array<Eigen::Vector2d, 4> Box::footprint() const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double hx = 0.5 * size.x();
  const double hy = 0.5 * size.y();
  const Eigen::Vector2d ctr = center.head<2>();
  const Eigen::Vector2d ax(c * hx, s * hx);
  const Eigen::Vector2d ay(-s * hy, c * hy);
  return {ctr - ax - ay, ctr + ax - ay, ctr + ax + ay, ctr - ax + ay};
}

Eigen::Vector3d Box::to_local(const Eigen::Vector3d& p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const Eigen::Vector3d d = p - center;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

bool Box::contains(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d q = to_local(p);
  return std::abs(q.x()) <= 0.5 * size.x() && std::abs(q.y()) <= 0.5 * size.y() &&
         std::abs(q.z()) <= 0.5 * size.z();
}

double normalize_angle(double angle) noexcept {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (angle > -std::numbers::pi && angle <= std::numbers::pi) return angle;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

double angular_distance(double a, double b) noexcept {
  return std::abs(normalize_angle(a - b));
}

bool same_geometry(const Box& a, const Box& b, double tol) noexcept {
  return (a.center - b.center).cwiseAbs().maxCoeff() <= tol &&
         (a.size - b.size).cwiseAbs().maxCoeff() <= tol && angular_distance(a.yaw, b.yaw) <= tol;
}

void validate_box(const Box& box) {
  if (!box.center.allFinite() || !box.size.allFinite() || !std::isfinite(box.yaw) ||
      !std::isfinite(box.score)) {
    throw Error(Errc::invariant_violation, "box has non-finite values");
  }
  if (box.velocity && !box.velocity->allFinite()) {
    throw Error(Errc::invariant_violation, "box velocity is non-finite");
  }
  if ((box.size.array() <= 0.0).any()) {
    throw Error(Errc::invariant_violation, "box sizes must be strictly positive");
  }
  if (!(box.yaw > -std::numbers::pi && box.yaw <= std::numbers::pi)) {
    throw Error(Errc::invariant_violation, "box yaw must lie in (-pi, pi]");
  }
  if (box.score < 0.0 || box.score > 1.0) {
    throw Error(Errc::invariant_violation, "box score must lie in [0, 1]");
  }
}

}  // namespace soap
