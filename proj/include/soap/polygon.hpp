// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_POLYGON_HPP
#define SOAP_POLYGON_HPP

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <vector>

namespace soap {

template <typename Scalar>
using Polygon2 = std::vector<Eigen::Matrix<Scalar, 2, 1>>;

/// Signed shoelace area; positive for counter-clockwise vertex order.
template <typename Scalar>
Scalar signed_area(std::span<const Eigen::Matrix<Scalar, 2, 1>> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return Scalar(0);
  Scalar twice = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return Scalar(0.5) * twice;
}

/**
 * Sutherland-Hodgman clipping of `subject` against the convex,
 * counter-clockwise polygon `clip`. Vertices within `eps` of a clip edge
 * count as inside.
 */
template <typename Scalar>
Polygon2<Scalar> clip_convex(std::span<const Eigen::Matrix<Scalar, 2, 1>> subject,
                             std::span<const Eigen::Matrix<Scalar, 2, 1>> clip,
                             Scalar eps = Scalar(0)) {
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  Polygon2<Scalar> out(subject.begin(), subject.end());
  Polygon2<Scalar> in;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec& a = clip[e];
    const Vec edge = clip[(e + 1) % m] - a;
    auto side = [&](const Vec& p) {
      const Vec d = p - a;
      return edge.x() * d.y() - edge.y() * d.x();
    };
    in.swap(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& cur = in[i];
      const Vec& prev = in[(i + n - 1) % n];
      const Scalar dc = side(cur);
      const Scalar dp = side(prev);
      const bool cur_in = dc >= -eps;
      const bool prev_in = dp >= -eps;
      if (cur_in != prev_in) {
        const Scalar t = dp / (dp - dc);
        out.push_back(prev + t * (cur - prev));
      }
      if (cur_in) out.push_back(cur);
    }
  }
  return out;
}

}  // namespace soap

#endif  // SOAP_POLYGON_HPP
