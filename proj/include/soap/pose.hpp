// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_POSE_HPP
#define SOAP_POSE_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>

namespace soap {

/**
 * Rigid SE(3) transform x -> R x + t.
 *
 * Frame poses map a sensor-local frame into the sequence's global frame.
 * Composition follows matrix convention: (A * B)(x) == A(B(x)).
 */
template <typename Scalar>
class RigidTransform {
 public:
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  RigidTransform() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero()) {}

  RigidTransform(const Matrix3& rotation, const Vector3& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return RigidTransform(); }

  /// Pure rotation about +z by `yaw` followed by translation.
  static RigidTransform from_yaw(Scalar yaw, const Vector3& translation = Vector3::Zero()) {
    Matrix3 r = Eigen::AngleAxis<Scalar>(yaw, Vector3::UnitZ()).toRotationMatrix();
    return RigidTransform(r, translation);
  }

  static RigidTransform from_translation(const Vector3& translation) {
    return RigidTransform(Matrix3::Identity(), translation);
  }

  const Matrix3& rotation() const noexcept { return rotation_; }
  const Vector3& translation() const noexcept { return translation_; }

  RigidTransform inverse() const {
    Matrix3 rt = rotation_.transpose();
    return RigidTransform(rt, -(rt * translation_));
  }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return RigidTransform(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
  }

  Vector3 operator*(const Vector3& p) const { return rotation_ * p + translation_; }

  /// Heading: the z angle of a ZYX Euler decomposition of the rotation.
  Scalar yaw() const { return std::atan2(rotation_(1, 0), rotation_(0, 0)); }

  /// True when the rotation is a pure rotation about z (to `tol` per entry).
  bool is_planar(Scalar tol = Scalar(1e-9)) const {
    return std::abs(rotation_(2, 0)) <= tol && std::abs(rotation_(2, 1)) <= tol &&
           std::abs(rotation_(0, 2)) <= tol && std::abs(rotation_(1, 2)) <= tol &&
           std::abs(rotation_(2, 2) - Scalar(1)) <= tol;
  }

  /// Largest entry of |R^T R - I|.
  Scalar orthonormality_error() const {
    return (rotation_.transpose() * rotation_ - Matrix3::Identity()).cwiseAbs().maxCoeff();
  }

  bool is_valid(Scalar tol = Scalar(1e-9)) const {
    return rotation_.allFinite() && translation_.allFinite() &&
           orthonormality_error() <= tol && rotation_.determinant() > Scalar(0);
  }

  /// Nearest rotation in the Frobenius sense (polar decomposition via SVD).
  RigidTransform orthonormalized() const {
    Eigen::JacobiSVD<Matrix3> svd(rotation_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix3 u = svd.matrixU();
    Matrix3 r = u * svd.matrixV().transpose();
    if (r.determinant() < Scalar(0)) {
      u.col(2) = -u.col(2);
      r = u * svd.matrixV().transpose();
    }
    return RigidTransform(r, translation_);
  }

  template <typename Other>
  RigidTransform<Other> cast() const {
    return RigidTransform<Other>(rotation_.template cast<Other>(),
                                 translation_.template cast<Other>());
  }

 private:
  Matrix3 rotation_;
  Vector3 translation_;
};

using Pose = RigidTransform<double>;
using Posef = RigidTransform<float>;

template <typename Scalar>
RigidTransform<Scalar> compose(const RigidTransform<Scalar>& a, const RigidTransform<Scalar>& b) {
  return a * b;
}

template <typename Scalar>
RigidTransform<Scalar> inverse(const RigidTransform<Scalar>& p) {
  return p.inverse();
}

}  // namespace soap

#endif  // SOAP_POSE_HPP
