// Copyright 2026 The ccmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CCMPC_CORE_TYPES_H_
#define CCMPC_CORE_TYPES_H_

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ccmpc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Thrown when an input violates a documented precondition (degenerate
// attitude, singular covariance, malformed file, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pinhole depth camera. The camera frame coincides with the vehicle body
// frame: x forward along the optical axis, y left, z up. Image columns grow
// to the right and rows grow downwards.
struct CameraIntrinsics {
  double focal_length_px = 96.5;
  double cx = 79.5;
  double cy = 59.5;
  int width = 160;
  int height = 120;
  double max_range = 6.0;
  double h_fov = 0.0;  // radians
  double v_fov = 0.0;  // radians

  // Intrinsics whose field of view is implied by the image size and focal
  // length, principal point at the image center.
  static CameraIntrinsics FromFocal(int width, int height, double focal_px,
                                    double max_range);

  // Throws Error if any invariant is violated.
  void Validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

// Vehicle (and camera) pose. Attitude follows the Z-Y-X convention: yaw,
// then pitch, then roll.
struct Pose {
  Vec3 position = Vec3::Zero();
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

struct GaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  GaussianState() = default;
  GaussianState(Eigen::VectorXd m, Eigen::MatrixXd c)
      : mean(std::move(m)), covariance(std::move(c)) {}
  int dim() const { return static_cast<int>(mean.size()); }
};

// Yaw-oriented ellipsoid; semi_axes are expressed along the ellipsoid's own
// x/y/z axes, which are rotated about world z by `yaw`.
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3::Ones();
  double yaw = 0.0;
};

// Box obstacle; size is (length along the facing direction, width, height).
struct BoxObstacle {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  Vec3 velocity = Vec3::Zero();
};

Mat3 RotationZ(double yaw);
// R_B^W for Z-Y-X Euler angles: Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 RotationZYX(double roll, double pitch, double yaw);
inline Mat3 RotationOf(const Pose& pose) {
  return RotationZYX(pose.roll, pose.pitch, pose.yaw);
}

Vec3 BodyToWorld(const Vec3& p_body, const Pose& pose);
Vec3 WorldToBody(const Vec3& p_world, const Pose& pose);

// diag(cos(pitch), cos(roll), 1 / (cos(pitch) cos(roll))). Throws Error when
// cos(pitch) cos(roll) < 1e-6.
Mat3 SizeCompensationMatrix(const Pose& pose);

// Multivariate normal density. Throws Error when |cov| < 1e-18 or cov is not
// positive definite.
double GaussianPdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov);

template <typename Derived>
typename Derived::PlainObject Symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.transpose())).eval();
}

// True when `m` is symmetric to `tol` and its smallest eigenvalue is >= -tol.
bool IsPsd(const Eigen::MatrixXd& m, double tol = 1e-9);

// Wraps an angle to (-pi, pi].
double WrapAngle(double angle);

}  // namespace ccmpc

#endif  // CCMPC_CORE_TYPES_H_
