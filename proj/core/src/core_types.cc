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

#include "ccmpc/core_types.h"

#include <cmath>
#include <numbers>

namespace ccmpc {

CameraIntrinsics CameraIntrinsics::FromFocal(int width, int height,
                                             double focal_px,
                                             double max_range) {
  CameraIntrinsics c;
  c.width = width;
  c.height = height;
  c.focal_length_px = focal_px;
  c.cx = 0.5 * (width - 1);
  c.cy = 0.5 * (height - 1);
  c.max_range = max_range;
  c.h_fov = 2.0 * std::atan(0.5 * width / focal_px);
  c.v_fov = 2.0 * std::atan(0.5 * height / focal_px);
  return c;
}

void CameraIntrinsics::Validate() const {
  if (!(focal_length_px > 0.0)) throw Error("camera: focal length must be > 0");
  if (width < 1 || height < 1) throw Error("camera: image size must be >= 1");
  if (!(max_range > 0.0)) throw Error("camera: max_range must be > 0");
  const double pi = std::numbers::pi;
  if (!(h_fov > 0.0 && h_fov < pi) || !(v_fov > 0.0 && v_fov < pi)) {
    throw Error("camera: field of view must lie in (0, pi)");
  }
}

Mat3 RotationZ(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Mat3 RotationZYX(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  Mat3 ry, rx;
  ry << cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp;
  rx << 1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr;
  return RotationZ(yaw) * ry * rx;
}

Vec3 BodyToWorld(const Vec3& p_body, const Pose& pose) {
  return RotationOf(pose) * p_body + pose.position;
}

Vec3 WorldToBody(const Vec3& p_world, const Pose& pose) {
  return RotationOf(pose).transpose() * (p_world - pose.position);
}

Mat3 SizeCompensationMatrix(const Pose& pose) {
  const double cp = std::cos(pose.pitch), cr = std::cos(pose.roll);
  if (cp * cr < 1e-6) {
    throw Error("size compensation: degenerate attitude (cos pitch * cos roll < 1e-6)");
  }
  return Vec3(cp, cr, 1.0 / (cp * cr)).asDiagonal();
}

double GaussianPdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov) {
  const auto n = x.size();
  if (mean.size() != n || cov.rows() != n || cov.cols() != n) {
    throw Error("gaussian pdf: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error("gaussian pdf: covariance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  if (log_det < std::log(1e-18)) {
    throw Error("gaussian pdf: singular covariance");
  }
  const Eigen::VectorXd w = llt.matrixL().solve(x - mean);
  const double log_pdf = -0.5 * static_cast<double>(n) *
                             std::log(2.0 * std::numbers::pi) -
                         0.5 * log_det - 0.5 * w.squaredNorm();
  return std::exp(log_pdf);
}

bool IsPsd(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrized(m),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

double WrapAngle(double angle) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace ccmpc
