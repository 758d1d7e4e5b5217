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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ccmpc/core_types.h"
#include "ccmpc/special_functions.h"

namespace ccmpc {
namespace {

constexpr double kPi = std::numbers::pi;

Pose RandomPose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::uniform_real_distribution<double> tilt(-1.2, 1.2);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  Pose p;
  p.position = Vec3(pos(rng), pos(rng), pos(rng));
  p.roll = tilt(rng);
  p.pitch = tilt(rng);
  p.yaw = yaw(rng);
  return p;
}

TEST(BodyToWorld, IdentityAttitudeTranslates) {
  Pose pose;
  pose.position = Vec3(1, 2, 3);
  EXPECT_TRUE(BodyToWorld(Vec3::Zero(), pose).isApprox(Vec3(1, 2, 3)));
}

TEST(BodyToWorld, QuarterTurnYaw) {
  Pose pose;
  pose.yaw = kPi / 2;
  const Vec3 w = BodyToWorld(Vec3(1, 0, 0), pose);
  EXPECT_NEAR(w.x(), 0.0, 1e-12);
  EXPECT_NEAR(w.y(), 1.0, 1e-12);
  EXPECT_NEAR(w.z(), 0.0, 1e-12);
}

TEST(BodyToWorld, EighthTurnWithOffset) {
  Pose pose;
  pose.position = Vec3(0.5, 0, 0);
  pose.yaw = kPi / 4;
  const Vec3 w = BodyToWorld(Vec3(1, 1, 0), pose);
  EXPECT_NEAR(w.x(), 0.5, 1e-12);
  EXPECT_NEAR(w.y(), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(w.z(), 0.0, 1e-12);
}

TEST(BodyToWorld, RoundTripRandomPoses) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Pose pose = RandomPose(rng);
    const Vec3 p(u(rng), u(rng), u(rng));
    EXPECT_LT((WorldToBody(BodyToWorld(p, pose), pose) - p).norm(), 1e-9);
  }
}

TEST(Rotation, OrthonormalWithUnitDeterminant) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = RotationOf(RandomPose(rng));
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
  }
}

TEST(Rotation, ZyxComposition) {
  const double roll = 0.3, pitch = -0.2, yaw = 1.1;
  const Mat3 expected = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                         Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                         Eigen::AngleAxisd(roll, Vec3::UnitX()))
                            .toRotationMatrix();
  EXPECT_TRUE(RotationZYX(roll, pitch, yaw).isApprox(expected, 1e-12));
}

TEST(SizeCompensation, LevelIsExactIdentity) {
  EXPECT_EQ(SizeCompensationMatrix(Pose{}), Mat3::Identity());
}

TEST(SizeCompensation, PitchSixtyDegrees) {
  Pose pose;
  pose.pitch = kPi / 3;
  const Mat3 m = SizeCompensationMatrix(pose);
  EXPECT_NEAR(m(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(m(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(m(2, 2), 2.0, 1e-12);
}

TEST(SizeCompensation, SmallTilt) {
  Pose pose;
  pose.pitch = 0.2;
  pose.roll = 0.1;
  const Mat3 m = SizeCompensationMatrix(pose);
  EXPECT_NEAR(m(0, 0), 0.98007, 5e-6);
  EXPECT_NEAR(m(1, 1), 0.99500, 5e-6);
  EXPECT_NEAR(m(2, 2), 1.025462, 5e-6);
  EXPECT_EQ(m(0, 1), 0.0);
}

TEST(SizeCompensation, DegenerateAttitudeThrows) {
  Pose pose;
  pose.pitch = kPi / 2;
  EXPECT_THROW(SizeCompensationMatrix(pose), Error);
}

TEST(GaussianPdf, UnivariateAtMean) {
  Eigen::VectorXd x(1), m(1);
  x << 0.0;
  m << 0.0;
  EXPECT_NEAR(GaussianPdf(x, m, Eigen::MatrixXd::Identity(1, 1)), 0.39894, 5e-6);
}

TEST(GaussianPdf, TrivariateAtMean) {
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  EXPECT_NEAR(GaussianPdf(z, z, Eigen::MatrixXd::Identity(3, 3)), 0.063494, 5e-7);
}

TEST(GaussianPdf, UnivariateOneSigma) {
  Eigen::VectorXd x(1), m(1);
  x << 1.0;
  m << 0.0;
  EXPECT_NEAR(GaussianPdf(x, m, Eigen::MatrixXd::Identity(1, 1)), 0.24197, 5e-6);
}

TEST(GaussianPdf, SingularCovarianceThrows) {
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  c(0, 0) = 1.0;
  EXPECT_THROW(GaussianPdf(z, z, c), Error);
}

TEST(GaussianPdf, IntegratesToOne) {
  const double sigma = 0.7;
  Eigen::MatrixXd c(1, 1);
  c << sigma * sigma;
  Eigen::VectorXd m(1), x(1);
  m << 0.3;
  // Composite Simpson over +/- 6 sigma.
  const int n = 2000;
  const double a = m[0] - 6 * sigma, b = m[0] + 6 * sigma, h = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    x << a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * GaussianPdf(x, m, c);
  }
  EXPECT_NEAR(sum * h / 3.0, 1.0, 1e-4);
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_NEAR(WrapAngle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(WrapAngle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(WrapAngle(-kPi / 2 - 4 * kPi), -kPi / 2, 1e-12);
}

TEST(IsPsd, DetectsNegativeEigenvalue) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_TRUE(IsPsd(m));
  m(2, 2) = -1e-3;
  EXPECT_FALSE(IsPsd(m));
}

TEST(ErfInv, KnownValues) {
  EXPECT_EQ(ErfInv(0.0), 0.0);
  EXPECT_NEAR(ErfInv(0.94), 1.3299219, 1e-6);  // 50-digit reference
  EXPECT_TRUE(std::isinf(ErfInv(1.0)));
  EXPECT_TRUE(std::isnan(ErfInv(1.5)));
}

TEST(ErfInv, InvertsErfAcrossDomain) {
  for (double y = -0.999999; y < 1.0; y += 0.0137) {
    EXPECT_NEAR(std::erf(ErfInv(y)), y, 1e-12) << y;
  }
  for (double y : {1.0 - 1e-9, -(1.0 - 1e-9), 1e-12}) {
    EXPECT_NEAR(std::erf(ErfInv(y)), y, 1e-12) << y;
  }
}

TEST(ErfInv, OddFunction) {
  for (double y = 0.01; y < 1.0; y += 0.05) EXPECT_EQ(ErfInv(-y), -ErfInv(y));
}

TEST(CameraIntrinsics, FromFocalFieldOfView) {
  const auto c = CameraIntrinsics::FromFocal(160, 120, 80.0, 6.0);
  EXPECT_NEAR(c.h_fov, 2 * std::atan(80.0 / 80.0), 1e-9);
  EXPECT_NEAR(c.cx, 79.5, 1e-12);
  EXPECT_NO_THROW(c.Validate());
}

}  // namespace
}  // namespace ccmpc
