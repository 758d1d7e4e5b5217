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
#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "ccmpc/mav_dynamics.h"

namespace ccmpc {
namespace {

MavState RandomState(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> p(-5, 5), v(-2, 2), att(-0.4, 0.4), yaw(-3, 3);
  MavState x;
  x.p = Vec3(p(rng), p(rng), p(rng));
  x.v = Vec3(v(rng), v(rng), v(rng));
  x.roll = att(rng);
  x.pitch = att(rng);
  x.yaw = yaw(rng);
  return x;
}

ControlInput RandomControl(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-0.3, 0.3), vz(-1, 1), r(-1.5, 1.5);
  return {a(rng), a(rng), vz(rng), r(rng)};
}

TEST(DynamicsStep, HoverIsEquilibrium) {
  MavState x;
  x.p = Vec3(1, 2, 1.5);
  x.yaw = 0.7;
  const MavState n = DynamicsStep(x, {}, 0.06);
  EXPECT_EQ(n.ToVector(), x.ToVector());
}

TEST(DynamicsStep, SmallPitchAccelerates) {
  DynamicsParams prm;
  prm.drag = 0.0;
  MavState x;
  x.pitch = 1e-4;
  const MavState n = DynamicsStep(x, {0, 1e-4, 0, 0}, 0.01, prm);
  EXPECT_NEAR(n.v.x() / 0.01, prm.gravity * 1e-4, 1e-9);
  EXPECT_NEAR(n.v.y(), 0.0, 1e-15);
}

TEST(DynamicsStep, FirstOrderAttitudeResponse) {
  const double dt = 0.01, theta_c = 0.2;
  MavState x;
  for (int k = 1; k <= 100; ++k) {
    x = DynamicsStep(x, {0, theta_c, 0, 0}, dt);
    const double exact = theta_c * (1 - std::exp(-k * dt / 0.2));
    EXPECT_NEAR(x.pitch, exact, 0.02 * theta_c) << k;
  }
}

TEST(DynamicsStep, AttitudeClamped) {
  DynamicsParams prm;
  MavState x;
  x.roll = prm.attitude_limit;
  const MavState n = DynamicsStep(x, {2.0, -2.0, 0, 0}, 0.5, prm);
  EXPECT_LE(std::fabs(n.roll), prm.attitude_limit);
  EXPECT_LE(std::fabs(n.pitch), prm.attitude_limit);
}

TEST(DynamicsStep, ContinuousInInputs) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const MavState x = RandomState(rng);
    const ControlInput u = RandomControl(rng);
    StateVec xv = x.ToVector();
    xv += StateVec::Constant(1e-9);
    const ControlInput u2{u.roll_cmd + 1e-9, u.pitch_cmd, u.vz_cmd, u.yaw_rate_cmd - 1e-9};
    const StateVec a = DynamicsStep(x, u, 0.06).ToVector();
    const StateVec b = DynamicsStep(MavState::FromVector(xv), u2, 0.06).ToVector();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(DynamicsStep, DragNeverSpeedsUpLevelFlight) {
  MavState x;
  x.v = Vec3(2.0, -1.0, 0.0);
  double speed = x.v.head<2>().norm();
  for (int k = 0; k < 200; ++k) {
    x = DynamicsStep(x, {}, 0.01);
    const double s = x.v.head<2>().norm();
    EXPECT_LE(s, speed);
    speed = s;
  }
}

TEST(SimulateStep, ZeroNoiseMatchesDynamics) {
  std::mt19937_64 rng(1);
  const MavState x = RandomState(rng);
  const ControlInput u = RandomControl(rng);
  EXPECT_EQ(SimulateStep(x, u, 0.06, NoiseConfig{}, 9).ToVector(),
            DynamicsStep(x, u, 0.06).ToVector());
}

TEST(SimulateStep, NoiseIsZeroMeanAndSeeded) {
  NoiseConfig noise;
  noise.process = NoiseConfig::DefaultProcess();
  MavState x;
  x.p = Vec3(1, 1, 1);
  const StateVec base = DynamicsStep(x, {}, 0.06).ToVector();
  const int n = 10000;
  StateVec sum = StateVec::Zero();
  for (int s = 0; s < n; ++s) sum += SimulateStep(x, {}, 0.06, noise, s).ToVector() - base;
  const StateVec mean = sum / n;
  for (int i = 0; i < kStateDim; ++i) {
    const double se = std::sqrt(noise.process(i, i) / n);
    EXPECT_LT(std::fabs(mean[i]), 4 * se) << i;
  }
  EXPECT_EQ(SimulateStep(x, {}, 0.06, noise, 77).ToVector(),
            SimulateStep(x, {}, 0.06, noise, 77).ToVector());
}

TEST(EstimateState, ZeroCovarianceIsTruth) {
  std::mt19937_64 rng(2);
  const MavState x = RandomState(rng);
  const GaussianState g = EstimateState(x, NoiseConfig{}, 3);
  EXPECT_EQ(g.mean, Eigen::VectorXd(x.ToVector()));
  EXPECT_TRUE(g.covariance.isZero(0.0));
}

TEST(EstimateState, EmpiricalCovarianceMatches) {
  NoiseConfig noise;
  StateVec d;
  d << 4e-4, 4e-4, 1e-4, 1e-3, 1e-3, 5e-4, 1e-4, 1e-4, 3e-4;
  noise.estimator = d.asDiagonal();
  noise.estimator(0, 1) = noise.estimator(1, 0) = 2e-4;
  const MavState x;
  EXPECT_EQ(EstimateState(x, noise, 0).covariance, Eigen::MatrixXd(noise.estimator));
  const int n = 10000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(kStateDim, kStateDim);
  for (int s = 0; s < n; ++s) {
    const Eigen::VectorXd e = EstimateState(x, noise, s).mean;
    acc += e * e.transpose();
  }
  acc /= n;
  EXPECT_LT((acc - noise.estimator).norm(), 0.1 * noise.estimator.norm());
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(8);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const MavState x = RandomState(rng);
    const ControlInput u = RandomControl(rng);
    const StateMat j = Jacobian(x, u, 0.06);
    StateMat fd;
    for (int i = 0; i < kStateDim; ++i) {
      StateVec xp = x.ToVector(), xm = x.ToVector();
      xp[i] += h;
      xm[i] -= h;
      fd.col(i) = (DynamicsStep(MavState::FromVector(xp), u, 0.06).ToVector() -
                   DynamicsStep(MavState::FromVector(xm), u, 0.06).ToVector()) /
                  (2 * h);
    }
    EXPECT_LT((j - fd).cwiseAbs().maxCoeff(), 1e-5) << trial;
  }
}

TEST(Jacobian, IntegratorAndHoverEntries) {
  const double dt = 0.06;
  const StateMat j = Jacobian(MavState{}, {}, dt);
  EXPECT_EQ(Mat3(j.block<3, 3>(0, 3)), dt * Mat3::Identity());
  EXPECT_NEAR(j(3, 7), 9.81 * dt, 1e-12);
}

TEST(ControlJacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(10);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const MavState x = RandomState(rng);
    const ControlInput u = RandomControl(rng);
    const ControlMat j = ControlJacobian(x, u, 0.06);
    for (int i = 0; i < kControlDim; ++i) {
      ControlVec up = u.ToVector(), um = u.ToVector();
      up[i] += h;
      um[i] -= h;
      const StateVec col = (DynamicsStep(x, ControlInput::FromVector(up), 0.06).ToVector() -
                            DynamicsStep(x, ControlInput::FromVector(um), 0.06).ToVector()) /
                           (2 * h);
      EXPECT_LT((j.col(i) - col).cwiseAbs().maxCoeff(), 1e-5);
    }
  }
}

std::vector<std::pair<MavState, ControlInput>> HoverTrajectory(int n) {
  MavState x;
  x.p = Vec3(0, 0, 1);
  return std::vector<std::pair<MavState, ControlInput>>(n, {x, ControlInput{}});
}

TEST(PropagateCovariance, TinyStepKeepsCovariance) {
  const StateMat g0 = NoiseConfig::DefaultProcess();
  const auto traj = HoverTrajectory(10);
  for (const auto& g : PropagateCovariance(g0, traj, StateMat::Zero(), 1e-12)) {
    EXPECT_LT((g - g0).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PropagateCovariance, AccumulatesNoise) {
  const double w = 1e-4;
  const auto traj = HoverTrajectory(10);
  const auto gammas = PropagateCovariance(StateMat::Zero(), traj, w * StateMat::Identity(), 1e-9);
  for (int k = 0; k < 10; ++k) {
    EXPECT_LT((gammas[k] - (k + 1) * w * StateMat::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(PropagateCovariance, RejectsNonPsd) {
  StateMat g0 = StateMat::Identity();
  g0(0, 0) = -1.0;
  EXPECT_THROW(PropagateCovariance(g0, HoverTrajectory(3), StateMat::Zero(), 0.06), Error);
}

TEST(PropagateCovariance, SymmetricPsdAndGrowing) {
  std::mt19937_64 rng(5);
  std::vector<std::pair<MavState, ControlInput>> traj;
  MavState x;
  for (int k = 0; k < 25; ++k) {
    ControlInput u = RandomControl(rng);
    traj.push_back({x, u});
    x = DynamicsStep(x, u, 0.06);
  }
  const auto gammas = PropagateCovariance(StateMat::Zero(), traj, NoiseConfig::DefaultProcess(), 0.06);
  double prev = 0.0;
  for (const auto& g : gammas) {
    EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_TRUE(IsPsd(g));
    EXPECT_GE((g.topLeftCorner<3, 3>().trace()), prev);
    prev = g.topLeftCorner<3, 3>().trace();
  }
}

TEST(PropagateCovariance, AgreesWithParticles) {
  const double dt = 0.06;
  const StateMat w = NoiseConfig::DefaultProcess();
  std::vector<std::pair<MavState, ControlInput>> traj;
  MavState x;
  x.p = Vec3(0, 0, 1);
  for (int k = 0; k < 25; ++k) {
    const ControlInput u{0.05 * std::sin(0.3 * k), 0.08, 0.1, 0.2};
    traj.push_back({x, u});
    x = DynamicsStep(x, u, dt);
  }
  const StateMat g0 = w;
  const Mat3 ekf = PropagateCovariance(g0, traj, w, dt).back().topLeftCorner<3, 3>();

  std::mt19937_64 rng(2024);
  const GaussianSampler init(g0), step(w);
  const int n = 20000;
  std::vector<Vec3> finals;
  finals.reserve(n);
  Vec3 mean = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    StateVec s = traj[0].first.ToVector() + StateVec(init.Sample(rng));
    for (const auto& [xn, u] : traj) {
      s = DynamicsStep(MavState::FromVector(s), u, dt).ToVector() + StateVec(step.Sample(rng));
    }
    finals.push_back(s.head<3>());
    mean += s.head<3>();
  }
  mean /= n;
  Mat3 cov = Mat3::Zero();
  for (const auto& p : finals) cov += (p - mean) * (p - mean).transpose();
  cov /= n - 1;
  EXPECT_LT((ekf - cov).norm(), 0.15 * cov.norm());
}

}  // namespace
}  // namespace ccmpc
